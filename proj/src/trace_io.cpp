#include "lark/trace_io.hpp"

#include <sstream>

#include <fmt/format.h>

#include "lark/error.hpp"
#include "lark/hash.hpp"
#include "lark/prompts.hpp"
#include "lark/scenario_io.hpp"

namespace lark {

namespace {

ordered_json usage_json(const ProviderUsage& u) {
    return {{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}, {"cost", u.cost}};
}

ProviderUsage usage_from(const ordered_json& j) {
    return {j.at("prompt_tokens").get<std::size_t>(), j.at("completion_tokens").get<std::size_t>(),
            j.at("cost").get<double>()};
}

ordered_json usage_entries_json(const std::vector<UsageEntry>& entries) {
    ordered_json a = ordered_json::array();
    for (const auto& e : entries) {
        ordered_json u = usage_json(e.usage);
        a.push_back({{"kind", to_string(e.kind)}, {"subject", e.subject}, {"usage", u}});
    }
    return a;
}

std::vector<UsageEntry> usage_entries_from(const ordered_json& a) {
    std::vector<UsageEntry> out;
    for (const auto& e : a)
        out.push_back({parse_request_kind(e.at("kind").get<std::string>()), e.at("subject").get<std::string>(),
                       usage_from(e.at("usage"))});
    return out;
}

ordered_json profiles_json(const std::vector<RankingProfile>& profiles) {
    ordered_json a = ordered_json::array();
    for (const auto& p : profiles) a.push_back({{"stakeholder", p.stakeholder_id}, {"ranking", p.ranking}});
    return a;
}

std::vector<RankingProfile> profiles_from(const ordered_json& a) {
    std::vector<RankingProfile> out;
    for (const auto& p : a)
        out.push_back({p.at("stakeholder").get<std::string>(), p.at("ranking").get<std::vector<std::string>>()});
    return out;
}

ordered_json strategies_json(const std::vector<Strategy>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& s : v) a.push_back(to_json(s));
    return a;
}

std::vector<Strategy> strategies_from(const ordered_json& a) {
    std::vector<Strategy> out;
    for (const auto& s : a) out.push_back(strategy_from_json(s));
    return out;
}

ordered_json population_json(const Population& p) {
    return {{"generation", p.generation}, {"members", strategies_json(p.members)}};
}

Population population_from(const ordered_json& j) {
    return {j.at("generation").get<int>(), strategies_from(j.at("members"))};
}

template <class T>
ordered_json optional_json(const std::optional<T>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

template <class T>
std::optional<T> optional_from(const ordered_json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

}  // namespace

ordered_json to_json(const Scenario& s) {
    ordered_json stakeholders = ordered_json::array();
    for (const auto& st : s.stakeholders)
        stakeholders.push_back({{"id", st.id}, {"persona", st.persona}, {"weight", st.influence_weight}});
    ordered_json synthetic = ordered_json::array();
    for (const auto& u : s.synthetic) {
        ordered_json features = ordered_json::object();
        for (const auto& [name, w] : u.feature_weights) features[name] = w;
        synthetic.push_back({{"stakeholder", u.stakeholder_id},
                             {"length_preference", u.length_preference},
                             {"jitter", u.jitter},
                             {"features", features}});
    }
    return {{"id", s.id},
            {"domain", to_string(s.domain)},
            {"context", s.context},
            {"objectives", s.objectives},
            {"stakeholders", stakeholders},
            {"budget", {{"target_tokens", s.budget.target_tokens}, {"lambda", s.budget.lambda}}},
            {"synthetic", synthetic}};
}

Scenario scenario_from_json(const ordered_json& j) {
    Scenario s;
    s.id = j.at("id").get<std::string>();
    s.domain = parse_domain(j.at("domain").get<std::string>());
    s.context = j.at("context").get<std::string>();
    s.objectives = j.at("objectives").get<std::vector<std::string>>();
    for (const auto& st : j.at("stakeholders"))
        s.stakeholders.push_back(
            {st.at("id").get<std::string>(), st.at("persona").get<std::string>(), st.at("weight").get<double>()});
    s.budget.target_tokens = j.at("budget").at("target_tokens").get<std::size_t>();
    s.budget.lambda = j.at("budget").at("lambda").get<double>();
    for (const auto& u : j.at("synthetic")) {
        SyntheticUtility su;
        su.stakeholder_id = u.at("stakeholder").get<std::string>();
        su.length_preference = u.at("length_preference").get<double>();
        su.jitter = u.at("jitter").get<double>();
        for (const auto& [name, w] : u.at("features").items()) su.feature_weights[name] = w.get<double>();
        s.synthetic.push_back(std::move(su));
    }
    return s;
}

ordered_json to_json(const EvolutionConfig& c) {
    return {{"k", c.k},
            {"generations", c.generations},
            {"p_plast", c.p_plast},
            {"gamma", c.gamma},
            {"tau", optional_json(c.tau)},
            {"lambda", optional_json(c.lambda)},
            {"target_tokens", optional_json(c.target_tokens)},
            {"ablation",
             {{"plasticity_off", c.ablation.plasticity_off},
              {"rcv_off", c.ablation.rcv_off},
              {"dup_mat_off", c.ablation.dup_mat_off},
              {"penalty_off", c.ablation.penalty_off}}},
            {"seed", c.seed},
            {"provider", c.provider},
            {"parallelism", c.parallelism},
            {"tokenizer", to_string(c.tokenizer)},
            {"sampling",
             {{"seed_temperature", c.sampling.seed_temperature},
              {"refine_temperature", c.sampling.refine_temperature},
              {"judge_temperature", c.sampling.judge_temperature},
              {"max_output_tokens", c.sampling.max_output_tokens}}},
            {"plasticity_delta", c.plasticity_delta},
            {"record_wall_clock", c.record_wall_clock}};
}

EvolutionConfig config_from_json(const ordered_json& j) {
    EvolutionConfig c;
    c.k = j.at("k").get<std::size_t>();
    c.generations = j.at("generations").get<std::size_t>();
    c.p_plast = j.at("p_plast").get<double>();
    c.gamma = j.at("gamma").get<double>();
    c.tau = optional_from<double>(j.at("tau"));
    c.lambda = optional_from<double>(j.at("lambda"));
    c.target_tokens = optional_from<std::size_t>(j.at("target_tokens"));
    const auto& a = j.at("ablation");
    c.ablation.plasticity_off = a.at("plasticity_off").get<bool>();
    c.ablation.rcv_off = a.at("rcv_off").get<bool>();
    c.ablation.dup_mat_off = a.at("dup_mat_off").get<bool>();
    c.ablation.penalty_off = a.at("penalty_off").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.provider = j.at("provider").get<std::string>();
    c.parallelism = j.at("parallelism").get<std::size_t>();
    c.tokenizer = parse_tokenizer_mode(j.at("tokenizer").get<std::string>());
    const auto& s = j.at("sampling");
    c.sampling.seed_temperature = s.at("seed_temperature").get<double>();
    c.sampling.refine_temperature = s.at("refine_temperature").get<double>();
    c.sampling.judge_temperature = s.at("judge_temperature").get<double>();
    c.sampling.max_output_tokens = s.at("max_output_tokens").get<std::size_t>();
    c.plasticity_delta = j.at("plasticity_delta").get<double>();
    c.record_wall_clock = j.at("record_wall_clock").get<bool>();
    return c;
}

ordered_json to_json(const Strategy& s) {
    return {{"id", s.id},
            {"text", s.text},
            {"token_count", s.token_count},
            {"parent", optional_json(s.parent)},
            {"origin", to_string(s.origin)},
            {"generation_born", s.generation_born}};
}

Strategy strategy_from_json(const ordered_json& j) {
    Strategy s;
    s.id = j.at("id").get<std::string>();
    s.text = j.at("text").get<std::string>();
    s.token_count = j.at("token_count").get<std::size_t>();
    s.parent = optional_from<std::string>(j.at("parent"));
    s.origin = parse_origin(j.at("origin").get<std::string>());
    s.generation_born = j.at("generation_born").get<int>();
    return s;
}

ordered_json to_json(const GenerationRecord& r) {
    ordered_json fitness = ordered_json::array();
    for (const auto& f : r.fitness)
        fitness.push_back({{"id", f.strategy_id},
                           {"borda", f.borda},
                           {"adjusted", f.adjusted},
                           {"tokens", f.token_count},
                           {"p_dup", f.p_dup},
                           {"penalized", f.penalized},
                           {"clamped", f.clamped}});
    ordered_json plasticity = ordered_json::array();
    for (const auto& e : r.plasticity) plasticity.push_back({{"parent", e.parent}, {"child", e.child}, {"noop", e.noop}});
    ordered_json dups = ordered_json::array();
    for (const auto& e : r.duplications)
        dups.push_back({{"parent", e.parent}, {"child", e.child}, {"hint", e.hint}, {"noop", e.noop}});
    ordered_json pool = ordered_json::array();
    for (const auto& p : r.pool_scores)
        pool.push_back({{"id", p.strategy_id}, {"borda", p.borda}, {"adjusted", p.adjusted}, {"tokens", p.token_count}});
    ordered_json repairs = ordered_json::array();
    for (const auto& e : r.repairs) repairs.push_back({{"stakeholder", e.stakeholder_id}, {"round", e.round}, {"raw", e.raw}});

    return {{"generation", r.generation},
            {"evaluated", strategies_json(r.evaluated)},
            {"profiles", profiles_json(r.profiles)},
            {"fitness", fitness},
            {"cv", optional_json(r.cv)},
            {"consensus", r.consensus_id},
            {"tau", r.tau},
            {"efficiency", r.efficiency},
            {"plasticity_events", plasticity},
            {"duplication_events", dups},
            {"matured", strategies_json(r.matured)},
            {"pool_profiles", profiles_json(r.pool_profiles)},
            {"pool_scores", pool},
            {"survivors", r.survivors},
            {"repairs", repairs},
            {"usage", usage_entries_json(r.usage)},
            {"usage_total", usage_json(r.usage_total)},
            {"wall_seconds", r.wall_seconds}};
}

GenerationRecord generation_record_from_json(const ordered_json& j) {
    GenerationRecord r;
    r.generation = j.at("generation").get<int>();
    r.evaluated = strategies_from(j.at("evaluated"));
    r.profiles = profiles_from(j.at("profiles"));
    for (const auto& f : j.at("fitness")) {
        FitnessRecord fr;
        fr.strategy_id = f.at("id").get<std::string>();
        fr.borda = f.at("borda").get<double>();
        fr.adjusted = f.at("adjusted").get<double>();
        fr.token_count = f.at("tokens").get<std::size_t>();
        fr.p_dup = f.at("p_dup").get<double>();
        fr.penalized = f.at("penalized").get<bool>();
        fr.clamped = f.at("clamped").get<bool>();
        r.fitness.push_back(std::move(fr));
    }
    r.cv = optional_from<double>(j.at("cv"));
    r.consensus_id = j.at("consensus").get<std::string>();
    r.tau = j.at("tau").get<double>();
    r.efficiency = j.at("efficiency").get<double>();
    for (const auto& e : j.at("plasticity_events"))
        r.plasticity.push_back({e.at("parent").get<std::string>(), e.at("child").get<std::string>(), e.at("noop").get<bool>()});
    for (const auto& e : j.at("duplication_events"))
        r.duplications.push_back({e.at("parent").get<std::string>(), e.at("child").get<std::string>(),
                                  e.at("hint").get<std::string>(), e.at("noop").get<bool>()});
    r.matured = strategies_from(j.at("matured"));
    r.pool_profiles = profiles_from(j.at("pool_profiles"));
    for (const auto& p : j.at("pool_scores"))
        r.pool_scores.push_back({p.at("id").get<std::string>(), p.at("borda").get<double>(),
                                 p.at("adjusted").get<double>(), p.at("tokens").get<std::size_t>()});
    r.survivors = j.at("survivors").get<std::vector<std::string>>();
    for (const auto& e : j.at("repairs"))
        r.repairs.push_back({e.at("stakeholder").get<std::string>(), e.at("round").get<std::string>(),
                             e.at("raw").get<std::vector<std::string>>()});
    r.usage = usage_entries_from(j.at("usage"));
    r.usage_total = usage_from(j.at("usage_total"));
    r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
}

std::string serialize_trace(const RunTrace& t) {
    ordered_json header = {{"type", "header"},
                           {"schema", t.schema_version},
                           {"provider", t.provider_name},
                           {"tokenizer", to_string(t.config.tokenizer)},
                           {"prompt_template_version", prompts::kTemplateVersion},
                           {"prompt_hashes", t.prompt_hashes},
                           {"config", to_json(t.config)},
                           {"scenario", to_json(t.scenario)},
                           {"initial_population", population_json(t.initial)},
                           {"seed_usage", usage_entries_json(t.seed_usage)}};
    std::string out = header.dump() + "\n";
    for (const auto& g : t.generations) {
        ordered_json line = {{"type", "generation"}};
        line.update(to_json(g));
        out += line.dump() + "\n";
    }
    ordered_json summary = {{"type", "summary"},
                            {"aborted", t.aborted},
                            {"abort_reason", t.abort_reason},
                            {"final_population", population_json(t.final_population)},
                            {"efficiency", t.efficiency},
                            {"usage", usage_json(t.total)}};
    out += summary.dump() + "\n";
    return out;
}

RunTrace parse_trace(std::string_view text) {
    RunTrace t;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    bool have_summary = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = fmt::format("line {}", line_no);
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where, e.what());
        }
        try {
            const auto type = j.at("type").get<std::string>();
            if (type == "header") {
                t.schema_version = j.at("schema").get<int>();
                if (t.schema_version != kTraceSchemaVersion)
                    throw ParseError(where + ".schema", fmt::format("unsupported schema {}", t.schema_version));
                t.provider_name = j.at("provider").get<std::string>();
                t.prompt_hashes = j.at("prompt_hashes").get<std::map<std::string, std::string>>();
                t.config = config_from_json(j.at("config"));
                t.scenario = scenario_from_json(j.at("scenario"));
                t.initial = population_from(j.at("initial_population"));
                t.seed_usage = usage_entries_from(j.at("seed_usage"));
                have_header = true;
            } else if (type == "generation") {
                if (!have_header) throw ParseError(where, "generation before header");
                t.generations.push_back(generation_record_from_json(j));
            } else if (type == "summary") {
                t.aborted = j.at("aborted").get<bool>();
                t.abort_reason = j.at("abort_reason").get<std::string>();
                t.final_population = population_from(j.at("final_population"));
                t.efficiency = j.at("efficiency").get<std::vector<double>>();
                t.total = usage_from(j.at("usage"));
                have_summary = true;
            } else {
                throw ParseError(where + ".type", "unknown record type '" + type + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(where, e.what());
        } catch (const ValidationError& e) {
            throw ParseError(where, e.what());
        }
    }
    if (!have_header) throw ParseError("header", "trace has no header line");
    if (!have_summary) throw ParseError("summary", "trace has no summary line");
    return t;
}

void save_trace(const RunTrace& trace, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_trace(trace));
}

RunTrace load_trace(const std::filesystem::path& path) { return parse_trace(read_file(path)); }

std::string trace_hash(const RunTrace& trace) { return sha256_hex(serialize_trace(trace)); }

}  // namespace lark
