#include "lark/scenario_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "lark/error.hpp"

namespace lark {

namespace {

YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& path) {
    YAML::Node n = parent[key];
    if (!n || n.IsNull()) throw ParseError(path + key, "missing required field");
    return n;
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field) {
    if (!n.IsScalar()) throw ParseError(field, "expected a scalar");
    try {
        return n.as<T>();
    } catch (const YAML::Exception& e) {
        throw ParseError(field, e.msg);
    }
}

std::string text_field(const YAML::Node& parent, const std::string& key, const std::string& path) {
    return scalar<std::string>(require(parent, key, path), path + key);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error("could not format double");
    return std::string(buf, end);
}

Scenario parse_scenario(std::string_view document) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(document));
    } catch (const YAML::Exception& e) {
        throw ParseError("<document>", e.msg);
    }
    if (!root.IsMap()) throw ParseError("<document>", "expected a mapping at top level");

    const int version = scalar<int>(require(root, "version", ""), "version");
    if (version != kScenarioSchemaVersion)
        throw ParseError("version", fmt::format("unsupported schema version {}", version));

    Scenario s;
    s.id = text_field(root, "id", "");
    s.context = text_field(root, "context", "");
    try {
        s.domain = parse_domain(text_field(root, "domain", ""));
    } catch (const ValidationError& e) {
        throw ParseError("domain", e.what());
    }

    const YAML::Node objectives = require(root, "objectives", "");
    if (!objectives.IsSequence() || objectives.size() == 0)
        throw ParseError("objectives", "expected a non-empty list");
    for (std::size_t i = 0; i < objectives.size(); ++i)
        s.objectives.push_back(scalar<std::string>(objectives[i], fmt::format("objectives[{}]", i)));

    const YAML::Node stakeholders = require(root, "stakeholders", "");
    if (!stakeholders.IsSequence() || stakeholders.size() == 0)
        throw ParseError("stakeholders", "expected a non-empty list");
    for (std::size_t i = 0; i < stakeholders.size(); ++i) {
        const auto path = fmt::format("stakeholders[{}].", i);
        const YAML::Node node = stakeholders[i];
        if (!node.IsMap()) throw ParseError(path, "expected a mapping");
        Stakeholder st;
        st.id = text_field(node, "id", path);
        st.persona = node["persona"] ? scalar<std::string>(node["persona"], path + "persona") : std::string{};
        st.influence_weight = scalar<double>(require(node, "weight", path), path + "weight");
        s.stakeholders.push_back(std::move(st));
    }

    const YAML::Node budget = require(root, "budget", "");
    if (!budget.IsMap()) throw ParseError("budget", "expected a mapping");
    const long long target = scalar<long long>(require(budget, "target_tokens", "budget."), "budget.target_tokens");
    if (target <= 0) throw ParseError("budget.target_tokens", "must be positive");
    s.budget.target_tokens = static_cast<std::size_t>(target);
    s.budget.lambda = scalar<double>(require(budget, "lambda", "budget."), "budget.lambda");

    if (const YAML::Node synthetic = root["synthetic"]; synthetic && !synthetic.IsNull()) {
        const YAML::Node utilities = require(synthetic, "utilities", "synthetic.");
        if (!utilities.IsSequence()) throw ParseError("synthetic.utilities", "expected a list");
        for (std::size_t i = 0; i < utilities.size(); ++i) {
            const auto path = fmt::format("synthetic.utilities[{}].", i);
            const YAML::Node node = utilities[i];
            SyntheticUtility u;
            u.stakeholder_id = text_field(node, "stakeholder", path);
            if (node["length_preference"])
                u.length_preference = scalar<double>(node["length_preference"], path + "length_preference");
            if (node["jitter"]) u.jitter = scalar<double>(node["jitter"], path + "jitter");
            if (const YAML::Node features = node["features"]; features && !features.IsNull()) {
                if (!features.IsMap()) throw ParseError(path + "features", "expected a mapping");
                for (const auto& kv : features) {
                    const auto name = scalar<std::string>(kv.first, path + "features");
                    u.feature_weights[name] = scalar<double>(kv.second, path + "features." + name);
                }
            }
            s.synthetic.push_back(std::move(u));
        }
    }

    normalize_and_validate(s);
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

std::string dump_scenario(const Scenario& s) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "version" << YAML::Value << kScenarioSchemaVersion;
    out << YAML::Key << "id" << YAML::Value << s.id;
    out << YAML::Key << "domain" << YAML::Value << std::string(to_string(s.domain));
    out << YAML::Key << "context" << YAML::Value;
    const bool block = s.context.size() > 1 && s.context.back() == '\n' && s.context[s.context.size() - 2] != '\n';
    if (block) {
        out << YAML::Literal << s.context;
    } else if (s.context.find('\n') != std::string::npos) {
        out << YAML::DoubleQuoted << s.context;
    } else {
        out << s.context;
    }
    out << YAML::Key << "objectives" << YAML::Value << YAML::BeginSeq;
    for (const auto& o : s.objectives) out << o;
    out << YAML::EndSeq;
    out << YAML::Key << "stakeholders" << YAML::Value << YAML::BeginSeq;
    for (const auto& st : s.stakeholders) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << st.id;
        out << YAML::Key << "persona" << YAML::Value << st.persona;
        out << YAML::Key << "weight" << YAML::Value << format_double(st.influence_weight);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "budget" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "target_tokens" << YAML::Value << s.budget.target_tokens;
    out << YAML::Key << "lambda" << YAML::Value << format_double(s.budget.lambda);
    out << YAML::EndMap;
    if (!s.synthetic.empty()) {
        out << YAML::Key << "synthetic" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "utilities" << YAML::Value << YAML::BeginSeq;
        for (const auto& u : s.synthetic) {
            out << YAML::BeginMap;
            out << YAML::Key << "stakeholder" << YAML::Value << u.stakeholder_id;
            out << YAML::Key << "length_preference" << YAML::Value << format_double(u.length_preference);
            out << YAML::Key << "jitter" << YAML::Value << format_double(u.jitter);
            out << YAML::Key << "features" << YAML::Value << YAML::BeginMap;
            for (const auto& [name, w] : u.feature_weights) out << YAML::Key << name << YAML::Value << format_double(w);
            out << YAML::EndMap;
            out << YAML::EndMap;
        }
        out << YAML::EndSeq;
        out << YAML::EndMap;
    }
    out << YAML::EndMap;
    if (!out.good()) throw Error("yaml emitter: " + out.GetLastError());
    return std::string(out.c_str()) + "\n";
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    write_file_atomic(path, dump_scenario(scenario));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + tmp.string());
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!f) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace lark
