#pragma once

#include <string>
#include <vector>

#include "lark/evolution.hpp"

namespace lark {

struct ReplayDiff {
    int generation = 0;  // 0: header/summary level
    std::string field;   // e.g. "fitness[g1-03].borda"
    std::string stored;
    std::string derived;
};

/// Re-derives every computed field of a trace from its primary data (texts,
/// ranking profiles, config and scenario) and reports each disagreement.
std::vector<ReplayDiff> replay(const RunTrace& trace);

std::string format_diff(const ReplayDiff& d);

}  // namespace lark
