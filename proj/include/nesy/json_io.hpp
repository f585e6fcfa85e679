#pragma once

#include <cmath>

#include <json.hpp>

#include "nesy/dcsp.hpp"

namespace nesy {

/** JSON view of a solution space. Individual solutions are listed only up to
 *  `list_threshold`; the consensus assignments ("union") are always present. */
inline nlohmann::json solution_space_json(const SolutionSpace& space,
                                          std::size_t list_threshold = 100) {
    nlohmann::json j;
    j["num_solutions"] = space.solutions.size();
    j["d"] = space.d;
    j["L"] = space.num_vars;
    j["complete"] = space.complete;
    auto united = nlohmann::json::array();
    for (const auto& [var, value] : space.common) {
        united.push_back(nlohmann::json::array({var, value}));
    }
    j["union"] = std::move(united);
    if (space.solutions.size() <= list_threshold) {
        j["solutions"] = space.solutions;
    }
    return j;
}

inline nlohmann::json learnability_json(const LearnabilityReport& report) {
    nlohmann::json j;
    j["learnable"] = report.learnable;
    j["d"] = report.d;
    j["L"] = report.L;
    j["d_over_L"] = report.error_bound;
    j["num_solutions"] = report.num_solutions;
    return j;
}

/** Risks can be legitimately infinite; JSON numbers cannot, so +inf becomes the
 *  string "inf". */
inline nlohmann::json risk_value_json(double value) {
    if (std::isinf(value)) return "inf";
    return value;
}

} // namespace nesy
