#pragma once

#include <cstdio>
#include <future>
#include <map>
#include <thread>

#include "nesy/dcsp.hpp"

namespace nesy {

/** A multi-task bundle; members must share the concept space size L.
 *  Arities may differ — variables are shared, constraints keep their patterns. */
struct EnsembleSpec {
    std::string name;
    std::vector<KnowledgeBase> tasks;
};

/** Unions the members' task-level constraint sets over one shared variable set.
 *  Merging happens at the constraint level so the solver prunes across tasks;
 *  the solution space then equals the intersection of the members' spaces.
 *  Constraints are deduplicated by (kb signature, pattern, target). */
inline DcspInstance merge(const EnsembleSpec& spec, std::uint64_t pool_cap = kDefaultPoolCap,
                          bool injective = true) {
    if (spec.tasks.empty()) throw ValidationError("ensemble needs at least one task");
    const int L = spec.tasks.front().concept_count();
    for (const KnowledgeBase& kb : spec.tasks) {
        if (kb.concept_count() != L) {
            throw ValidationError("ensemble members must share L; got " +
                                  std::to_string(kb.concept_count()) + " vs " +
                                  std::to_string(L));
        }
    }

    DcspInstance inst;
    inst.num_vars = L;
    inst.injective = injective;
    std::map<std::string, int> slot_of;
    for (const KnowledgeBase& kb : spec.tasks) {
        auto [it, inserted] = slot_of.try_emplace(kb.signature(), static_cast<int>(inst.kbs.size()));
        if (inserted) inst.kbs.push_back(kb);
        const int slot = it->second;
        const AbductionIndex index = build_abduction_index(kb, pool_cap);
        for (std::size_t i = 0; i < index.pool_size(); ++i) {
            inst.constraints.push_back(DcspConstraint{index.pool()[i], index.label_of(i), slot});
        }
    }
    detail::canonicalize(inst);
    return inst;
}

inline LearnabilityReport analyze_ensemble(const EnsembleSpec& spec,
                                           std::uint64_t pool_cap = kDefaultPoolCap,
                                           std::uint64_t solution_cap = kDefaultSolutionCap,
                                           bool injective = true) {
    return verdict(solve_enumerate(merge(spec, pool_cap, injective), solution_cap));
}

struct GridCell {
    int k1 = 0;
    int k2 = 0;
    int d = 0;
    double d_over_l = 0.0;
    std::size_t num_solutions = 0;
    bool learnable = false;
    bool complete = true;
};

/** Pairwise mod-addition ensembles for every (k1, k2) in [kmin, kmax]^2.
 *  Cells are independent solves, run in parallel (bounded by the hardware
 *  thread count), computed once per unordered pair and mirrored; the output
 *  order is canonical regardless of scheduling. */
inline std::vector<GridCell> ensemble_grid(int kmin, int kmax, int L = 10,
                                           std::uint64_t pool_cap = kDefaultPoolCap,
                                           std::uint64_t solution_cap = kDefaultSolutionCap,
                                           bool injective = true) {
    if (kmin < 2 || kmax > 10 || kmin > kmax) {
        throw ValidationError("mod-addition grid range must satisfy 2 <= kmin <= kmax <= 10");
    }
    const auto solve_cell = [=](int k1, int k2) {
        EnsembleSpec spec{"modadd(" + std::to_string(k1) + "," + std::to_string(k2) + ")",
                          {make_modadd(k1, 1, L), make_modadd(k2, 1, L)}};
        const SolutionSpace space =
            solve_enumerate(merge(spec, pool_cap, injective), solution_cap);
        GridCell cell;
        cell.k1 = k1;
        cell.k2 = k2;
        cell.d = space.d;
        cell.d_over_l = static_cast<double>(space.d) / static_cast<double>(space.num_vars);
        cell.num_solutions = space.solutions.size();
        cell.learnable = space.complete && space.solutions.size() == 1;
        cell.complete = space.complete;
        return cell;
    };

    std::vector<std::pair<int, int>> pairs;
    for (int k1 = kmin; k1 <= kmax; ++k1) {
        for (int k2 = k1; k2 <= kmax; ++k2) pairs.emplace_back(k1, k2);
    }
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::map<std::pair<int, int>, GridCell> upper;
    for (std::size_t start = 0; start < pairs.size(); start += workers) {
        const std::size_t stop = std::min(pairs.size(), start + workers);
        std::vector<std::future<GridCell>> batch;
        for (std::size_t i = start; i < stop; ++i) {
            batch.push_back(std::async(std::launch::async, solve_cell, pairs[i].first,
                                       pairs[i].second));
        }
        for (std::size_t i = start; i < stop; ++i) {
            upper.emplace(pairs[i], batch[i - start].get());
        }
    }

    std::vector<GridCell> cells;
    for (int k1 = kmin; k1 <= kmax; ++k1) {
        for (int k2 = kmin; k2 <= kmax; ++k2) {
            GridCell cell = upper.at(std::minmax(k1, k2));
            cell.k1 = k1;
            cell.k2 = k2;
            cells.push_back(cell);
        }
    }
    return cells;
}

inline std::string grid_csv(const std::vector<GridCell>& cells) {
    std::string out = "k1,k2,d,d_over_L,num_solutions,learnable\n";
    char buf[64];
    for (const GridCell& c : cells) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.6f,%zu,%s\n", c.k1, c.k2, c.d, c.d_over_l,
                      c.num_solutions, c.learnable ? "true" : "false");
        out += buf;
    }
    return out;
}

} // namespace nesy
