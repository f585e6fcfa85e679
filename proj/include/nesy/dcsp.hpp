#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <utility>

#include "nesy/kb.hpp"

namespace nesy {

/** One constraint: sigma(assignment applied to `pattern`) must equal `target`.
 *  `kb_index` selects the forward operator inside the owning instance. */
struct DcspConstraint {
    ClusterSeq pattern;
    Label target = 0;
    int kb_index = 0;

    friend bool operator==(const DcspConstraint&, const DcspConstraint&) = default;
    friend auto operator<=>(const DcspConstraint& a, const DcspConstraint& b) {
        return std::tie(a.kb_index, a.pattern, a.target) <=>
               std::tie(b.kb_index, b.pattern, b.target);
    }
};

/** The derived constraint satisfaction problem: variables V_0..V_{L-1} over the
 *  concept domain {0..L-1}, one variable per cluster. `injective` adds the
 *  all-different condition the restricted hypothesis space implies. */
struct DcspInstance {
    int num_vars = 0;
    bool injective = true;
    std::vector<KnowledgeBase> kbs;
    std::vector<DcspConstraint> constraints;
};

/** One consistent assignment; entry i is the concept value of variable V_i. */
using Solution = std::vector<Concept>;

/** Complete (unless capped) solution set plus its consensus statistics.
 *  `common` holds the (variable, value) pairs shared by every solution — the
 *  Union of the space — and d = num_vars - |common|. */
struct SolutionSpace {
    int num_vars = 0;
    std::vector<Solution> solutions;
    std::vector<std::pair<int, int>> common;
    int d = 0;
    bool complete = true;
};

struct LearnabilityReport {
    bool learnable = false;
    int d = 0;
    int L = 0;
    double error_bound = 0.0;
    std::size_t num_solutions = 0;
};

namespace detail {

inline void validate_constraint(const DcspInstance& inst, const DcspConstraint& c) {
    if (c.kb_index < 0 || c.kb_index >= static_cast<int>(inst.kbs.size())) {
        throw ValidationError("constraint references an unknown knowledge base");
    }
    const KnowledgeBase& kb = inst.kbs[static_cast<std::size_t>(c.kb_index)];
    if (static_cast<int>(c.pattern.size()) != kb.arity()) {
        throw ValidationError("arity error: constraint pattern length " +
                              std::to_string(c.pattern.size()) + " does not match task arity " +
                              std::to_string(kb.arity()));
    }
    for (int v : c.pattern) {
        if (v < 0 || v >= inst.num_vars) {
            throw ValidationError("domain error: cluster index " + std::to_string(v) +
                                  " outside [0, " + std::to_string(inst.num_vars) + ")");
        }
    }
}

inline void canonicalize(DcspInstance& inst) {
    for (const auto& c : inst.constraints) validate_constraint(inst, c);
    std::sort(inst.constraints.begin(), inst.constraints.end());
    inst.constraints.erase(std::unique(inst.constraints.begin(), inst.constraints.end()),
                           inst.constraints.end());
}

} // namespace detail

/** Builds the dataset-level DCSP: one constraint per (pattern, label) sample,
 *  duplicates removed. When `index` is given, labels are checked against Y. */
inline DcspInstance build_from_dataset(const KnowledgeBase& kb,
                                       const std::vector<std::pair<ClusterSeq, Label>>& data,
                                       bool injective = true,
                                       const AbductionIndex* index = nullptr) {
    DcspInstance inst;
    inst.num_vars = kb.concept_count();
    inst.injective = injective;
    inst.kbs.push_back(kb);
    inst.constraints.reserve(data.size());
    for (const auto& [pattern, label] : data) {
        if (index && !index->has_label(label)) {
            throw ValidationError("label " + std::to_string(label) +
                                  " is not in the task's label space");
        }
        inst.constraints.push_back(DcspConstraint{pattern, label, 0});
    }
    detail::canonicalize(inst);
    return inst;
}

/** The infinite-data limit: one constraint (z, sigma(z)) for every z in B. */
inline DcspInstance build_task_level(const KnowledgeBase& kb, const AbductionIndex& index,
                                     bool injective = true) {
    DcspInstance inst;
    inst.num_vars = kb.concept_count();
    inst.injective = injective;
    inst.kbs.push_back(kb);
    inst.constraints.reserve(index.pool_size());
    for (std::size_t i = 0; i < index.pool_size(); ++i) {
        inst.constraints.push_back(DcspConstraint{index.pool()[i], index.label_of(i), 0});
    }
    detail::canonicalize(inst);
    return inst;
}

namespace detail {

/** Chronological backtracking with forward checking. Variables are assigned in
 *  index order, values in ascending order, so the enumeration is deterministic
 *  and solutions come out lexicographically sorted.
 *
 *  Constraints are specialized by their number of distinct variables:
 *    1  -> resolved once by filtering the variable's root domain,
 *    2  -> precomputed value-pair support masks (O(1) propagation),
 *    3+ -> lazy evaluation once at most one variable remains unassigned.
 */
class Enumerator {
public:
    Enumerator(const DcspInstance& inst, std::uint64_t cap) : inst_(inst), cap_(cap) {
        L_ = inst.num_vars;
        if (L_ < 1) throw ValidationError("instance must have at least one variable");
        if (L_ > 63) {
            throw ValidationError("solver supports at most 63 variables, got " +
                                  std::to_string(L_));
        }
        if (cap_ < 1) throw ValidationError("solution cap must be >= 1");
        full_mask_ = (1ull << L_) - 1;
    }

    SolutionSpace run() {
        SolutionSpace space;
        space.num_vars = L_;
        domains_.assign(static_cast<std::size_t>(L_), full_mask_);
        assignment_.assign(static_cast<std::size_t>(L_), -1);
        scratch_.clear();
        binary_.clear();
        generic_.clear();
        var_binary_.assign(static_cast<std::size_t>(L_), {});
        var_generic_.assign(static_cast<std::size_t>(L_), {});

        bool root_consistent = true;
        for (const auto& c : inst_.constraints) {
            if (!compile_constraint(c)) {
                root_consistent = false;
                break;
            }
        }
        if (root_consistent) {
            solutions_.clear();
            stopped_ = false;
            capped_ = false;
            search(0);
            space.solutions = std::move(solutions_);
            space.complete = !capped_;
        } else {
            space.complete = true; // proven empty, not capped
        }
        finalize(space);
        return space;
    }

private:
    struct BinaryConstraint {
        int var_a = 0, var_b = 0;
        // allow_from_a[v] = mask of values of var_b compatible with var_a = v.
        std::vector<std::uint64_t> allow_from_a;
        std::vector<std::uint64_t> allow_from_b;
    };

    struct GenericConstraint {
        const DcspConstraint* c = nullptr;
        std::vector<int> distinct_vars;
    };

    // Returns false if a single-variable constraint empties a root domain.
    bool compile_constraint(const DcspConstraint& c) {
        std::vector<int> distinct = c.pattern;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        const KnowledgeBase& kb = inst_.kbs[static_cast<std::size_t>(c.kb_index)];
        ConceptSeq tuple(c.pattern.size());

        if (distinct.size() == 1) {
            const int var = distinct[0];
            std::uint64_t allowed = 0;
            for (int v = 0; v < L_; ++v) {
                std::fill(tuple.begin(), tuple.end(), v);
                if (kb.forward_unchecked(tuple) == c.target) allowed |= 1ull << v;
            }
            domains_[static_cast<std::size_t>(var)] &= allowed;
            return domains_[static_cast<std::size_t>(var)] != 0;
        }

        if (distinct.size() == 2) {
            BinaryConstraint bc;
            bc.var_a = distinct[0];
            bc.var_b = distinct[1];
            bc.allow_from_a.assign(static_cast<std::size_t>(L_), 0);
            bc.allow_from_b.assign(static_cast<std::size_t>(L_), 0);
            for (int va = 0; va < L_; ++va) {
                for (int vb = 0; vb < L_; ++vb) {
                    for (std::size_t i = 0; i < c.pattern.size(); ++i) {
                        tuple[i] = (c.pattern[i] == bc.var_a) ? va : vb;
                    }
                    if (kb.forward_unchecked(tuple) == c.target) {
                        bc.allow_from_a[static_cast<std::size_t>(va)] |= 1ull << vb;
                        bc.allow_from_b[static_cast<std::size_t>(vb)] |= 1ull << va;
                    }
                }
            }
            const int idx = static_cast<int>(binary_.size());
            binary_.push_back(std::move(bc));
            var_binary_[static_cast<std::size_t>(distinct[0])].push_back(idx);
            var_binary_[static_cast<std::size_t>(distinct[1])].push_back(idx);
            return true;
        }

        GenericConstraint gc;
        gc.c = &c;
        gc.distinct_vars = distinct;
        const int idx = static_cast<int>(generic_.size());
        generic_.push_back(std::move(gc));
        for (int var : generic_.back().distinct_vars) {
            var_generic_[static_cast<std::size_t>(var)].push_back(idx);
        }
        return true;
    }

    void search(int depth) {
        if (stopped_) return;
        if (depth == L_) {
            if (solutions_.size() == cap_) {
                // A solution beyond the cap proves the enumeration incomplete;
                // exactly cap solutions would still count as complete.
                capped_ = true;
                stopped_ = true;
                return;
            }
            solutions_.push_back(assignment_);
            return;
        }
        const int var = depth;
        const std::vector<std::uint64_t> saved = domains_;
        std::uint64_t todo = domains_[static_cast<std::size_t>(var)];
        while (todo != 0 && !stopped_) {
            const int value = std::countr_zero(todo);
            todo &= todo - 1;
            assignment_[static_cast<std::size_t>(var)] = value;
            domains_[static_cast<std::size_t>(var)] = 1ull << value;
            if (propagate(var, value)) search(depth + 1);
            domains_ = saved;
        }
        assignment_[static_cast<std::size_t>(var)] = -1;
    }

    bool propagate(int var, int value) {
        if (inst_.injective) {
            const std::uint64_t clear = ~(1ull << value);
            for (int u = 0; u < L_; ++u) {
                if (u == var || assignment_[static_cast<std::size_t>(u)] >= 0) continue;
                if ((domains_[static_cast<std::size_t>(u)] &= clear) == 0) return false;
            }
        }
        for (int idx : var_binary_[static_cast<std::size_t>(var)]) {
            const BinaryConstraint& bc = binary_[static_cast<std::size_t>(idx)];
            const int other = (bc.var_a == var) ? bc.var_b : bc.var_a;
            const std::uint64_t allow = (bc.var_a == var)
                                            ? bc.allow_from_a[static_cast<std::size_t>(value)]
                                            : bc.allow_from_b[static_cast<std::size_t>(value)];
            if ((domains_[static_cast<std::size_t>(other)] &= allow) == 0) return false;
        }
        for (int idx : var_generic_[static_cast<std::size_t>(var)]) {
            const GenericConstraint& gc = generic_[static_cast<std::size_t>(idx)];
            int unassigned = -1;
            bool two_open = false;
            for (int u : gc.distinct_vars) {
                if (assignment_[static_cast<std::size_t>(u)] < 0) {
                    if (unassigned >= 0) {
                        two_open = true;
                        break;
                    }
                    unassigned = u;
                }
            }
            if (two_open) continue;
            const KnowledgeBase& kb = inst_.kbs[static_cast<std::size_t>(gc.c->kb_index)];
            scratch_.resize(gc.c->pattern.size());
            if (unassigned < 0) {
                for (std::size_t i = 0; i < gc.c->pattern.size(); ++i) {
                    scratch_[i] = assignment_[static_cast<std::size_t>(gc.c->pattern[i])];
                }
                if (kb.forward_unchecked(scratch_) != gc.c->target) return false;
            } else {
                std::uint64_t allowed = 0;
                std::uint64_t candidates = domains_[static_cast<std::size_t>(unassigned)];
                while (candidates != 0) {
                    const int w = std::countr_zero(candidates);
                    candidates &= candidates - 1;
                    for (std::size_t i = 0; i < gc.c->pattern.size(); ++i) {
                        const int pv = gc.c->pattern[i];
                        scratch_[i] = (pv == unassigned)
                                          ? w
                                          : assignment_[static_cast<std::size_t>(pv)];
                    }
                    if (kb.forward_unchecked(scratch_) == gc.c->target) allowed |= 1ull << w;
                }
                if ((domains_[static_cast<std::size_t>(unassigned)] &= allowed) == 0) return false;
            }
        }
        return true;
    }

    void finalize(SolutionSpace& space) const {
        space.common.clear();
        if (space.solutions.empty()) {
            space.d = space.num_vars;
            return;
        }
        const Solution& first = space.solutions.front();
        for (int v = 0; v < space.num_vars; ++v) {
            const Concept value = first[static_cast<std::size_t>(v)];
            bool shared = true;
            for (const Solution& s : space.solutions) {
                if (s[static_cast<std::size_t>(v)] != value) {
                    shared = false;
                    break;
                }
            }
            if (shared) space.common.emplace_back(v, value);
        }
        space.d = space.num_vars - static_cast<int>(space.common.size());
    }

    const DcspInstance& inst_;
    std::uint64_t cap_;
    int L_ = 0;
    std::uint64_t full_mask_ = 0;
    std::vector<std::uint64_t> domains_;
    std::vector<int> assignment_;
    ConceptSeq scratch_;
    std::vector<BinaryConstraint> binary_;
    std::vector<GenericConstraint> generic_;
    std::vector<std::vector<int>> var_binary_;
    std::vector<std::vector<int>> var_generic_;
    std::vector<Solution> solutions_;
    bool stopped_ = false;
    bool capped_ = false;
};

} // namespace detail

/** Enumerates every satisfying assignment, or the first `cap` of them (in which
 *  case complete = false). An empty result is a valid outcome and reports that
 *  the no-conflict assumption fails for this instance. */
inline SolutionSpace solve_enumerate(const DcspInstance& inst,
                                     std::uint64_t cap = kDefaultSolutionCap) {
    return detail::Enumerator(inst, cap).run();
}

/** Recomputes (d, Union) directly from the stored solutions. */
inline std::pair<int, std::vector<std::pair<int, int>>> disagreement(const SolutionSpace& space) {
    if (space.solutions.empty()) {
        throw NoSolutionError("disagreement is undefined for an empty solution space");
    }
    std::vector<std::pair<int, int>> common;
    const Solution& first = space.solutions.front();
    for (int v = 0; v < space.num_vars; ++v) {
        const Concept value = first[static_cast<std::size_t>(v)];
        if (std::all_of(space.solutions.begin(), space.solutions.end(),
                        [&](const Solution& s) { return s[static_cast<std::size_t>(v)] == value; })) {
            common.emplace_back(v, value);
        }
    }
    return {space.num_vars - static_cast<int>(common.size()), std::move(common)};
}

/** Learnable iff the complete space has exactly one solution; the asymptotic
 *  concept-error bound is d/L. Withheld (throws) for capped or empty spaces. */
inline LearnabilityReport verdict(const SolutionSpace& space) {
    if (!space.complete) {
        throw IncompleteEnumerationError(
            "verdict withheld: enumeration stopped at the solution cap, the solution space "
            "is incomplete");
    }
    if (space.solutions.empty()) {
        throw NoSolutionError(
            "verdict withheld: the DCSP has no solution (no-conflict assumption violated)");
    }
    LearnabilityReport report;
    report.num_solutions = space.solutions.size();
    report.learnable = space.solutions.size() == 1;
    report.d = space.d;
    report.L = space.num_vars;
    report.error_bound = static_cast<double>(space.d) / static_cast<double>(space.num_vars);
    return report;
}

} // namespace nesy
