#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <thread>

#include "nesy/dcsp.hpp"
#include "nesy/distribution.hpp"

namespace nesy {

/** One seeded sampling + ERM run. ERM over the restricted hypothesis space is
 *  exactly: build the dataset DCSP, enumerate, pick a solution uniformly. */
struct TrialReport {
    std::uint64_t seed = 0;
    int n_samples = 0;
    std::size_t num_solutions = 0;
    Solution chosen;
    double concept_error = 0.0;
    double nesy_error = 0.0;
    bool covered = false;   // every sequence in B appeared in the sample
    bool complete = true;   // false when the solution cap fired (trial flagged)
    double runtime_ms = 0.0;
};

struct SweepRow {
    int n_samples = 0;
    double mean_concept_acc = 0.0;
    double stderr_concept_acc = 0.0;
    double mean_reasoning_acc = 0.0;
    double stderr_reasoning_acc = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double bound_line = 0.0; // 1 - d/L from the task-level verdict
    int d = 0;
    int L = 0;
    bool any_flagged = false;
};

struct CoverageRow {
    int n_samples = 0;
    double empirical_q = 0.0;     // observed Pr[not all of B sampled]
    double bound_geometric = 0.0; // min(1, |B| (1 - kappa)^N)
    double bound_exp = 0.0;       // min(1, |B| exp(-N kappa))
    double slack = 0.0;           // 99% binomial slack around the geometric bound
    bool flagged = false;
};

struct CoverageReport {
    std::vector<CoverageRow> rows;
    bool ok = true;
};

/** N i.i.d. draws from P(Z), emitted as (cluster pattern, label) pairs. */
inline std::vector<std::pair<ClusterSeq, Label>> sample_dataset(const ConceptDistribution& dist,
                                                                int n, std::uint64_t seed) {
    if (n < 1) throw ValidationError("sample size N must be >= 1");
    Rng rng(seed);
    const AbductionIndex& index = dist.index();
    std::vector<std::pair<ClusterSeq, Label>> data;
    data.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t j = dist.sample(rng);
        data.emplace_back(index.pool()[j], index.label_of(j));
    }
    return data;
}

namespace detail {

inline double hamming_from_identity(const Solution& s) {
    int wrong = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != static_cast<Concept>(i)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(s.size());
}

inline double solution_nesy_error(const Solution& s, const KnowledgeBase& kb,
                                  const ConceptDistribution& dist) {
    const AbductionIndex& index = dist.index();
    double err = 0.0;
    ConceptSeq mapped;
    for (std::size_t i = 0; i < index.pool_size(); ++i) {
        const ConceptSeq& z = index.pool()[i];
        mapped.resize(z.size());
        for (std::size_t j = 0; j < z.size(); ++j) {
            mapped[j] = s[static_cast<std::size_t>(z[j])];
        }
        if (kb.forward_unchecked(mapped) != index.label_of(i)) err += dist.weight(i);
    }
    return err;
}

} // namespace detail

/** Samples N pairs, solves the dataset DCSP, and selects one solution uniformly
 *  at random (the "arbitrarily selected hypothesis" of the asymptotic regime).
 *  Sampling and tie-breaking share one seeded stream. */
inline TrialReport erm_trial(const KnowledgeBase& kb, const ConceptDistribution& dist, int n,
                             std::uint64_t seed, std::uint64_t solution_cap = kDefaultSolutionCap,
                             bool injective = true) {
    const auto start = std::chrono::steady_clock::now();
    if (n < 1) throw ValidationError("sample size N must be >= 1");
    Rng rng(seed);
    const AbductionIndex& index = dist.index();

    std::vector<bool> seen(index.pool_size(), false);
    std::size_t distinct = 0;
    std::vector<std::pair<ClusterSeq, Label>> data;
    data.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t j = dist.sample(rng);
        if (!seen[j]) {
            seen[j] = true;
            ++distinct;
            data.emplace_back(index.pool()[j], index.label_of(j));
        }
    }

    TrialReport report;
    report.seed = seed;
    report.n_samples = n;
    report.covered = distinct == index.pool_size();

    const DcspInstance inst = build_from_dataset(kb, data, injective, &index);
    SolutionSpace space = solve_enumerate(inst, solution_cap);
    if (space.solutions.empty()) {
        throw NoSolutionError("sampled dataset produced an unsatisfiable DCSP; "
                              "samples generated by sigma are always realizable");
    }
    report.complete = space.complete;
    report.num_solutions = space.solutions.size();
    const std::size_t pick = static_cast<std::size_t>(rng.below(space.solutions.size()));
    report.chosen = space.solutions[pick];
    report.concept_error = detail::hamming_from_identity(report.chosen);
    report.nesy_error = detail::solution_nesy_error(report.chosen, kb, dist);
    report.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return report;
}

/** Repeated trials over an N grid; trial seeds derive from (base_seed, index)
 *  so results are independent of execution order. */
inline SweepResult sweep(const KnowledgeBase& kb, const ConceptDistribution& dist,
                         const std::vector<int>& n_grid, int repeats, std::uint64_t base_seed,
                         std::uint64_t solution_cap = kDefaultSolutionCap, bool injective = true) {
    if (repeats < 1) throw ValidationError("repeats must be >= 1");
    if (n_grid.empty()) throw ValidationError("N grid must be non-empty");

    SweepResult result;
    const DcspInstance task_inst = build_task_level(kb, dist.index(), injective);
    const LearnabilityReport task_verdict = verdict(solve_enumerate(task_inst, solution_cap));
    result.d = task_verdict.d;
    result.L = task_verdict.L;
    result.bound_line = 1.0 - task_verdict.error_bound;

    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        std::vector<double> concept_acc(static_cast<std::size_t>(repeats));
        std::vector<double> reasoning_acc(static_cast<std::size_t>(repeats));
        // trials own independent seed streams, so parallel execution cannot
        // change any reported number
        for (std::size_t start = 0; start < static_cast<std::size_t>(repeats);
             start += workers) {
            const std::size_t stop = std::min(static_cast<std::size_t>(repeats),
                                              start + workers);
            std::vector<std::future<TrialReport>> batch;
            for (std::size_t r = start; r < stop; ++r) {
                const std::uint64_t trial_index = g * static_cast<std::size_t>(repeats) + r;
                batch.push_back(std::async(std::launch::async, [&, trial_index, g] {
                    return erm_trial(kb, dist, n_grid[g], derive_seed(base_seed, trial_index),
                                     solution_cap, injective);
                }));
            }
            for (std::size_t r = start; r < stop; ++r) {
                const TrialReport trial = batch[r - start].get();
                if (!trial.complete) result.any_flagged = true;
                concept_acc[r] = 1.0 - trial.concept_error;
                reasoning_acc[r] = 1.0 - trial.nesy_error;
            }
        }
        const auto mean_stderr = [&](const std::vector<double>& xs) {
            const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
                                static_cast<double>(xs.size());
            if (xs.size() < 2) return std::pair<double, double>{mean, 0.0};
            double ss = 0.0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
            return std::pair<double, double>{mean, sd / std::sqrt(static_cast<double>(xs.size()))};
        };
        SweepRow row;
        row.n_samples = n_grid[g];
        std::tie(row.mean_concept_acc, row.stderr_concept_acc) = mean_stderr(concept_acc);
        std::tie(row.mean_reasoning_acc, row.stderr_reasoning_acc) = mean_stderr(reasoning_acc);
        result.rows.push_back(row);
    }
    return result;
}

/** N > (1/kappa) ln(|B| / epsilon) guarantees concept error <= epsilon for
 *  learnable tasks. Natural log; a non-positive bound means any N suffices. */
inline double sample_complexity_bound(const ConceptDistribution& dist, double epsilon) {
    if (!std::isfinite(epsilon) || epsilon <= 0.0) {
        throw ValidationError("epsilon must be a positive number");
    }
    const double b = static_cast<double>(dist.index().pool_size());
    return std::log(b / epsilon) / dist.kappa();
}

/** Empirical frequency of the coverage-failure event Q at each N versus the
 *  union bound |B|(1-kappa)^N (and its exp relaxation). A row is flagged when
 *  the empirical value exceeds the geometric bound beyond 99% binomial slack. */
inline CoverageReport coverage_validation(const ConceptDistribution& dist,
                                          const std::vector<int>& n_grid, int repeats,
                                          std::uint64_t base_seed) {
    if (repeats < 1) throw ValidationError("repeats must be >= 1");
    const AbductionIndex& index = dist.index();
    const double b = static_cast<double>(index.pool_size());
    const double kappa = dist.kappa();
    constexpr double z99 = 2.5758293035489004; // two-sided 99% normal quantile

    CoverageReport report;
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        const int n = n_grid[g];
        if (n < 1) throw ValidationError("sample size N must be >= 1");
        int q_count = 0;
        for (int r = 0; r < repeats; ++r) {
            const std::uint64_t trial_index =
                g * static_cast<std::size_t>(repeats) + static_cast<std::size_t>(r);
            Rng rng(derive_seed(base_seed, trial_index));
            std::vector<bool> seen(index.pool_size(), false);
            std::size_t distinct = 0;
            for (int i = 0; i < n && distinct < index.pool_size(); ++i) {
                const std::size_t j = dist.sample(rng);
                if (!seen[j]) {
                    seen[j] = true;
                    ++distinct;
                }
            }
            if (distinct < index.pool_size()) ++q_count;
        }
        CoverageRow row;
        row.n_samples = n;
        row.empirical_q = static_cast<double>(q_count) / static_cast<double>(repeats);
        row.bound_geometric = std::min(1.0, b * std::pow(1.0 - kappa, n));
        row.bound_exp = std::min(1.0, b * std::exp(-static_cast<double>(n) * kappa));
        row.slack = z99 * std::sqrt(row.bound_geometric * (1.0 - row.bound_geometric) /
                                    static_cast<double>(repeats));
        row.flagged = row.bound_geometric < 1.0 &&
                      row.empirical_q > row.bound_geometric + row.slack;
        if (row.flagged) report.ok = false;
        report.rows.push_back(row);
    }
    return report;
}

namespace detail {

inline std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

} // namespace detail

/** Trial CSV. runtime_ms is opt-in: wall-clock time is the one column that
 *  cannot reproduce byte-identically across reruns. */
inline std::string trial_csv_header(bool with_runtime = false) {
    std::string h = "task,seed,N,num_solutions,concept_error,nesy_error,covered";
    if (with_runtime) h += ",runtime_ms";
    return h + "\n";
}

inline std::string trial_csv_row(const std::string& task, const TrialReport& t,
                                 bool with_runtime = false) {
    std::string row = task + "," + std::to_string(t.seed) + "," + std::to_string(t.n_samples) +
                      "," + std::to_string(t.num_solutions) + "," +
                      detail::fixed6(t.concept_error) + "," + detail::fixed6(t.nesy_error) + "," +
                      (t.covered ? "true" : "false");
    if (with_runtime) row += "," + detail::fixed6(t.runtime_ms);
    return row + "\n";
}

/** Sweep summary CSV; mean_acc is the mean concept accuracy and bound_line is
 *  the asymptotic accuracy bound 1 - d/L. */
inline std::string sweep_csv(const std::string& task, const SweepResult& sweep_result) {
    std::string out = "task,N,mean_acc,stderr,bound_line\n";
    for (const SweepRow& row : sweep_result.rows) {
        out += task + "," + std::to_string(row.n_samples) + "," +
               detail::fixed6(row.mean_concept_acc) + "," +
               detail::fixed6(row.stderr_concept_acc) + "," +
               detail::fixed6(sweep_result.bound_line) + "\n";
    }
    return out;
}

} // namespace nesy
