#pragma once

#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>

#include "nesy/distribution.hpp"
#include "nesy/kb.hpp"

namespace nesy {

inline constexpr double kInfiniteRisk = std::numeric_limits<double>::infinity();

/** Per-cluster categorical distribution over concepts: row c is the predicted
 *  concept distribution for cluster c. Deterministic predictors are one-hot;
 *  argmax ties resolve to the lowest concept id. */
class Predictor {
public:
    explicit Predictor(std::vector<std::vector<double>> table) : table_(std::move(table)) {
        const std::size_t L = table_.size();
        if (L == 0) throw ValidationError("predictor table is empty");
        argmax_.reserve(L);
        for (const auto& row : table_) {
            if (row.size() != L) {
                throw ValidationError("predictor table must be square (clusters x concepts)");
            }
            double sum = 0.0;
            for (double p : row) {
                if (!std::isfinite(p) || p < 0.0) {
                    throw ValidationError("predictor entries must be finite and >= 0");
                }
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                throw ValidationError("predictor row sums to " + std::to_string(sum) +
                                      ", expected 1 within 1e-9");
            }
            int best = 0;
            for (std::size_t z = 1; z < row.size(); ++z) {
                if (row[z] > row[static_cast<std::size_t>(best)]) best = static_cast<int>(z);
            }
            argmax_.push_back(best);
        }
    }

    /** Deterministic predictor assigning cluster c the concept mapping[c]. */
    static Predictor one_hot(const std::vector<Concept>& mapping) {
        return smoothed_one_hot(mapping, 1.0);
    }

    /** One-hot rows with `confidence` on the mapped concept and the remaining
     *  mass spread evenly; keeps surrogate risks finite while preserving argmax. */
    static Predictor smoothed_one_hot(const std::vector<Concept>& mapping, double confidence) {
        const std::size_t L = mapping.size();
        if (L == 0) throw ValidationError("mapping is empty");
        if (confidence <= 0.0 || confidence > 1.0) {
            throw ValidationError("confidence must be in (0, 1]");
        }
        const double rest = (L > 1) ? (1.0 - confidence) / static_cast<double>(L - 1) : 0.0;
        std::vector<std::vector<double>> t(L, std::vector<double>(L, rest));
        for (std::size_t c = 0; c < L; ++c) {
            const Concept z = mapping[c];
            if (z < 0 || z >= static_cast<Concept>(L)) {
                throw ValidationError("mapping target outside the concept space");
            }
            t[c][static_cast<std::size_t>(z)] = (L > 1) ? confidence : 1.0;
        }
        return Predictor(std::move(t));
    }

    static Predictor uniform_rows(int L) {
        if (L < 1) throw ValidationError("L must be >= 1");
        std::vector<std::vector<double>> t(
            static_cast<std::size_t>(L),
            std::vector<double>(static_cast<std::size_t>(L), 1.0 / static_cast<double>(L)));
        return Predictor(std::move(t));
    }

    /** Reads a whitespace-separated numeric matrix; rows are clusters. */
    static Predictor parse(std::istream& in) {
        std::vector<std::vector<double>> rows;
        std::string line;
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            std::vector<double> row;
            double v = 0.0;
            while (ls >> v) row.push_back(v);
            if (!ls.eof()) throw ValidationError("predictor file: non-numeric token");
            if (!row.empty()) rows.push_back(std::move(row));
        }
        if (rows.empty()) throw ValidationError("predictor file: no rows");
        return Predictor(std::move(rows));
    }

    int size() const { return static_cast<int>(table_.size()); }
    double prob(int cluster, Concept z) const {
        return table_[static_cast<std::size_t>(cluster)][static_cast<std::size_t>(z)];
    }
    Concept argmax(int cluster) const { return argmax_[static_cast<std::size_t>(cluster)]; }
    const std::vector<double>& row(int cluster) const {
        return table_[static_cast<std::size_t>(cluster)];
    }

    /** The argmax concept for each position of a cluster pattern. */
    ConceptSeq map_pattern(const ClusterSeq& pattern) const {
        ConceptSeq out(pattern.size());
        for (std::size_t i = 0; i < pattern.size(); ++i) out[i] = argmax(pattern[i]);
        return out;
    }

private:
    std::vector<std::vector<double>> table_;
    std::vector<Concept> argmax_;
};

namespace detail {

inline void check_pattern(const Predictor& pred, const ClusterSeq& pattern) {
    for (int c : pattern) {
        if (c < 0 || c >= pred.size()) {
            throw ValidationError("cluster index " + std::to_string(c) + " outside [0, " +
                                  std::to_string(pred.size()) + ")");
        }
    }
}

inline double candidate_product(const Predictor& pred, const ClusterSeq& pattern,
                                const ConceptSeq& candidate) {
    double p = 1.0;
    for (std::size_t i = 0; i < pattern.size(); ++i) p *= pred.prob(pattern[i], candidate[i]);
    return p;
}

} // namespace detail

/** Fraction of clusters whose argmax concept differs from the cluster's own
 *  index (the ground truth under the identity relabeling). An optional cluster
 *  marginal turns the uniform average into a weighted one. */
inline double concept_risk(const Predictor& pred, std::span<const double> marginal = {}) {
    const int L = pred.size();
    if (!marginal.empty() && static_cast<int>(marginal.size()) != L) {
        throw ValidationError("cluster marginal size does not match L");
    }
    double risk = 0.0;
    for (int c = 0; c < L; ++c) {
        if (pred.argmax(c) != c) {
            risk += marginal.empty() ? 1.0 / static_cast<double>(L)
                                     : marginal[static_cast<std::size_t>(c)];
        }
    }
    return risk;
}

/** Probability mass of sequences whose predicted concepts yield the wrong label. */
inline double nesy_risk(const Predictor& pred, const KnowledgeBase& kb,
                        const ConceptDistribution& dist) {
    const AbductionIndex& index = dist.index();
    double risk = 0.0;
    for (std::size_t i = 0; i < index.pool_size(); ++i) {
        const ConceptSeq& z = index.pool()[i];
        detail::check_pattern(pred, z);
        const ConceptSeq predicted = pred.map_pattern(z);
        if (kb.forward(predicted) != index.label_of(i)) risk += dist.weight(i);
    }
    return risk;
}

/** Weighted model count: total predictor mass on `candidates` given the
 *  clusters in `pattern`. Empty candidate sets count 0. */
inline double wmc(const Predictor& pred, std::span<const ConceptSeq> candidates,
                  const ClusterSeq& pattern) {
    detail::check_pattern(pred, pattern);
    double total = 0.0;
    for (const ConceptSeq& z : candidates) {
        if (z.size() != pattern.size()) {
            throw ValidationError("candidate arity does not match the pattern");
        }
        total += detail::candidate_product(pred, pattern, z);
    }
    return total;
}

/** -E log WMC over the full abduction set. Returns +inf when any positive-mass
 *  sequence has zero counted weight; the sentinel is deliberate, not an error. */
inline double pnl_risk(const Predictor& pred, const KnowledgeBase& /*kb*/,
                       const ConceptDistribution& dist) {
    const AbductionIndex& index = dist.index();
    double risk = 0.0;
    for (std::size_t i = 0; i < index.pool_size(); ++i) {
        const ConceptSeq& z = index.pool()[i];
        const double w = wmc(pred, index.candidates(index.label_of(i)), z);
        if (w <= 0.0) return kInfiniteRisk;
        risk -= dist.weight(i) * std::log(w);
    }
    return risk;
}

/** Most plausible candidate for label y: minimal Hamming distance to the
 *  predictor's argmax sequence, ties to the lexicographically smallest. */
inline ConceptSeq abduce(const Predictor& pred, const AbductionIndex& index,
                         const ClusterSeq& pattern, Label y) {
    detail::check_pattern(pred, pattern);
    if (static_cast<int>(pattern.size()) != index.arity()) {
        throw ValidationError("pattern length " + std::to_string(pattern.size()) +
                              " does not match the task arity " + std::to_string(index.arity()));
    }
    const std::vector<ConceptSeq>& candidates = index.candidates(y);
    const ConceptSeq predicted = pred.map_pattern(pattern);
    const ConceptSeq* best = nullptr;
    std::size_t best_distance = 0;
    for (const ConceptSeq& z : candidates) {
        std::size_t distance = 0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (z[i] != predicted[i]) ++distance;
        }
        if (!best || distance < best_distance) { // candidates are lex-sorted
            best = &z;
            best_distance = distance;
        }
    }
    return *best;
}

/** -E log of the abduced candidate's probability (Hamming-scored abduction). */
inline double abl_risk(const Predictor& pred, const KnowledgeBase& /*kb*/,
                       const ConceptDistribution& dist) {
    const AbductionIndex& index = dist.index();
    double risk = 0.0;
    for (std::size_t i = 0; i < index.pool_size(); ++i) {
        const ConceptSeq& z = index.pool()[i];
        const ConceptSeq chosen = abduce(pred, index, z, index.label_of(i));
        const double p = detail::candidate_product(pred, z, chosen);
        if (p <= 0.0) return kInfiniteRisk;
        risk -= dist.weight(i) * std::log(p);
    }
    return risk;
}

/** Interpolates between single-candidate abduction and full model counting by
 *  summing the n most likely candidates (product probability, ties broken
 *  lexicographically). n >= |A(y)| recovers pnl_risk. */
inline double a3_risk(const Predictor& pred, const KnowledgeBase& /*kb*/,
                      const ConceptDistribution& dist, std::size_t n) {
    if (n < 1) throw ValidationError("a3 candidate count must be >= 1");
    const AbductionIndex& index = dist.index();
    double risk = 0.0;
    std::vector<std::size_t> order;
    std::vector<double> products;
    for (std::size_t i = 0; i < index.pool_size(); ++i) {
        const ConceptSeq& z = index.pool()[i];
        detail::check_pattern(pred, z);
        const std::vector<ConceptSeq>& candidates = index.candidates(index.label_of(i));
        products.resize(candidates.size());
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            products[j] = detail::candidate_product(pred, z, candidates[j]);
        }
        order.resize(candidates.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        // stable sort keeps the lexicographic candidate order within ties
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return products[a] > products[b]; });
        const std::size_t take = std::min(n, candidates.size());
        double mass = 0.0;
        for (std::size_t j = 0; j < take; ++j) mass += products[order[j]];
        if (mass <= 0.0) return kInfiniteRisk;
        risk -= dist.weight(i) * std::log(mass);
    }
    return risk;
}

/** All L^L deterministic cluster-to-concept tables, smoothed; enumeration order
 *  treats the mapping as a base-L number with cluster 0 most significant. */
inline std::vector<Predictor> enumerate_onehot_predictors(int L, double confidence = 1.0 - 1e-3) {
    if (L < 1) throw ValidationError("L must be >= 1");
    double count_d = std::pow(static_cast<double>(L), L);
    if (count_d > 1e6) {
        throw BudgetError("predictor enumeration of L^L = " + std::to_string(count_d) +
                          " tables exceeds the cap of 1000000");
    }
    const auto count = static_cast<std::uint64_t>(count_d + 0.5);
    std::vector<Predictor> preds;
    preds.reserve(count);
    std::vector<Concept> mapping(static_cast<std::size_t>(L), 0);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t x = i;
        for (int c = L - 1; c >= 0; --c) {
            mapping[static_cast<std::size_t>(c)] = static_cast<Concept>(x % L);
            x /= static_cast<std::uint64_t>(L);
        }
        preds.push_back(Predictor::smoothed_one_hot(mapping, confidence));
    }
    return preds;
}

struct MinimizerInclusionReport {
    struct Violation {
        std::string risk;
        std::size_t predictor = 0;
        double surrogate_value = 0.0;
        double nesy_value = 0.0;
    };

    bool holds = true;
    std::vector<std::size_t> nesy_argmin;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> surrogate_argmin;
    std::vector<Violation> violations;
};

/** Checks argmin(R_s) is contained in argmin(R_NeSy) over a finite predictor
 *  family, for R_s in {PNL, ABL, A3(n) for each n}. Minima compare with a 1e-9
 *  absolute tolerance. */
inline MinimizerInclusionReport check_minimizer_inclusion(
    const KnowledgeBase& kb, const ConceptDistribution& dist,
    const std::vector<Predictor>& predictors, const std::vector<std::size_t>& a3_sizes = {1, 16}) {
    if (predictors.empty()) throw ValidationError("predictor enumeration is empty");
    constexpr double tol = 1e-9;

    std::vector<double> nesy(predictors.size());
    for (std::size_t i = 0; i < predictors.size(); ++i) {
        nesy[i] = nesy_risk(predictors[i], kb, dist);
    }
    const double nesy_min = *std::min_element(nesy.begin(), nesy.end());

    MinimizerInclusionReport report;
    for (std::size_t i = 0; i < predictors.size(); ++i) {
        if (nesy[i] <= nesy_min + tol) report.nesy_argmin.push_back(i);
    }

    const auto run_surrogate = [&](const std::string& name, auto&& eval) {
        std::vector<double> values(predictors.size());
        for (std::size_t i = 0; i < predictors.size(); ++i) values[i] = eval(predictors[i]);
        const double min_value = *std::min_element(values.begin(), values.end());
        std::vector<std::size_t> argmin;
        for (std::size_t i = 0; i < predictors.size(); ++i) {
            if (values[i] <= min_value + tol) {
                argmin.push_back(i);
                if (nesy[i] > nesy_min + tol) {
                    report.holds = false;
                    report.violations.push_back({name, i, values[i], nesy[i]});
                }
            }
        }
        report.surrogate_argmin.emplace_back(name, std::move(argmin));
    };

    run_surrogate("pnl", [&](const Predictor& p) { return pnl_risk(p, kb, dist); });
    run_surrogate("abl", [&](const Predictor& p) { return abl_risk(p, kb, dist); });
    for (std::size_t n : a3_sizes) {
        run_surrogate("a3(" + std::to_string(n) + ")",
                      [&](const Predictor& p) { return a3_risk(p, kb, dist, n); });
    }
    return report;
}

} // namespace nesy
