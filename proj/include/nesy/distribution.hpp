#pragma once

#include <cmath>
#include <map>

#include "nesy/kb.hpp"

namespace nesy {

/** Sampling distribution P(Z) over the candidate pool B. Construction enforces
 *  the non-vanishing-probability assumption: every sequence in B gets strictly
 *  positive weight, and kappa is the smallest of them.
 *
 *  The referenced AbductionIndex must outlive the distribution. */
class ConceptDistribution {
public:
    static ConceptDistribution uniform(const AbductionIndex& index) {
        const std::size_t n = index.pool_size();
        std::vector<double> w(n, 1.0 / static_cast<double>(n));
        return ConceptDistribution(index, std::move(w));
    }

    /** Explicit weights, one per pool element; missing or non-positive entries
     *  violate the assumption and are rejected. */
    static ConceptDistribution from_weights(
        const AbductionIndex& index, const std::vector<std::pair<ConceptSeq, double>>& weights) {
        std::vector<double> w(index.pool_size(), 0.0);
        std::vector<bool> seen(index.pool_size(), false);
        for (const auto& [z, p] : weights) {
            const auto idx = index.find(z);
            if (!idx) throw ValidationError("distribution assigns weight to a sequence outside B");
            if (seen[*idx]) throw ValidationError("distribution lists a sequence twice");
            seen[*idx] = true;
            w[*idx] = p;
        }
        return ConceptDistribution(index, std::move(w));
    }

    const AbductionIndex& index() const { return *index_; }
    std::size_t size() const { return weights_.size(); }
    double weight(std::size_t pool_index) const { return weights_[pool_index]; }
    double kappa() const { return kappa_; }

    /** Draws a pool index by inverse CDF over a 53-bit uniform. */
    std::size_t sample(Rng& rng) const {
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
        if (i >= weights_.size()) i = weights_.size() - 1;
        return i;
    }

private:
    ConceptDistribution(const AbductionIndex& index, std::vector<double> weights)
        : index_(&index), weights_(std::move(weights)) {
        if (weights_.size() != index.pool_size() || weights_.empty()) {
            throw ValidationError("distribution must weight exactly the pool B");
        }
        double sum = 0.0;
        kappa_ = 1.0;
        for (double p : weights_) {
            if (!std::isfinite(p) || p <= 0.0) {
                throw ValidationError(
                    "non-vanishing probability violated: every sequence in B needs a strictly "
                    "positive weight");
            }
            kappa_ = std::min(kappa_, p);
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ValidationError("distribution weights sum to " + std::to_string(sum) +
                                  ", expected 1 within 1e-9");
        }
        cumulative_.resize(weights_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            acc += weights_[i];
            cumulative_[i] = acc;
        }
        cumulative_.back() = 1.0;
    }

    const AbductionIndex* index_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    double kappa_ = 0.0;
};

} // namespace nesy
