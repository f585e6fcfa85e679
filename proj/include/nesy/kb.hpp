#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <utility>

#include "nesy/core.hpp"

namespace nesy {

/** A task's reasoning side: a deterministic forward operator sigma mapping
 *  length-m concept sequences over Z = {0..L-1} to labels. */
class KnowledgeBase {
public:
    KnowledgeBase(std::string name, int arity, int concept_count,
                  std::function<Label(const ConceptSeq&)> forward, std::string signature)
        : name_(std::move(name)),
          arity_(arity),
          concept_count_(concept_count),
          forward_(std::move(forward)),
          signature_(std::move(signature)) {
        if (arity_ < 1) throw ValidationError("knowledge base arity must be >= 1");
        if (concept_count_ < 1) throw ValidationError("concept count L must be >= 1");
    }

    const std::string& name() const { return name_; }
    /** Sequence length m. */
    int arity() const { return arity_; }
    /** Concept space size L. */
    int concept_count() const { return concept_count_; }
    /** Canonical identity string (builtin + parameters, or table hash). */
    const std::string& signature() const { return signature_; }

    /** Applies sigma after validating arity and concept domain. */
    Label forward(const ConceptSeq& z) const {
        if (static_cast<int>(z.size()) != arity_) {
            throw ValidationError("arity error: sequence length " + std::to_string(z.size()) +
                                  " does not match task arity " + std::to_string(arity_));
        }
        for (Concept c : z) {
            if (c < 0 || c >= concept_count_) {
                throw ValidationError("domain error: concept id " + std::to_string(c) +
                                      " outside [0, " + std::to_string(concept_count_) + ")");
            }
        }
        return forward_(z);
    }

    /** Unvalidated sigma for hot loops whose inputs are solver-guaranteed. */
    Label forward_unchecked(const ConceptSeq& z) const { return forward_(z); }

private:
    std::string name_;
    int arity_;
    int concept_count_;
    std::function<Label(const ConceptSeq&)> forward_;
    std::string signature_;
};

namespace detail {

// Digit blocks are read most-significant first, in base 10. Builtins therefore
// require L <= 10 so the encoding stays injective.
inline std::int64_t digits_to_number(const ConceptSeq& z, std::size_t begin, std::size_t end) {
    std::int64_t value = 0;
    for (std::size_t i = begin; i < end; ++i) value = value * 10 + z[i];
    return value;
}

inline void check_builtin_params(const std::string& builtin, int n_digits, int L) {
    if (n_digits < 1) throw ValidationError(builtin + ": n_digits must be >= 1");
    if (L < 2 || L > 10) {
        throw ValidationError(builtin + ": L must be in [2, 10], got " + std::to_string(L));
    }
}

} // namespace detail

/** y = number(z[0..n)) + number(z[n..2n)). */
inline KnowledgeBase make_addition(int n_digits = 1, int L = 10) {
    detail::check_builtin_params("add", n_digits, L);
    const int m = 2 * n_digits;
    std::ostringstream sig;
    sig << "add(n_digits=" << n_digits << ",L=" << L << ")";
    return KnowledgeBase(
        "add", m, L,
        [n_digits](const ConceptSeq& z) {
            const auto half = static_cast<std::size_t>(n_digits);
            return detail::digits_to_number(z, 0, half) +
                   detail::digits_to_number(z, half, 2 * half);
        },
        sig.str());
}

/** y = number(z[0..n)) * number(z[n..2n)). */
inline KnowledgeBase make_multiplication(int n_digits = 1, int L = 10) {
    detail::check_builtin_params("mul", n_digits, L);
    const int m = 2 * n_digits;
    std::ostringstream sig;
    sig << "mul(n_digits=" << n_digits << ",L=" << L << ")";
    return KnowledgeBase(
        "mul", m, L,
        [n_digits](const ConceptSeq& z) {
            const auto half = static_cast<std::size_t>(n_digits);
            return detail::digits_to_number(z, 0, half) *
                   detail::digits_to_number(z, half, 2 * half);
        },
        sig.str());
}

/** y = z1 xor z2 over L = 2, m = 2. */
inline KnowledgeBase make_xor() {
    return KnowledgeBase(
        "xor", 2, 2, [](const ConceptSeq& z) { return static_cast<Label>(z[0] ^ z[1]); },
        "xor()");
}

/** y = (number1 + number2) mod k. k in [2, 10] per the task family; larger k is
 *  accepted but callers may warn (see load_kb). */
inline KnowledgeBase make_modadd(int k, int n_digits = 1, int L = 10) {
    detail::check_builtin_params("modadd", n_digits, L);
    if (k < 2) throw ValidationError("modadd: k must be >= 2, got " + std::to_string(k));
    const int m = 2 * n_digits;
    std::ostringstream sig;
    sig << "modadd(k=" << k << ",n_digits=" << n_digits << ",L=" << L << ")";
    return KnowledgeBase(
        "modadd", m, L,
        [n_digits, k](const ConceptSeq& z) {
            const auto half = static_cast<std::size_t>(n_digits);
            const std::int64_t sum = detail::digits_to_number(z, 0, half) +
                                     detail::digits_to_number(z, half, 2 * half);
            return sum % k;
        },
        sig.str());
}

/** Explicit finite sigma given as a total truth table over Z^m.
 *  Every tuple must appear exactly once. */
inline KnowledgeBase make_table_kb(const std::string& name, int L, int m,
                                   const std::vector<std::pair<ConceptSeq, Label>>& entries) {
    if (L < 1) throw ValidationError("table: L must be >= 1");
    if (m < 1) throw ValidationError("table: m must be >= 1");
    std::uint64_t total = 1;
    for (int i = 0; i < m; ++i) {
        total *= static_cast<std::uint64_t>(L);
        if (total > kDefaultPoolCap) {
            throw BudgetError("table: L^m exceeds the enumeration cap of " +
                              std::to_string(kDefaultPoolCap) + " elements");
        }
    }
    std::vector<Label> table(total, 0);
    std::vector<bool> seen(total, false);
    for (const auto& [tuple, label] : entries) {
        if (static_cast<int>(tuple.size()) != m) {
            throw ValidationError("table: entry arity " + std::to_string(tuple.size()) +
                                  " does not match m = " + std::to_string(m));
        }
        std::uint64_t idx = 0;
        for (Concept c : tuple) {
            if (c < 0 || c >= L) {
                throw ValidationError("table: concept id " + std::to_string(c) +
                                      " outside [0, " + std::to_string(L) + ")");
            }
            idx = idx * static_cast<std::uint64_t>(L) + static_cast<std::uint64_t>(c);
        }
        if (seen[idx]) throw ValidationError("table: duplicate entry for a tuple");
        seen[idx] = true;
        table[idx] = label;
    }
    const auto missing = std::count(seen.begin(), seen.end(), false);
    if (missing != 0) {
        throw ValidationError("table: not total, " + std::to_string(missing) + " of " +
                              std::to_string(total) + " tuples missing");
    }
    std::uint64_t content_hash = fnv1a64(table.data(), table.size() * sizeof(Label));
    std::ostringstream sig;
    sig << "table(name=" << name << ",L=" << L << ",m=" << m << ",hash=" << std::hex
        << content_hash << ")";
    return KnowledgeBase(
        name, m, L,
        [L, table = std::move(table)](const ConceptSeq& z) {
            std::uint64_t idx = 0;
            for (Concept c : z) idx = idx * static_cast<std::uint64_t>(L) + static_cast<std::uint64_t>(c);
            return table[idx];
        },
        sig.str());
}

/** The candidate pool B and its partition into abduction sets A(y).
 *  The pool is lexicographically sorted, as is every A(y). */
class AbductionIndex {
public:
    AbductionIndex(const KnowledgeBase& kb, std::vector<ConceptSeq> pool)
        : arity_(kb.arity()), concept_count_(kb.concept_count()) {
        std::sort(pool.begin(), pool.end());
        pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
        pool_ = std::move(pool);
        labels_.reserve(pool_.size());
        for (const auto& z : pool_) {
            const Label y = kb.forward(z);
            labels_.push_back(y);
            by_label_[y].push_back(z);
        }
    }

    std::size_t pool_size() const { return pool_.size(); }
    const std::vector<ConceptSeq>& pool() const { return pool_; }
    /** Label of pool()[i]; aligned with the pool order. */
    Label label_of(std::size_t i) const { return labels_[i]; }

    /** A(y); throws AbductionError when y has no candidates. */
    const std::vector<ConceptSeq>& candidates(Label y) const {
        auto it = by_label_.find(y);
        if (it == by_label_.end() || it->second.empty()) {
            throw AbductionError("abduction failure: no candidate sequence yields label " +
                                 std::to_string(y));
        }
        return it->second;
    }

    bool has_label(Label y) const { return by_label_.count(y) != 0; }

    /** The derived label space Y, ascending. */
    std::vector<Label> label_space() const {
        std::vector<Label> ys;
        ys.reserve(by_label_.size());
        for (const auto& [y, _] : by_label_) ys.push_back(y);
        return ys;
    }

    std::optional<std::size_t> find(const ConceptSeq& z) const {
        auto it = std::lower_bound(pool_.begin(), pool_.end(), z);
        if (it == pool_.end() || *it != z) return std::nullopt;
        return static_cast<std::size_t>(it - pool_.begin());
    }

    int arity() const { return arity_; }
    int concept_count() const { return concept_count_; }

private:
    int arity_;
    int concept_count_;
    std::vector<ConceptSeq> pool_;
    std::vector<Label> labels_;
    std::map<Label, std::vector<ConceptSeq>> by_label_;
};

/** Enumerates B (the full grid Z^m by default, or a caller-restricted subset)
 *  and partitions it by label. Grids larger than `pool_cap` raise BudgetError. */
inline AbductionIndex build_abduction_index(
    const KnowledgeBase& kb, std::uint64_t pool_cap = kDefaultPoolCap,
    const std::optional<std::vector<ConceptSeq>>& restriction = std::nullopt) {
    if (restriction) {
        if (restriction->empty()) throw ValidationError("pool restriction must be non-empty");
        if (restriction->size() > pool_cap) {
            throw BudgetError("restricted pool of " + std::to_string(restriction->size()) +
                              " sequences exceeds the enumeration cap of " +
                              std::to_string(pool_cap) + " elements");
        }
        return AbductionIndex(kb, *restriction);
    }
    const int L = kb.concept_count();
    const int m = kb.arity();
    std::uint64_t total = 1;
    for (int i = 0; i < m; ++i) {
        total *= static_cast<std::uint64_t>(L);
        if (total > pool_cap) {
            throw BudgetError("pool L^m = " + std::to_string(L) + "^" + std::to_string(m) +
                              " exceeds the enumeration cap of " + std::to_string(pool_cap) +
                              " elements");
        }
    }
    std::vector<ConceptSeq> grid;
    grid.reserve(total);
    ConceptSeq z(static_cast<std::size_t>(m), 0);
    for (;;) {
        grid.push_back(z);
        int pos = m - 1;
        while (pos >= 0 && ++z[pos] == L) z[pos--] = 0;
        if (pos < 0) break;
    }
    return AbductionIndex(kb, std::move(grid));
}

} // namespace nesy
