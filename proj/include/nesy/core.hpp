#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nesy {

inline constexpr const char* kVersion = "0.1.0";

/** A concept is one of the L discrete symbols a task's model must recognize. */
using Concept = int;
/** Ordered concept sequence of length m (the task arity). */
using ConceptSeq = std::vector<Concept>;
/** A cluster-index sequence; clusters are indexed by their ground-truth concept,
 *  so cluster i plays the role of "all inputs whose true concept is i". */
using ClusterSeq = std::vector<int>;
/** Final labels are plain integers; the label space Y is derived, never declared. */
using Label = std::int64_t;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/** Malformed input: arity/domain violations, bad tables, bad matrices, bad weights. */
struct ValidationError : Error {
    using Error::Error;
};

/** An enumeration would exceed a configured cap; the message names the cap. */
struct BudgetError : Error {
    using Error::Error;
};

/** Abduction failed: the candidate set for the requested label is empty. */
struct AbductionError : Error {
    using Error::Error;
};

/** A result that requires at least one solution was asked of an empty space. */
struct NoSolutionError : Error {
    using Error::Error;
};

/** A verdict was requested from a capped (incomplete) enumeration. */
struct IncompleteEnumerationError : Error {
    using Error::Error;
};

inline constexpr std::uint64_t kDefaultPoolCap = 1'000'000;
inline constexpr std::uint64_t kDefaultSolutionCap = 1'000'000;

// splitmix64 step; also the basis for deriving per-trial seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/** Seed for independent stream `index` under `base`: splitmix64(base + golden*(index+1)).
 *  Keeps parallel trials order-independent and reproducible. */
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t s = base + 0x9E3779B97F4A7C15ull * (index + 1);
    return splitmix64(s);
}

/** mt19937_64 plus portable helpers. The raw engine is fully specified by the
 *  standard; std::-distributions are not, so sampling goes through these. */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /** Uniform double in [0, 1) with 53 random bits. */
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /** Uniform integer in [0, n), unbiased via rejection. */
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        // Accept x < 2^64 - (2^64 mod n) so every residue is equally likely.
        const std::uint64_t rem = (UINT64_MAX % n + 1) % n;
        for (;;) {
            const std::uint64_t x = eng_();
            if (rem == 0 || x <= UINT64_MAX - rem) return x % n;
        }
    }

private:
    std::mt19937_64 eng_;
};

/** FNV-1a over raw bytes; used for task-file hashes in run manifests. */
inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(s.data(), s.size());
}

} // namespace nesy
