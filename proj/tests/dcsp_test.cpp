#include <doctest.h>

#include "nesy/dcsp.hpp"
#include "oracle.hpp"

using namespace nesy;

namespace {

SolutionSpace solve_task(const KnowledgeBase& kb, bool injective = true,
                         std::uint64_t cap = kDefaultSolutionCap) {
    const AbductionIndex index = build_abduction_index(kb);
    return solve_enumerate(build_task_level(kb, index, injective), cap);
}

Solution identity(int L) {
    Solution s(static_cast<std::size_t>(L));
    std::iota(s.begin(), s.end(), 0);
    return s;
}

} // namespace

TEST_CASE("xor task-level space is {identity, swap} with d = L") {
    const SolutionSpace space = solve_task(make_xor());
    CHECK(space.complete);
    CHECK(space.solutions == std::vector<Solution>{{0, 1}, {1, 0}});
    CHECK(space.d == 2);
    CHECK(space.common.empty());
}

TEST_CASE("addition task-level DCSP has the identity as unique solution") {
    const SolutionSpace space = solve_task(make_addition());
    REQUIRE(space.solutions.size() == 1);
    CHECK(space.solutions.front() == identity(10));
    CHECK(space.d == 0);
    CHECK(space.common.size() == 10);
}

TEST_CASE("addition uniqueness confirmed by brute force over all 10! injective mappings") {
    const KnowledgeBase kb = make_addition();
    const AbductionIndex index = build_abduction_index(kb);
    const DcspInstance inst = build_task_level(kb, index);
    const auto all = oracle::enumerate_solutions(inst);
    REQUIRE(all.size() == 1);
    CHECK(all.front() == identity(10));
}

TEST_CASE("modadd(9) admits exactly the identity and the 0<->9 swap") {
    const SolutionSpace space = solve_task(make_modadd(9));
    Solution swapped = identity(10);
    std::swap(swapped[0], swapped[9]);
    CHECK(space.solutions == std::vector<Solution>{identity(10), swapped});
    CHECK(space.d == 2);
    const LearnabilityReport report = verdict(space);
    CHECK_FALSE(report.learnable);
    CHECK(report.error_bound == doctest::Approx(0.2));
}

TEST_CASE("modadd(10) has two solutions yet full disagreement") {
    const SolutionSpace space = solve_task(make_modadd(10));
    CHECK(space.solutions.size() == 2);
    CHECK(space.d == 10);
    CHECK(verdict(space).error_bound == doctest::Approx(1.0));
}

TEST_CASE("modadd single-task solution structure: shifts plus residue-class permutations") {
    // Counts follow from v_a = a + t (mod k) with 2t = 0 (mod k) and class-size
    // matching; spot-checked against brute force below for the k = 6 surprise.
    struct Expected {
        int k;
        std::size_t num_solutions;
        int d;
    };
    const std::vector<Expected> table{
        {2, 28800, 10}, {3, 864, 10}, {4, 144, 10}, {5, 32, 10}, {6, 16, 8},
        {7, 8, 6},      {8, 4, 4},    {9, 2, 2},    {10, 2, 10},
    };
    for (const auto& [k, num_solutions, d] : table) {
        CAPTURE(k);
        const SolutionSpace space = solve_task(make_modadd(k));
        CHECK(space.complete);
        CHECK(space.solutions.size() == num_solutions);
        CHECK(space.d == d);
    }
}

TEST_CASE("modadd(6) matches brute force exactly, including the partially fixed union") {
    const KnowledgeBase kb = make_modadd(6);
    const AbductionIndex index = build_abduction_index(kb);
    const DcspInstance inst = build_task_level(kb, index);
    const SolutionSpace space = solve_enumerate(inst);
    CHECK(space.solutions == oracle::enumerate_solutions(inst));
    // residues mod 6 leave {4} and {5} as singleton classes
    CHECK(space.common == std::vector<std::pair<int, int>>{{4, 4}, {5, 5}});
}

TEST_CASE("solver equals brute force for every built-in family at L <= 6") {
    std::vector<KnowledgeBase> tasks;
    for (int L = 2; L <= 6; ++L) {
        tasks.push_back(make_addition(1, L));
        tasks.push_back(make_multiplication(1, L));
        for (int k = 2; k <= L; ++k) tasks.push_back(make_modadd(k, 1, L));
    }
    tasks.push_back(make_xor());
    for (const KnowledgeBase& kb : tasks) {
        CAPTURE(kb.signature());
        const AbductionIndex index = build_abduction_index(kb);
        for (bool injective : {true, false}) {
            DcspInstance inst = build_task_level(kb, index, injective);
            const SolutionSpace space = solve_enumerate(inst);
            CHECK(space.complete);
            CHECK(space.solutions == oracle::enumerate_solutions(inst));
        }
    }
}

TEST_CASE("higher-arity constraints match brute force too") {
    // patterns with 3+ distinct variables go through the lazy evaluation path
    SUBCASE("two-digit addition over four concepts") {
        const KnowledgeBase kb = make_addition(2, 4); // m = 4, pool = 256
        const AbductionIndex index = build_abduction_index(kb);
        for (bool injective : {true, false}) {
            const DcspInstance inst = build_task_level(kb, index, injective);
            const SolutionSpace space = solve_enumerate(inst);
            CHECK(space.solutions == oracle::enumerate_solutions(inst));
            if (injective) {
                CHECK(space.solutions == std::vector<Solution>{{0, 1, 2, 3}});
            }
        }
    }
    SUBCASE("arity-3 table task") {
        // y = (z1 + z2 + z3) mod 2 over L = 3
        std::vector<std::pair<ConceptSeq, Label>> entries;
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                for (int c = 0; c < 3; ++c) entries.push_back({{a, b, c}, (a + b + c) % 2});
            }
        }
        const KnowledgeBase kb = make_table_kb("sum3mod2", 3, 3, entries);
        const AbductionIndex index = build_abduction_index(kb);
        for (bool injective : {true, false}) {
            const DcspInstance inst = build_task_level(kb, index, injective);
            CHECK(solve_enumerate(inst).solutions == oracle::enumerate_solutions(inst));
        }
    }
    SUBCASE("partial two-digit dataset leaves the generic filter real work") {
        const KnowledgeBase kb = make_addition(2, 4);
        const std::vector<std::pair<ClusterSeq, Label>> data{
            {{0, 1, 2, 3}, 1 + 23},  // digits (0,1) and (2,3), most significant first
            {{1, 0, 1, 2}, 10 + 12},
            {{3, 2, 1, 0}, 32 + 10},
        };
        const DcspInstance inst = build_from_dataset(kb, data);
        const SolutionSpace space = solve_enumerate(inst);
        CHECK(space.solutions == oracle::enumerate_solutions(inst));
        CHECK_FALSE(space.solutions.empty());
    }
}

TEST_CASE("every returned solution satisfies every constraint post hoc") {
    const KnowledgeBase kb = make_modadd(3);
    const AbductionIndex index = build_abduction_index(kb);
    const DcspInstance inst = build_task_level(kb, index);
    const SolutionSpace space = solve_enumerate(inst);
    REQUIRE(space.solutions.size() == 864);
    for (const Solution& s : space.solutions) {
        REQUIRE(oracle::satisfies_all(inst, s));
    }
}

TEST_CASE("randomized tables and partial datasets agree with brute force") {
    Rng rng(31337);
    for (int round = 0; round < 60; ++round) {
        const int L = 3 + static_cast<int>(rng.below(2));      // 3 or 4
        const int m = 2 + static_cast<int>(rng.below(2));      // 2 or 3
        const int label_count = 2 + static_cast<int>(rng.below(3));
        std::vector<std::pair<ConceptSeq, Label>> entries;
        ConceptSeq z(static_cast<std::size_t>(m), 0);
        for (;;) {
            entries.push_back({z, static_cast<Label>(rng.below(label_count))});
            int pos = m - 1;
            while (pos >= 0 && ++z[static_cast<std::size_t>(pos)] == L) {
                z[static_cast<std::size_t>(pos--)] = 0;
            }
            if (pos < 0) break;
        }
        const KnowledgeBase kb = make_table_kb("fuzz", L, m, entries);
        const AbductionIndex index = build_abduction_index(kb);

        // random subset of the task-level constraints, sometimes with noise
        // labels that may make the instance unsatisfiable
        std::vector<std::pair<ClusterSeq, Label>> data;
        for (std::size_t i = 0; i < index.pool_size(); ++i) {
            if (rng.below(3) == 0) {
                const bool noisy = rng.below(8) == 0;
                const Label y = noisy ? static_cast<Label>(rng.below(label_count))
                                      : index.label_of(i);
                data.emplace_back(index.pool()[i], y);
            }
        }
        if (data.empty()) data.emplace_back(index.pool()[0], index.label_of(0));

        const bool injective = rng.below(2) == 0;
        const DcspInstance inst = build_from_dataset(kb, data, injective);
        const SolutionSpace space = solve_enumerate(inst);
        CAPTURE(round);
        REQUIRE(space.complete);
        CHECK(space.solutions == oracle::enumerate_solutions(inst));
    }
}

TEST_CASE("duplicate constraints are deduplicated") {
    const KnowledgeBase kb = make_addition();
    const std::vector<std::pair<ClusterSeq, Label>> data{{{0, 1}, 1}, {{0, 1}, 1}, {{0, 1}, 1}};
    const DcspInstance inst = build_from_dataset(kb, data);
    CHECK(inst.constraints.size() == 1);
}

TEST_CASE("dataset construction validates patterns and optionally labels") {
    const KnowledgeBase kb = make_addition();
    const AbductionIndex index = build_abduction_index(kb);
    CHECK_THROWS_AS(build_from_dataset(kb, {{{0, 1, 2}, 1}}), ValidationError);
    CHECK_THROWS_AS(build_from_dataset(kb, {{{0, 12}, 1}}), ValidationError);
    CHECK_THROWS_AS(build_from_dataset(kb, {{{0, 1}, 99}}, true, &index), ValidationError);
    CHECK_NOTHROW(build_from_dataset(kb, {{{0, 1}, 99}})); // unchecked without the index
}

TEST_CASE("an inconsistent sample builds fine but proves unsatisfiable") {
    const KnowledgeBase kb = make_addition();
    const DcspInstance inst = build_from_dataset(kb, {{{0, 0}, 1}}); // no v with v+v=1
    const SolutionSpace space = solve_enumerate(inst);
    CHECK(space.complete);
    CHECK(space.solutions.empty());
    CHECK(space.d == 10);
    CHECK_THROWS_AS(verdict(space), NoSolutionError);
    CHECK_THROWS_AS(disagreement(space), NoSolutionError);
}

TEST_CASE("adding constraints never enlarges the solution set") {
    const KnowledgeBase kb = make_modadd(9);
    const AbductionIndex index = build_abduction_index(kb);
    const SolutionSpace task_space = solve_enumerate(build_task_level(kb, index));

    std::vector<std::pair<ClusterSeq, Label>> data;
    SolutionSpace previous;
    bool first = true;
    for (std::size_t i = 0; i < index.pool_size(); i += 7) {
        data.emplace_back(index.pool()[i], index.label_of(i));
        const SolutionSpace space = solve_enumerate(build_from_dataset(kb, data));
        if (!first) {
            for (const Solution& s : space.solutions) {
                CHECK(std::binary_search(previous.solutions.begin(), previous.solutions.end(), s));
            }
        }
        // the task-level space is contained in every dataset-level space
        for (const Solution& s : task_space.solutions) {
            CHECK(std::binary_search(space.solutions.begin(), space.solutions.end(), s));
        }
        previous = space;
        first = false;
    }
}

TEST_CASE("enumeration order is deterministic and lexicographic") {
    const KnowledgeBase kb = make_modadd(4);
    const AbductionIndex index = build_abduction_index(kb);
    const DcspInstance inst = build_task_level(kb, index);
    const SolutionSpace a = solve_enumerate(inst);
    const SolutionSpace b = solve_enumerate(inst);
    CHECK(a.solutions == b.solutions);
    CHECK(std::is_sorted(a.solutions.begin(), a.solutions.end()));
}

TEST_CASE("solution cap reports incompleteness only when solutions were cut off") {
    const KnowledgeBase kb = make_modadd(2);
    const AbductionIndex index = build_abduction_index(kb);
    const DcspInstance inst = build_task_level(kb, index);

    const SolutionSpace capped = solve_enumerate(inst, 100);
    CHECK_FALSE(capped.complete);
    CHECK(capped.solutions.size() == 100);
    CHECK_THROWS_AS(verdict(capped), IncompleteEnumerationError);

    const SolutionSpace exact = solve_enumerate(inst, 28800);
    CHECK(exact.complete);
    CHECK(exact.solutions.size() == 28800);

    const SolutionSpace under = solve_enumerate(inst, 28799);
    CHECK_FALSE(under.complete);
    CHECK(under.solutions.size() == 28799);
}

TEST_CASE("d = 0 exactly when a complete non-empty space has one solution") {
    for (const KnowledgeBase& kb :
         {make_addition(), make_multiplication(), make_xor(), make_modadd(5), make_modadd(9)}) {
        const SolutionSpace space = solve_task(kb);
        REQUIRE(space.complete);
        REQUIRE_FALSE(space.solutions.empty());
        CHECK((space.d == 0) == (space.solutions.size() == 1));
        const auto [d, common] = disagreement(space);
        CHECK(d == space.d);
        CHECK(common == space.common);
    }
}

TEST_CASE("union of a singleton space is the full assignment") {
    const SolutionSpace space = solve_task(make_addition());
    const auto [d, common] = disagreement(space);
    CHECK(d == 0);
    REQUIRE(common.size() == 10);
    for (int v = 0; v < 10; ++v) {
        CHECK(common[static_cast<std::size_t>(v)] == std::pair<int, int>{v, v});
    }
}

TEST_CASE("the injective flag changes the admissible space") {
    // A constant label constrains nothing, so only all-different pruning bites.
    const std::vector<std::pair<ConceptSeq, Label>> table{
        {{0, 0}, 7}, {{0, 1}, 7}, {{1, 0}, 7}, {{1, 1}, 7}};
    const KnowledgeBase kb = make_table_kb("const2", 2, 2, table);
    const AbductionIndex index = build_abduction_index(kb);
    const SolutionSpace inj = solve_enumerate(build_task_level(kb, index, true));
    const SolutionSpace all = solve_enumerate(build_task_level(kb, index, false));
    CHECK(inj.solutions == std::vector<Solution>{{0, 1}, {1, 0}});
    CHECK(all.solutions.size() == 4);
    CHECK(all.solutions == oracle::enumerate_solutions(build_task_level(kb, index, false)));
}
