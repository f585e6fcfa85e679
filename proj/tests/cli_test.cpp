#include <doctest.h>

#include <sstream>

#include "nesy/json_io.hpp"
#include "nesy/manifest.hpp"
#include "nesy/task_spec.hpp"

using namespace nesy;

namespace {

TaskSpec parse(const std::string& text) {
    std::istringstream in(text);
    return parse_task_spec(in, "test");
}

} // namespace

TEST_CASE("task specs parse with documented defaults") {
    const TaskSpec spec = parse(R"({"name": "modadd9", "builtin": "modadd", "k": 9})");
    CHECK(spec.name == "modadd9");
    CHECK(spec.builtin == "modadd");
    CHECK(spec.k == 9);
    CHECK(spec.n_digits == 1);
    CHECK(spec.injective);
    CHECK(spec.seed == 2023);
    CHECK(spec.solution_cap == kDefaultSolutionCap);
    CHECK(spec.pool_cap == kDefaultPoolCap);
    CHECK(spec.uniform_distribution);
    CHECK_FALSE(spec.distribution_declared);

    const KnowledgeBase kb = load_kb(spec);
    CHECK(kb.concept_count() == 10);
    CHECK(kb.arity() == 2);
}

TEST_CASE("task spec validation failures are loud and specific") {
    CHECK_THROWS_AS(parse("{"), ValidationError);                        // malformed JSON
    CHECK_THROWS_AS(parse(R"({"builtin": "xor"})"), ValidationError);    // missing name
    CHECK_THROWS_AS(parse(R"({"name": "x"})"), ValidationError);         // no kb at all
    CHECK_THROWS_AS(parse(R"({"name": "x", "builtin": "xor", "table": []})"),
                    ValidationError);                                    // both kb kinds
    CHECK_THROWS_AS(parse(R"({"name": "x", "builtin": "xor", "typo": 1})"), ValidationError);
    CHECK_THROWS_WITH_AS(parse(R"({"name":"x","builtin":"xor","distribution":{"type":"zipf"}})"),
                         doctest::Contains("zipf"), ValidationError);

    // malformed JSON diagnostics carry a position
    try {
        parse("{\n  \"name\": \"x\",\n  oops\n}");
        FAIL("expected a parse error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
}

TEST_CASE("load_kb resolves builtins, warns, and rejects nonsense") {
    CHECK_THROWS_WITH_AS(load_kb(parse(R"({"name":"x","builtin":"sub"})")),
                         doctest::Contains("unknown builtin"), ValidationError);
    CHECK_THROWS_AS(load_kb(parse(R"({"name":"x","builtin":"modadd"})")), ValidationError);
    CHECK_THROWS_AS(load_kb(parse(R"({"name":"x","builtin":"xor","L":3})")), ValidationError);
    CHECK_THROWS_WITH_AS(load_kb(parse(R"({"name":"x","builtin":"add","m":3})")),
                         doctest::Contains("2 * n_digits"), ValidationError);
    CHECK_NOTHROW(load_kb(parse(R"({"name":"x","builtin":"add","m":2})")));

    std::vector<std::string> warnings;
    const KnowledgeBase kb = load_kb(parse(R"({"name":"x","builtin":"modadd","k":12})"),
                                     &warnings);
    CHECK(kb.forward({9, 9}) == 18 % 12);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("k = 12") != std::string::npos);
}

TEST_CASE("table tasks round-trip through the task-file format") {
    const TaskSpec spec = parse(R"({
        "name": "xor_table",
        "table": [[[0,0],0],[[0,1],1],[[1,0],1],[[1,1],0]],
        "L": 2, "m": 2,
        "distribution": {"type": "explicit",
                         "weights": [[[0,0],0.4],[[0,1],0.3],[[1,0],0.2],[[1,1],0.1]]},
        "analysis": {"injective": false, "solution_cap": 12},
        "seed": 7
    })");
    CHECK_FALSE(spec.injective);
    CHECK(spec.solution_cap == 12);
    CHECK(spec.seed == 7);
    CHECK(spec.distribution_declared);
    CHECK_FALSE(spec.uniform_distribution);

    const KnowledgeBase kb = load_kb(spec);
    CHECK(kb.forward({1, 0}) == 1);
    const AbductionIndex index = build_index(spec, kb);
    const ConceptDistribution dist = make_distribution(spec, index);
    CHECK(dist.kappa() == doctest::Approx(0.1));

    // a table missing one tuple is not total
    CHECK_THROWS_WITH_AS(
        load_kb(parse(R"({"name":"bad","table":[[[0,0],0],[[0,1],1],[[1,0],1]],"L":2,"m":2})")),
        doctest::Contains("not total"), ValidationError);
}

TEST_CASE("pool restrictions flow through to the index") {
    const TaskSpec spec = parse(R"({
        "name": "restricted",
        "builtin": "add",
        "pool": [[0,0],[0,1],[1,0]]
    })");
    const KnowledgeBase kb = load_kb(spec);
    const AbductionIndex index = build_index(spec, kb);
    CHECK(index.pool_size() == 3);
}

TEST_CASE("manifests are identical up to the timestamp") {
    RunManifest a;
    a.command = "analyze";
    a.input_hashes = {content_hash("{}")};
    a.options["task"] = "xor";
    RunManifest b = a;
    CHECK(a.to_json(false).dump() == b.to_json(false).dump());
    auto with_ts = a.to_json(true);
    CHECK(with_ts.contains("timestamp_unix_ms"));
    with_ts.erase("timestamp_unix_ms");
    CHECK(with_ts.dump() == a.to_json(false).dump());
    CHECK(content_hash("{}").rfind("fnv1a64:", 0) == 0);
    CHECK(content_hash("a") != content_hash("b"));
}

TEST_CASE("solution space JSON elides large solution lists but keeps the union") {
    SolutionSpace space;
    space.num_vars = 2;
    space.solutions = {{0, 1}, {1, 0}};
    space.common = {};
    space.d = 2;
    const auto listed = solution_space_json(space, 2);
    CHECK(listed.contains("solutions"));
    CHECK(listed["union"].empty());
    CHECK(listed["num_solutions"] == 2);
    const auto elided = solution_space_json(space, 1);
    CHECK_FALSE(elided.contains("solutions"));
    CHECK(elided["d"] == 2);
}

TEST_CASE("infinite risks serialize as the string inf") {
    CHECK(risk_value_json(1.5) == nlohmann::json(1.5));
    CHECK(risk_value_json(std::numeric_limits<double>::infinity()) == nlohmann::json("inf"));
}
