// nesy: learnability analysis for neuro-symbolic tasks via their derived
// constraint satisfaction problems.
//
// Subcommands: analyze | sample | ensemble | risks | bound.
// Data goes to stdout (JSON for single reports, CSV for grids and sweeps);
// diagnostics and the run manifest go to stderr. Exit code 0 means no errors
// and no enumeration-cap breaches.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nesy/dcsp.hpp"
#include "nesy/ensemble.hpp"
#include "nesy/json_io.hpp"
#include "nesy/kb.hpp"
#include "nesy/manifest.hpp"
#include "nesy/risks.hpp"
#include "nesy/simulate.hpp"
#include "nesy/task_spec.hpp"

namespace {

constexpr int kExitCapBreach = 1;
constexpr int kExitError = 2;

struct LoadedTask {
    nesy::TaskSpec spec;
    nesy::KnowledgeBase kb;
    std::string file_hash;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw nesy::ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t env_cap(const char* name, std::uint64_t fallback) {
    const char* raw = std::getenv(name);
    if (!raw || !*raw) return fallback;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (end == raw || *end != '\0' || v == 0) {
        throw nesy::ValidationError(std::string(name) + " must be a positive integer, got '" +
                                    raw + "'");
    }
    return v;
}

LoadedTask load_task(const std::string& path) {
    const std::string bytes = slurp(path);
    std::istringstream in(bytes);
    nesy::TaskSpec spec = nesy::parse_task_spec(in, path);
    spec.pool_cap = env_cap("NESY_POOL_CAP", spec.pool_cap);
    spec.solution_cap = env_cap("NESY_SOLUTION_CAP", spec.solution_cap);
    std::vector<std::string> warnings;
    nesy::KnowledgeBase kb = nesy::load_kb(spec, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    return LoadedTask{std::move(spec), std::move(kb), nesy::content_hash(bytes)};
}

nlohmann::json task_options_json(const LoadedTask& task) {
    nlohmann::json o;
    o["task"] = task.spec.name;
    o["kb"] = task.kb.signature();
    o["injective"] = task.spec.injective;
    o["pool_cap"] = task.spec.pool_cap;
    o["solution_cap"] = task.spec.solution_cap;
    o["distribution"] = task.spec.uniform_distribution
                            ? (task.spec.distribution_declared ? "uniform" : "uniform (assumed)")
                            : "explicit";
    o["seed"] = task.spec.seed;
    return o;
}

void emit_manifest(const nesy::RunManifest& manifest) {
    std::cerr << manifest.to_json().dump(2) << "\n";
}

int cmd_analyze(const std::string& task_file, std::size_t max_listed) {
    const LoadedTask task = load_task(task_file);
    const nesy::AbductionIndex index = nesy::build_index(task.spec, task.kb);
    const nesy::DcspInstance inst =
        nesy::build_task_level(task.kb, index, task.spec.injective);
    const nesy::SolutionSpace space = nesy::solve_enumerate(inst, task.spec.solution_cap);

    nlohmann::json j = nesy::solution_space_json(space, max_listed);
    j["task"] = task.spec.name;
    j["kb"] = task.kb.signature();
    j["m"] = task.kb.arity();
    j["pool_size"] = index.pool_size();
    j["injective"] = task.spec.injective;

    nesy::RunManifest manifest;
    manifest.command = "analyze";
    manifest.input_hashes = {task.file_hash};
    manifest.options = task_options_json(task);
    manifest.options["max_solutions_listed"] = max_listed;

    if (!space.complete) {
        std::cout << j.dump(2) << "\n";
        emit_manifest(manifest);
        std::cerr << "error: enumeration hit the solution cap of " << task.spec.solution_cap
                  << "; verdict withheld (raise NESY_SOLUTION_CAP or analysis.solution_cap)\n";
        return kExitCapBreach;
    }
    const nesy::LearnabilityReport report = nesy::verdict(space);
    j.update(nesy::learnability_json(report));
    std::cout << j.dump(2) << "\n";
    emit_manifest(manifest);
    return 0;
}

int cmd_sample(const std::string& task_file, std::vector<int> n_grid, int repeats,
               std::optional<std::uint64_t> seed_override, bool summary, bool with_runtime) {
    const LoadedTask task = load_task(task_file);
    const std::uint64_t base_seed = seed_override.value_or(task.spec.seed);
    const nesy::AbductionIndex index = nesy::build_index(task.spec, task.kb);
    const nesy::ConceptDistribution dist = nesy::make_distribution(task.spec, index);
    std::sort(n_grid.begin(), n_grid.end());

    nesy::RunManifest manifest;
    manifest.command = "sample";
    manifest.input_hashes = {task.file_hash};
    manifest.options = task_options_json(task);
    manifest.options["seed"] = base_seed;
    manifest.options["n_grid"] = n_grid;
    manifest.options["repeats"] = repeats;
    manifest.options["summary"] = summary;
    manifest.options["with_runtime"] = with_runtime;
    manifest.options["kappa"] = dist.kappa();

    bool flagged = false;
    if (summary) {
        const nesy::SweepResult result = nesy::sweep(task.kb, dist, n_grid, repeats, base_seed,
                                                     task.spec.solution_cap, task.spec.injective);
        flagged = result.any_flagged;
        std::cout << nesy::sweep_csv(task.spec.name, result);
    } else {
        std::cout << nesy::trial_csv_header(with_runtime);
        for (std::size_t g = 0; g < n_grid.size(); ++g) {
            for (int r = 0; r < repeats; ++r) {
                const std::uint64_t trial_index =
                    g * static_cast<std::size_t>(repeats) + static_cast<std::size_t>(r);
                const nesy::TrialReport trial =
                    nesy::erm_trial(task.kb, dist, n_grid[g],
                                    nesy::derive_seed(base_seed, trial_index),
                                    task.spec.solution_cap, task.spec.injective);
                if (!trial.complete) flagged = true;
                std::cout << nesy::trial_csv_row(task.spec.name, trial, with_runtime);
            }
        }
    }
    emit_manifest(manifest);
    if (flagged) {
        std::cerr << "error: at least one trial hit the solution cap of "
                  << task.spec.solution_cap << "\n";
        return kExitCapBreach;
    }
    return 0;
}

int cmd_ensemble(const std::vector<std::string>& task_files, const std::string& grid_range,
                 int grid_l, std::size_t max_listed) {
    nesy::RunManifest manifest;
    manifest.command = "ensemble";

    if (!grid_range.empty() && !task_files.empty()) {
        throw nesy::ValidationError("ensemble takes either task files or --modadd-grid, not both");
    }
    if (!grid_range.empty()) {
        const auto sep = grid_range.find("..");
        if (sep == std::string::npos) {
            throw nesy::ValidationError("--modadd-grid expects kmin..kmax, e.g. 2..10");
        }
        const int kmin = std::stoi(grid_range.substr(0, sep));
        const int kmax = std::stoi(grid_range.substr(sep + 2));
        const std::uint64_t pool_cap = env_cap("NESY_POOL_CAP", nesy::kDefaultPoolCap);
        const std::uint64_t solution_cap =
            env_cap("NESY_SOLUTION_CAP", nesy::kDefaultSolutionCap);
        const auto cells = nesy::ensemble_grid(kmin, kmax, grid_l, pool_cap, solution_cap);
        std::cout << nesy::grid_csv(cells);
        manifest.options["modadd_grid"] = grid_range;
        manifest.options["L"] = grid_l;
        manifest.options["pool_cap"] = pool_cap;
        manifest.options["solution_cap"] = solution_cap;
        emit_manifest(manifest);
        bool breached = false;
        for (const nesy::GridCell& c : cells) {
            if (!c.complete) {
                std::cerr << "error: cell (" << c.k1 << "," << c.k2
                          << ") hit the solution cap\n";
                breached = true;
            }
        }
        return breached ? kExitCapBreach : 0;
    }

    if (task_files.empty()) {
        throw nesy::ValidationError("ensemble needs task files or --modadd-grid");
    }
    nesy::EnsembleSpec spec;
    std::vector<LoadedTask> tasks;
    for (const std::string& file : task_files) {
        tasks.push_back(load_task(file));
        spec.tasks.push_back(tasks.back().kb);
        manifest.input_hashes.push_back(tasks.back().file_hash);
        spec.name += (spec.name.empty() ? "" : "+") + tasks.back().spec.name;
    }
    // the first task file governs analysis options
    const nesy::TaskSpec& lead = tasks.front().spec;
    const nesy::DcspInstance merged = nesy::merge(spec, lead.pool_cap, lead.injective);
    const nesy::SolutionSpace space = nesy::solve_enumerate(merged, lead.solution_cap);

    nlohmann::json j = nesy::solution_space_json(space, max_listed);
    j["ensemble"] = spec.name;
    auto members = nlohmann::json::array();
    for (const nesy::KnowledgeBase& kb : spec.tasks) members.push_back(kb.signature());
    j["members"] = members;
    j["injective"] = lead.injective;

    manifest.options["ensemble"] = spec.name;
    manifest.options["injective"] = lead.injective;
    manifest.options["pool_cap"] = lead.pool_cap;
    manifest.options["solution_cap"] = lead.solution_cap;
    manifest.options["max_solutions_listed"] = max_listed;

    if (!space.complete) {
        std::cout << j.dump(2) << "\n";
        emit_manifest(manifest);
        std::cerr << "error: enumeration hit the solution cap of " << lead.solution_cap << "\n";
        return kExitCapBreach;
    }
    j.update(nesy::learnability_json(nesy::verdict(space)));
    std::cout << j.dump(2) << "\n";
    emit_manifest(manifest);
    return 0;
}

int cmd_risks(const std::string& task_file, const std::string& predictor_file,
              const std::string& surrogate, std::size_t a3_n) {
    const LoadedTask task = load_task(task_file);
    const std::string predictor_bytes = slurp(predictor_file);
    std::istringstream pin(predictor_bytes);
    const nesy::Predictor pred = nesy::Predictor::parse(pin);
    if (pred.size() != task.kb.concept_count()) {
        throw nesy::ValidationError("predictor is " + std::to_string(pred.size()) + "x" +
                                    std::to_string(pred.size()) + " but the task has L = " +
                                    std::to_string(task.kb.concept_count()));
    }
    const nesy::AbductionIndex index = nesy::build_index(task.spec, task.kb);
    const nesy::ConceptDistribution dist = nesy::make_distribution(task.spec, index);

    nlohmann::json values;
    const bool all = surrogate == "all";
    if (all || surrogate == "concept") {
        values["concept"] = nesy::risk_value_json(nesy::concept_risk(pred));
    }
    if (all || surrogate == "nesy") {
        values["nesy"] = nesy::risk_value_json(nesy::nesy_risk(pred, task.kb, dist));
    }
    if (all || surrogate == "pnl") {
        values["pnl"] = nesy::risk_value_json(nesy::pnl_risk(pred, task.kb, dist));
    }
    if (all || surrogate == "abl") {
        values["abl"] = nesy::risk_value_json(nesy::abl_risk(pred, task.kb, dist));
    }
    if (all || surrogate == "a3") {
        values["a3"] = nesy::risk_value_json(nesy::a3_risk(pred, task.kb, dist, a3_n));
    }

    nlohmann::json j;
    j["task"] = task.spec.name;
    j["risks"] = values;
    j["a3_candidates"] = a3_n;
    j["tie_break"] = "lexicographic";
    std::cout << j.dump(2) << "\n";

    nesy::RunManifest manifest;
    manifest.command = "risks";
    manifest.input_hashes = {task.file_hash, nesy::content_hash(predictor_bytes)};
    manifest.options = task_options_json(task);
    manifest.options["surrogate"] = surrogate;
    manifest.options["a3_candidates"] = a3_n;
    manifest.options["tie_break"] = "lexicographic";
    emit_manifest(manifest);
    return 0;
}

int cmd_bound(const std::string& task_file, double epsilon) {
    const LoadedTask task = load_task(task_file);
    const nesy::AbductionIndex index = nesy::build_index(task.spec, task.kb);
    const nesy::ConceptDistribution dist = nesy::make_distribution(task.spec, index);
    const double bound = nesy::sample_complexity_bound(dist, epsilon);

    nlohmann::json j;
    j["task"] = task.spec.name;
    j["pool_size"] = index.pool_size();
    j["kappa"] = dist.kappa();
    j["epsilon"] = epsilon;
    j["bound"] = bound;
    j["bound_ceil"] = static_cast<std::int64_t>(std::ceil(bound));
    j["note"] = bound <= 0.0 ? "bound is non-positive: any sample size suffices"
                             : "sample sizes above the bound guarantee concept error <= epsilon "
                               "for learnable tasks";
    std::cout << j.dump(2) << "\n";

    nesy::RunManifest manifest;
    manifest.command = "bound";
    manifest.input_hashes = {task.file_hash};
    manifest.options = task_options_json(task);
    manifest.options["epsilon"] = epsilon;
    emit_manifest(manifest);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learnability analysis for neuro-symbolic tasks via derived CSPs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("nesy ") + nesy::kVersion);

    std::string task_file;
    std::size_t max_listed = 100;
    auto* analyze = app.add_subcommand("analyze", "Task-level learnability verdict (JSON)");
    analyze->add_option("task", task_file, "task spec file")->required();
    analyze->add_option("--max-solutions-listed", max_listed,
                        "list individual solutions only up to this count");

    std::string sample_task;
    std::vector<int> n_grid;
    int repeats = 5;
    std::optional<std::uint64_t> seed_override;
    bool summary = false;
    bool with_runtime = false;
    auto* sample = app.add_subcommand("sample", "Seeded sampling + ERM trials (CSV)");
    sample->add_option("task", sample_task, "task spec file")->required();
    sample->add_option("--n", n_grid, "sample sizes N (repeatable or comma-separated)")
        ->required()
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    sample->add_option("--repeats", repeats, "trials per N")->check(CLI::PositiveNumber);
    sample->add_option("--seed", seed_override, "base seed (defaults to the task file's)");
    sample->add_flag("--summary", summary, "emit the per-N sweep summary instead of trials");
    sample->add_flag("--with-runtime", with_runtime,
                     "append the wall-clock runtime_ms column (not reproducible)");

    std::vector<std::string> ensemble_files;
    std::string grid_range;
    int grid_l = 10;
    auto* ensemble = app.add_subcommand("ensemble", "Merged-task analysis (JSON) or grid (CSV)");
    ensemble->add_option("tasks", ensemble_files, "task spec files to merge");
    ensemble->add_option("--modadd-grid", grid_range, "kmin..kmax pairwise mod-addition grid");
    ensemble->add_option("--L", grid_l, "concept space size for the grid");
    ensemble->add_option("--max-solutions-listed", max_listed,
                         "list individual solutions only up to this count");

    std::string risks_task, predictor_file, surrogate = "all";
    std::size_t a3_n = 16;
    auto* risks = app.add_subcommand("risks", "Risk functionals of a predictor (JSON)");
    risks->add_option("task", risks_task, "task spec file")->required();
    risks->add_option("--predictor", predictor_file, "numeric matrix file, rows = clusters")
        ->required();
    risks->add_option("--surrogate", surrogate, "which risk to evaluate")
        ->check(CLI::IsMember({"all", "concept", "nesy", "pnl", "abl", "a3"}));
    risks->add_option("--n", a3_n, "a3 candidate-set size")->check(CLI::PositiveNumber);

    std::string bound_task;
    double epsilon = 0.0;
    auto* bound = app.add_subcommand("bound", "Sample-complexity bound (JSON)");
    bound->add_option("task", bound_task, "task spec file")->required();
    bound->add_option("--epsilon", epsilon, "target concept error")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return cmd_analyze(task_file, max_listed);
        if (sample->parsed()) {
            return cmd_sample(sample_task, n_grid, repeats, seed_override, summary, with_runtime);
        }
        if (ensemble->parsed()) {
            return cmd_ensemble(ensemble_files, grid_range, grid_l, max_listed);
        }
        if (risks->parsed()) return cmd_risks(risks_task, predictor_file, surrogate, a3_n);
        if (bound->parsed()) return cmd_bound(bound_task, epsilon);
    } catch (const nesy::BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapBreach;
    } catch (const nesy::IncompleteEnumerationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCapBreach;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
