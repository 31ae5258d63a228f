// disorder-detect: command-line front end for the change-point detector.
//
// Exit codes: 0 success, 1 validation/convergence failure (or an undecided
// detection), 2 malformed input.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <omp.h>

#include "CLI11.hpp"
#include "disorder/detector.hpp"
#include "disorder/errors.hpp"
#include "disorder/io.hpp"
#include "disorder/model.hpp"
#include "disorder/montecarlo.hpp"
#include "disorder/solver.hpp"
#include "disorder/verification.hpp"

namespace {

using namespace disorder;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kMalformed = 2;

struct Options {
    std::string model_path;
    std::string table_path;
    std::string output_path;
    std::string stream_path;
    double tolerance = 1e-10;
    std::int64_t max_iterations = 100000;
    std::int64_t replications = 100000;
    std::uint64_t seed = 1;
    std::size_t horizon = 0;
    std::size_t trace_count = 0;
    bool trace = false;
    int threads = 0;
    std::optional<std::uint64_t> theta;
    std::string debug_payoff_indexing = "matched";
};

// Loads the model and reports violations; nullopt means "exit 1".
std::optional<DisorderModel> load_valid_model(const Options& o) {
    auto model = load_model(o.model_path);
    const auto violations = validate_model(model);
    if (violations.empty()) return model;
    for (const auto& v : violations) std::cerr << "invalid model: " << v << '\n';
    return std::nullopt;
}

// Writes through `fn` to --output if given, else stdout.
template <typename Fn>
void emit(const std::string& path, Fn&& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw InputError(fmt::format("cannot write '{}'", path));
    fn(out);
}

int cmd_validate(const Options& o) {
    const auto model = load_model(o.model_path);
    const auto violations = validate_model(model);
    for (const auto& v : violations) std::cout << v << '\n';
    if (violations.empty()) std::cout << "model is valid\n";
    return violations.empty() ? kOk : kFailure;
}

int cmd_solve(const Options& o) {
    const auto model = load_valid_model(o);
    if (!model) return kFailure;
    const auto [table, diag] = solve_threshold(*model, o.tolerance, o.max_iterations, {true, o.threads});
    emit(o.output_path, [&](std::ostream& out) { write_threshold_table(out, table, *model); });
    std::cerr << fmt::format("iterations {} sup_delta {:.17g} converged {}\n", diag.iterations, table.sup_delta,
                             diag.converged ? "true" : "false");
    return diag.converged ? kOk : kFailure;
}

int cmd_detect(const Options& o) {
    const auto model = load_valid_model(o);
    if (!model) return kFailure;
    const auto table = load_threshold_table(o.table_path, *model);
    check_table_matches(*model, table);

    std::vector<State> observations;
    if (o.stream_path.empty() || o.stream_path == "-") {
        observations = read_observations(std::cin, *model);
    } else {
        std::ifstream in(o.stream_path);
        if (!in) throw InputError(fmt::format("cannot read observation stream '{}'", o.stream_path));
        observations = read_observations(in, *model);
    }
    if (!observations.empty() && observations.front() != model->x0) {
        throw InputError(fmt::format("the stream must start at x0 = '{}'", model->label(model->x0)));
    }
    const auto report = run_to_decision(*model, table, observations, o.theta, o.trace);
    emit(o.output_path, [&](std::ostream& out) { write_detection_report(out, report, *model); });
    return report.undecided ? kFailure : kOk;
}

int cmd_simulate(const Options& o) {
    if (o.replications <= 0) throw InputError("--reps must be positive");
    const auto model = load_valid_model(o);
    if (!model) return kFailure;
    const auto table = load_threshold_table(o.table_path, *model);
    check_table_matches(*model, table);
    if (!table.converged) {
        std::cerr << "threshold table has not converged; re-run solve\n";
        return kFailure;
    }
    ExperimentConfig config;
    config.replications = static_cast<std::size_t>(o.replications);
    config.seed = o.seed;
    config.horizon = o.horizon;
    config.record_traces = o.trace_count;
    config.threads = o.threads;
    const auto result = estimate_success(*model, table, config);
    if (!o.output_path.empty()) {
        emit(o.output_path, [&](std::ostream& out) { write_replications_csv(out, result); });
    }
    write_experiment_summary(std::cout, result, *model);
    for (const auto& t : result.traces) write_detection_report(std::cerr, t, *model);
    return kOk;
}

int cmd_oracle_check(const Options& o) {
    const auto model = load_valid_model(o);
    if (!model) return kFailure;
    OracleCheckOptions options;
    options.horizon = o.horizon > 0 ? o.horizon : 6;
    if (o.debug_payoff_indexing == "power-lagged") {
        options.payoff_indexing = PayoffIndexing::kPowerLagged;
    } else if (o.debug_payoff_indexing == "likelihood-lagged") {
        options.payoff_indexing = PayoffIndexing::kLikelihoodLagged;
    }
    const auto report = oracle_check(*model, options);
    std::cout << format_oracle_report(report);
    if (!o.output_path.empty()) emit(o.output_path, [&](std::ostream& out) { write_oracle_report(out, report); });
    return report.all_passed() ? kOk : kFailure;
}

int cmd_value(const Options& o) {
    const auto model = load_valid_model(o);
    if (!model) return kFailure;
    ThresholdTable table;
    if (!o.table_path.empty()) {
        table = load_threshold_table(o.table_path, *model);
    } else {
        table = solve_threshold(*model, o.tolerance, o.max_iterations, {true, o.threads}).first;
    }
    if (!table.converged) {
        std::cerr << "threshold table has not converged\n";
        return kFailure;
    }
    const double naive = prior_tail(model->prior, 0) *
                         (1.0 - std::pow(model->prior.p, model->window.d1 + model->window.d2 + 1));
    std::cout << fmt::format("value {}\nno_information_value {}\niterations {}\n", json_number(problem_value(*model, table)),
                             json_number(naive), table.iteration);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian detection of a switch between two Markov regimes"};
    app.require_subcommand(1);
    Options o;

    auto* validate = app.add_subcommand("validate", "check a model file");
    auto* solve = app.add_subcommand("solve", "compute the threshold table r*");
    auto* detect = app.add_subcommand("detect", "run the optimal rule over an observation stream");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the success probability");
    auto* oracle = app.add_subcommand("oracle-check", "verify every formula against exhaustive enumeration");
    auto* value = app.add_subcommand("value", "maximal success probability of the problem");

    for (auto* cmd : {validate, solve, detect, simulate, oracle, value}) {
        cmd->add_option("--model", o.model_path, "model file (JSON)")->required();
        cmd->add_option("--threads", o.threads, "OpenMP threads (default: all)");
    }
    for (auto* cmd : {solve, value}) {
        cmd->add_option("--tol", o.tolerance, "sup-norm convergence tolerance");
        cmd->add_option("--max-iter", o.max_iterations, "maximum value-iteration sweeps");
    }
    for (auto* cmd : {solve, detect, simulate, oracle}) cmd->add_option("--output", o.output_path, "output file");
    detect->add_option("--table", o.table_path, "threshold table from `solve`")->required();
    simulate->add_option("--table", o.table_path, "threshold table from `solve`")->required();
    value->add_option("--table", o.table_path, "threshold table (solved on the fly if omitted)");
    detect->add_option("stream", o.stream_path, "observation stream (default: stdin)");
    detect->add_flag("--trace", o.trace, "record (n, g, r*, pi_n) for every step");
    detect->add_option("--theta", o.theta, "true change time, to score the decision");
    simulate->add_option("--reps", o.replications, "replications");
    simulate->add_option("--seed", o.seed, "base seed");
    simulate->add_option("--horizon", o.horizon, "path length (default: from the prior tail)");
    simulate->add_option("--trace", o.trace_count, "print detector traces of the first N replications");
    oracle->add_option("--horizon", o.horizon, "enumeration horizon (default 6)");
    oracle->add_option("--debug-payoff-indexing", o.debug_payoff_indexing)
        ->check(CLI::IsMember({"matched", "power-lagged", "likelihood-lagged"}))
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kMalformed;
    }
    if (o.threads > 0) omp_set_num_threads(o.threads);

    try {
        if (*validate) return cmd_validate(o);
        if (*solve) return cmd_solve(o);
        if (*detect) return cmd_detect(o);
        if (*simulate) return cmd_simulate(o);
        if (*oracle) return cmd_oracle_check(o);
        if (*value) return cmd_value(o);
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kMalformed;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kMalformed;
    }
    return kMalformed;
}
