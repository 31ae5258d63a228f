// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <omp.h>

#include "disorder/detector.hpp"
#include "disorder/montecarlo.hpp"
#include "disorder/oracle.hpp"
#include "disorder/solver.hpp"
#include "disorder/verification.hpp"
#include "reference_models.hpp"

using namespace disorder;
using disorder::testing::all_paths;
using disorder::testing::no_information;
using disorder::testing::three_state;
using disorder::testing::two_state;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

struct NamedModel {
    std::string name;
    DisorderModel model;
};

std::vector<NamedModel> reference_grid() {
    std::vector<NamedModel> out;
    for (double pi : {0.0, 0.2}) {
        for (double p : {0.5, 0.9}) {
            out.push_back({fmt::format("2-state pi={} p={}", pi, p), two_state(pi, p)});
            out.push_back({fmt::format("3-state pi={} p={}", pi, p), three_state(pi, p)});
        }
    }
    return out;
}

std::vector<NamedModel> reference_models() {
    return {{"2-state", two_state()}, {"3-state", three_state()}};
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome posterior_suite() {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<std::string> gates{"posterior_exact", "posterior_step", "posterior_multistep",
                                         "prob_change_within", "prob_change_before_window"};
    Outcome o;
    double worst = 0.0;
    for (const auto& [name, m] : reference_grid()) {
        OracleCheckOptions options;
        options.horizon = 6;
        const auto report = oracle_check(m, options);
        for (const auto& g : gates) {
            const auto* gate = report.find(g);
            if (gate == nullptr || gate->skipped || !(gate->max_abs_error < 1e-10)) {
                o.passed = false;
                o.detail += fmt::format(" [{}: {} failed]", name, g);
            }
            if (gate != nullptr) worst = std::max(worst, gate->max_abs_error);
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= 60.0) o.passed = false;
    o.detail = fmt::format("max abs error {:.3e} over 8 models, {:.1f} s", worst, elapsed) + o.detail;
    return o;
}

Outcome factorization() {
    Outcome o;
    double worst = 0.0;
    std::size_t checks = 0;
    for (const auto& [name, m] : reference_grid()) {
        OracleCheckOptions options;
        options.horizon = 6;
        const auto report = oracle_check(m, options);
        const auto* gate = report.find("factorization");
        if (gate == nullptr || gate->skipped || !(gate->max_abs_error < 1e-10)) {
            o.passed = false;
            o.detail += fmt::format(" [{} failed]", name);
        }
        if (gate != nullptr) {
            worst = std::max(worst, gate->max_abs_error);
            checks += gate->checks;
        }
    }
    o.detail = fmt::format("max abs error {:.3e} over {} windows", worst, checks) + o.detail;
    return o;
}

Outcome payoff_index_resolution() {
    Outcome o;
    double matched = 0.0;
    double power = 0.0;
    double likelihood = 0.0;
    for (const auto& [name, m] : reference_grid()) {
        matched = std::max(matched, payoff_gate_error(m, 6, PayoffIndexing::kMatched));
        power = std::max(power, payoff_gate_error(m, 6, PayoffIndexing::kPowerLagged));
        likelihood = std::max(likelihood, payoff_gate_error(m, 6, PayoffIndexing::kLikelihoodLagged));
    }
    o.passed = matched < 1e-10 && power > 1e-3 && likelihood > 1e-3;
    o.detail = fmt::format("matched {:.3e}, power-lagged {:.3e}, likelihood-lagged {:.3e}", matched, power,
                           likelihood);
    return o;
}

Outcome closed_form_value() {
    Outcome o;
    double worst = 0.0;
    std::size_t paths = 0;
    for (double pi : {0.0, 0.2}) {
        for (int d1 = 0; d1 <= 2; ++d1) {
            for (int d2 = 0; d2 <= 2; ++d2) {
                for (double p : {0.3, 0.5, 0.9}) {
                    const auto m = no_information(pi, p, d1, d2);
                    const auto [table, diag] = solve_threshold(m);
                    const double expected = (1 - pi) * (1 - std::pow(p, d1 + d2 + 1));
                    const double err = std::abs(problem_value(m, table) - expected);
                    worst = std::max(worst, err);
                    if (!(err < 1e-12)) o.passed = false;
                    for (const auto& path : all_paths(m, static_cast<std::size_t>(d1) + 2)) {
                        ++paths;
                        const auto report = run_to_decision(m, table, path);
                        if (report.stop_time != d1 + 1) {
                            o.passed = false;
                            o.detail = fmt::format(" [d1={} d2={} p={}: stopped at {}]", d1, d2, p,
                                                   report.stop_time.value_or(-1));
                        }
                    }
                }
            }
        }
    }
    o.detail = fmt::format("max value error {:.3e} over 54 cases, {} paths stop at d1+1", worst, paths) + o.detail;
    return o;
}

Outcome truncated_envelope() {
    Outcome o;
    const auto m = two_state();
    const std::size_t horizon = 7;
    const auto sol = oracle_optimal_value(m, horizon);
    const auto [table, diag] = solve_threshold(m, 1e-12);
    const double value = problem_value(m, table);
    const StoppingRule tau_star = [&](std::span<const State> prefix) { return Detector::crosses(m, table, prefix); };
    const double restricted = oracle_rule_value(sol.joint, forced_by(tau_star, horizon));
    const auto& v = sol.value;
    constexpr double kSlack = 1e-12;
    const double width = v.value_upper - v.value_lower;
    auto inside = [&](double x) { return x >= v.value_lower - kSlack && x <= v.value_upper + kSlack; };
    o.passed = width < 0.02 && inside(value) && inside(restricted);
    o.detail = fmt::format("envelope [{:.12f}, {:.12f}] width {:.4f}, problem_value {:.12f}, restricted tau* {:.12f}",
                           v.value_lower, v.value_upper, width, value, restricted);
    return o;
}

Outcome monte_carlo() {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    for (const auto& [name, m] : reference_models()) {
        const auto [table, diag] = solve_threshold(m, 1e-12);
        ExperimentConfig config;
        config.replications = 100000;
        config.seed = 1;
        const auto r = estimate_success(m, table, config);
        const double se = r.standard_error.value_or(0.0);
        const bool ok = std::abs(r.success_rate - r.theoretical_value) <= 3 * se;
        o.passed = o.passed && ok;
        o.detail += fmt::format("{}: rate {:.5f} vs {:.5f} (z {:.2f}); ", name, r.success_rate, r.theoretical_value,
                                r.z_score.value_or(0.0));
    }
    const auto m = two_state();
    const auto [table, diag] = solve_threshold(m, 1e-12);
    int within = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ExperimentConfig config;
        config.replications = 10000;
        config.seed = seed;
        const auto r = estimate_success(m, table, config);
        if (std::abs(r.success_rate - r.theoretical_value) <= 3 * r.standard_error.value_or(0.0)) ++within;
    }
    const double elapsed = seconds_since(start);
    o.passed = o.passed && within >= 99 && elapsed < 300.0;
    o.detail += fmt::format("{}/100 seeds within 3 SE, {:.1f} s", within, elapsed);
    return o;
}

Outcome clamp_dominance() {
    Outcome o;
    for (const auto& [name, m] : reference_models()) {
        const auto joint = enumerate_joint(m, 7);
        const int d1 = m.window.d1;
        const double clamped = oracle_rule_value(joint, fixed_time_rule(d1 + 1));
        for (int t = 0; t <= d1; ++t) {
            const double early = oracle_rule_value(joint, fixed_time_rule(t));
            if (!(clamped >= early - 1e-14)) o.passed = false;
            o.detail += fmt::format("{} tau={}: {:.6f} <= {:.6f}; ", name, t, early, clamped);
        }
    }
    o.detail.resize(o.detail.size() - 2);
    return o;
}

Outcome solver_convergence() {
    Outcome o;
    const int max_threads = std::max(4, omp_get_max_threads());
    const double tol = 1e-10;
    for (double p : {0.5, 0.9}) {
        for (const auto& m : {two_state(0.0, p), three_state(0.0, p)}) {
            const auto serial = solve_threshold(m, tol, 100000, {false, 0});
            const auto one = solve_threshold(m, tol, 100000, {true, 1});
            const auto many = solve_threshold(m, tol, 100000, {true, max_threads});
            const double residual = fixed_point_residual(m, many.first);
            const bool ok = many.second.converged && many.second.monotone && serial.second.monotone &&
                            residual < 2 * tol && serial.first.values == one.first.values &&
                            one.first.values == many.first.values;
            o.passed = o.passed && ok;
            o.detail += fmt::format("{}-state p={}: {} sweeps, residual {:.2e}; ", m.num_states(), p,
                                    many.second.iterations, residual);
        }
    }
    o.detail += fmt::format("bitwise equal for serial, 1 and {} threads", max_threads);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"posterior identity suite", posterior_suite},
        {"factorization identity", factorization},
        {"payoff index resolution", payoff_index_resolution},
        {"no-information closed-form value", closed_form_value},
        {"truncated optimality envelope", truncated_envelope},
        {"Monte Carlo calibration", monte_carlo},
        {"early fixed rules are dominated by the clamped rule", clamp_dominance},
        {"solver convergence properties", solver_convergence},
    };
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& [name, check] = criteria[i];
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, fmt::format("threw: {}", e.what())};
        }
        all = all && o.passed;
        fmt::print("{} criterion {}: {} ({})\n", o.passed ? "PASS" : "FAIL", i + 1, name, o.detail);
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
