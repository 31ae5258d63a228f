#include "disorder/verification.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "disorder/detector.hpp"
#include "disorder/io.hpp"
#include "disorder/oracle.hpp"
#include "disorder/posterior.hpp"
#include "disorder/solver.hpp"

namespace disorder {

namespace {

class Gate {
public:
    Gate(std::string name, double tolerance) { result_.name = std::move(name), result_.tolerance = tolerance; }

    void add(double expected, double actual) {
        const double err = std::abs(expected - actual);
        result_.max_abs_error = std::max(result_.max_abs_error, std::isnan(err) ? INFINITY : err);
        ++result_.checks;
    }

    Gate& note(std::string text) {
        result_.note = std::move(text);
        return *this;
    }

    GateResult finish(bool gating = true) {
        result_.gating = gating;
        result_.passed = result_.max_abs_error < result_.tolerance;
        return result_;
    }

    static GateResult skipped(std::string name, std::string why) {
        GateResult r;
        r.name = std::move(name);
        r.skipped = true;
        r.note = std::move(why);
        return r;
    }

private:
    GateResult result_;
};

// Every positive-mass prefix up to the horizon.
template <typename Fn>
void for_each_prefix(const JointTable& joint, Fn&& fn) {
    for (std::size_t n = 0; n <= joint.horizon(); ++n) {
        for (std::size_t code = 0; code < joint.level_size(n); ++code) {
            if (!(joint.prefix_mass_at(n, code) > 0.0)) continue;
            const auto prefix = joint.prefix(n, code);
            fn(n, code, prefix);
        }
    }
}

double oracle_pi(const JointTable& joint, std::span<const State> prefix) {
    return oracle_conditional(joint, prefix, ThetaInterval::at_most(static_cast<std::int64_t>(prefix.size()) - 1));
}

ThetaInterval window_interval(const PrecisionWindow& w, std::size_t n) {
    const auto t = static_cast<std::int64_t>(n);
    return {t - w.d1, t + w.d2};
}

}  // namespace

bool OracleReport::all_passed() const {
    return std::all_of(gates.begin(), gates.end(),
                       [](const GateResult& g) { return g.skipped || !g.gating || g.passed; });
}

const GateResult* OracleReport::find(const std::string& name) const {
    for (const auto& g : gates)
        if (g.name == name) return &g;
    return nullptr;
}

double payoff_gate_error(const DisorderModel& model, std::size_t horizon, PayoffIndexing indexing) {
    const auto joint = enumerate_joint(model, horizon);
    const auto len = static_cast<std::size_t>(model.window.d1) + 2;
    double worst = 0.0;
    for_each_prefix(joint, [&](std::size_t n, std::size_t, const std::vector<State>& prefix) {
        if (prefix.size() < len) return;
        const Window full(prefix);
        const double alpha = posterior_exact(model, full).pi_n;
        const double h = window_payoff_h(model, full.tail(len), alpha, indexing);
        const double truth = oracle_conditional(joint, prefix, window_interval(model.window, n));
        worst = std::max(worst, std::abs(h - truth));
    });
    return worst;
}

OracleReport oracle_check(const DisorderModel& model, const OracleCheckOptions& options) {
    const std::size_t horizon = options.horizon;
    const double tol = options.tolerance;
    const auto joint = enumerate_joint(model, horizon);
    OracleReport report;
    report.horizon = horizon;
    auto& gates = report.gates;

    {
        Gate total("joint_total_mass", 1e-12);
        total.add(1.0, joint.total_mass());
        gates.push_back(total.finish());
        Gate marginal("theta_marginal", 1e-14);
        const auto cells = joint.theta_marginal();
        for (std::size_t j = 0; j + 1 < cells.size(); ++j) marginal.add(prior_pmf(model.prior, j), cells[j]);
        marginal.add(prior_tail(model.prior, static_cast<std::int64_t>(horizon) + 1), cells.back());
        gates.push_back(marginal.finish());
    }

    Gate exact("posterior_exact", tol), step("posterior_step", tol), within("prob_change_within", tol),
        density("joint_density", tol), normalization("density_normalization", tol),
        martingale("posterior_martingale", tol);
    std::vector<double> level_mass(horizon + 1, 0.0);
    for_each_prefix(joint, [&](std::size_t n, std::size_t, const std::vector<State>& prefix) {
        const Window w(prefix);
        const double truth = oracle_pi(joint, prefix);
        exact.add(truth, posterior_exact(model, w).pi_n);

        auto state = initial_posterior(model);
        for (std::size_t i = 1; i <= n; ++i) state = posterior_step(model, state, prefix[i - 1], prefix[i]);
        step.add(truth, state.pi_n);

        const PosteriorState oracle_state{truth, static_cast<std::int64_t>(n)};
        for (std::uint64_t k = 0; k <= static_cast<std::uint64_t>(model.window.d2) + 2; ++k) {
            const double expected =
                oracle_conditional(joint, prefix, ThetaInterval::at_most(static_cast<std::int64_t>(n + k)));
            within.add(expected, prob_change_within(model, oracle_state, k));
        }

        const double s = joint_density_S(model, w);
        density.add(joint.prefix_mass(prefix), s);
        level_mass[n] += s;

        double expectation = 0.0;
        for (State y = 0; y < model.num_states(); ++y) {
            const std::vector<State> pair{prefix.back(), y};
            const double g = g_kernel(model, Window(pair, static_cast<std::int64_t>(n)), state.pi_n);
            if (g > 0.0) expectation += g * posterior_step(model, state, prefix.back(), y).pi_n;
        }
        martingale.add(model.prior.q() + model.prior.p * state.pi_n, expectation);
    });
    for (double m : level_mass) normalization.add(1.0, m);
    for (auto* g : {&exact, &step, &within, &density, &normalization, &martingale}) gates.push_back(g->finish());

    if (horizon < 2) {
        for (const char* name : {"posterior_multistep", "prob_change_before_window", "factorization"}) {
            gates.push_back(Gate::skipped(name, "insufficient horizon for l-step identities (needs >= 2)"));
        }
    } else {
        Gate multi("posterior_multistep", tol), before("prob_change_before_window", tol),
            factor("factorization", tol);
        for_each_prefix(joint, [&](std::size_t n, std::size_t, const std::vector<State>& prefix) {
            const Window full(prefix);
            const double truth = oracle_pi(joint, prefix);
            const double s_full = joint_density_S(model, full);
            for (std::size_t l = 0; l < n; ++l) {
                const std::size_t origin = n - l - 1;
                const auto head = std::span<const State>(prefix).first(origin + 1);
                const Window tail = full.tail(l + 2);
                const PosteriorState oracle_origin{oracle_pi(joint, head), static_cast<std::int64_t>(origin)};
                multi.add(truth, posterior_multistep(model, oracle_origin, tail).pi_n);
                before.add(oracle_conditional(joint, prefix, ThetaInterval::at_most(static_cast<std::int64_t>(origin))),
                           prob_change_before_window(model, oracle_origin, tail));
                const double pi_origin = posterior_exact(model, Window(head)).pi_n;
                factor.add(s_full, joint_density_S(model, Window(head)) * g_kernel(model, tail, pi_origin));
            }
        });
        for (auto* g : {&multi, &before, &factor}) gates.push_back(g->finish());
    }

    const auto len = static_cast<std::size_t>(model.window.d1) + 2;
    if (horizon + 1 < len) {
        gates.push_back(Gate::skipped("payoff_h", "horizon shorter than one detection window"));
        gates.push_back(Gate::skipped("payoff_decomposition", "horizon shorter than one detection window"));
        gates.push_back(Gate::skipped("payoff_index_discrimination", "horizon shorter than one detection window"));
    } else {
        Gate payoff("payoff_h", tol), decomposition("payoff_decomposition", tol);
        for_each_prefix(joint, [&](std::size_t n, std::size_t, const std::vector<State>& prefix) {
            if (prefix.size() < len) return;
            const Window full(prefix);
            const Window window = full.tail(len);
            const double alpha = posterior_exact(model, full).pi_n;
            const double truth = oracle_conditional(joint, prefix, window_interval(model.window, n));
            const double h = window_payoff_h(model, window, alpha, options.payoff_indexing);
            payoff.add(truth, h);

            const auto origin = full.head(n - model.window.d1);
            const PosteriorState at_origin = posterior_exact(model, origin);
            const PosteriorState now{alpha, static_cast<std::int64_t>(n)};
            decomposition.add(window_payoff_h(model, window, alpha),
                              prob_change_within(model, now, static_cast<std::uint64_t>(model.window.d2)) -
                                  prob_change_before_window(model, at_origin, window));
        });
        payoff.note(fmt::format("index convention: {}", to_string(options.payoff_indexing)));
        gates.push_back(payoff.finish());
        gates.push_back(decomposition.finish());

        GateResult disc;
        disc.name = "payoff_index_discrimination";
        disc.tolerance = tol;
        std::size_t matching = 0;
        std::string note;
        for (auto indexing : {PayoffIndexing::kMatched, PayoffIndexing::kPowerLagged, PayoffIndexing::kLikelihoodLagged}) {
            const double err = payoff_gate_error(model, horizon, indexing);
            if (err < tol) ++matching;
            if (indexing == PayoffIndexing::kMatched) disc.max_abs_error = err;
            note += fmt::format("{}{}={:.3e}", note.empty() ? "" : " ", to_string(indexing), err);
        }
        disc.note = note;
        disc.checks = 3;
        disc.passed = matching == 1 && disc.max_abs_error < tol;
        gates.push_back(disc);
    }

    // Fixed-time rules before d1+1 against the clamped rule.
    if (horizon < len - 1) {
        gates.push_back(Gate::skipped("clamp_dominance", "horizon shorter than d1+1"));
    } else {
        GateResult dom;
        dom.name = "clamp_dominance";
        dom.tolerance = 1e-14;
        const double clamped = oracle_rule_value(joint, fixed_time_rule(model.window.d1 + 1));
        std::string note;
        for (int t = 0; t <= model.window.d1; ++t) {
            const double plain = oracle_rule_value(joint, fixed_time_rule(t));
            dom.max_abs_error = std::max(dom.max_abs_error, plain - clamped);
            ++dom.checks;
            note += fmt::format("{}tau={}:{:.6f}", note.empty() ? "" : " ", t, plain);
        }
        dom.note = fmt::format("clamped tau={}:{:.6f} vs {}", model.window.d1 + 1, clamped, note);
        dom.passed = dom.max_abs_error <= dom.tolerance;
        // With an atom at theta = 0 an early fixed rule can also catch theta = 0,
        // which the clamped rule never does, so dominance is not guaranteed.
        dom.gating = model.prior.pi == 0.0;
        if (!dom.gating) dom.note += " (prior atom at 0: informational)";
        gates.push_back(dom);
    }

    if (horizon < len - 1) {
        gates.push_back(Gate::skipped("optimality_envelope", "horizon shorter than d1+1"));
    } else {
        const auto truncated = oracle_optimal_value(model, horizon);
        const auto [table, diag] = solve_threshold(model, options.solver_tolerance);
        GateResult env;
        env.name = "optimality_envelope";
        env.tolerance = tol;
        env.checks = 2;
        const double lower = truncated.value.value_lower, upper = truncated.value.value_upper;
        double value = std::nan(""), restricted = std::nan("");
        if (diag.converged) {
            value = problem_value(model, table);
            const auto& t = table;
            restricted = oracle_rule_value(
                joint, forced_by([&](std::span<const State> p) { return Detector::crosses(model, t, p); }, horizon));
        }
        auto outside = [&](double v) { return std::isnan(v) ? INFINITY : std::max({0.0, lower - v, v - upper}); };
        env.max_abs_error = std::max(outside(value), outside(restricted));
        env.passed = diag.converged && env.max_abs_error <= tol;
        env.note = fmt::format("envelope [{:.10f}, {:.10f}] value={:.10f} restricted_rule={:.10f}", lower, upper,
                               value, restricted);
        env.gating = model.prior.pi == 0.0;
        if (!env.gating) env.note += " (prior atom at 0: informational)";
        gates.push_back(env);
    }

    {
        GateResult tail;
        tail.name = "window_probability_tail";
        tail.gating = false;
        tail.passed = true;
        const auto maxima = max_window_probability_by_time(joint);
        std::string note;
        for (double m : maxima) note += fmt::format("{}{:.4f}", note.empty() ? "" : " ", m);
        tail.note = "max_prefix P(window | prefix) by n: " + note;
        tail.checks = maxima.size();
        gates.push_back(tail);
    }
    return report;
}

void write_oracle_report(std::ostream& out, const OracleReport& report) {
    out << "{\n  \"horizon\": " << report.horizon << ",\n  \"all_passed\": "
        << (report.all_passed() ? "true" : "false") << ",\n  \"gates\": [";
    for (std::size_t i = 0; i < report.gates.size(); ++i) {
        const auto& g = report.gates[i];
        out << (i ? ",\n    " : "\n    ")
            << fmt::format("{{\"name\": \"{}\", \"max_abs_error\": {}, \"tolerance\": {}, \"passed\": {}, "
                           "\"gating\": {}, \"skipped\": {}, \"checks\": {}, \"note\": {}}}",
                           g.name, json_number(g.max_abs_error), json_number(g.tolerance),
                           g.passed ? "true" : "false", g.gating ? "true" : "false",
                           g.skipped ? "true" : "false", g.checks, json_string(g.note));
    }
    out << "\n  ]\n}\n";
}

std::string format_oracle_report(const OracleReport& report) {
    std::string out = fmt::format("oracle check, horizon {}\n", report.horizon);
    for (const auto& g : report.gates) {
        const char* verdict = g.skipped ? "SKIP" : (g.passed ? "PASS" : (g.gating ? "FAIL" : "INFO"));
        out += fmt::format("  {:<4} {:<28} max_abs_err={:<10.3e} tol={:<8.1e} checks={:<6} {}\n", verdict, g.name,
                           g.max_abs_error, g.tolerance, g.checks, g.note);
    }
    out += report.all_passed() ? "all gates passed\n" : "some gates FAILED\n";
    return out;
}

}  // namespace disorder
