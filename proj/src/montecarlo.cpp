#include "disorder/montecarlo.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <omp.h>

#include "disorder/errors.hpp"
#include "disorder/posterior.hpp"

namespace disorder {

namespace {

struct Replication {
    ReplicationRecord record;
    std::optional<DetectionReport> trace;
};

Replication run_replication(const DisorderModel& model, const ThresholdTable& r_star,
                            std::uint64_t seed, std::size_t rep, std::size_t horizon, bool keep_trace) {
    auto rng = Rng::stream(seed, rep);
    const auto theta = sample_theta(model.prior, rng);
    const auto path = sample_path(model, theta, horizon, rng);
    auto report = run_to_decision(model, r_star, path.observations, theta, keep_trace);
    Replication out;
    out.record = {rep, theta, report.stop_time, report.success.value_or(false), report.undecided};
    if (keep_trace) out.trace = std::move(report);
    return out;
}

template <typename Body>
void for_each_replication(std::size_t count, bool parallel, int threads, Body&& body) {
    if (!parallel) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 256) num_threads(team)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) body(static_cast<std::size_t>(i));
}

std::optional<double> nonzero(double v) {
    if (v > 0.0) return v;
    return std::nullopt;
}

}  // namespace

std::size_t default_horizon(const DisorderModel& model) {
    std::size_t h = static_cast<std::size_t>(model.window.d2);
    while (prior_tail(model.prior, static_cast<std::int64_t>(h) - model.window.d2) >= 1e-6) ++h;
    return h + 64 * (static_cast<std::size_t>(model.window.d1) + 1);
}

ExperimentResult estimate_success(const DisorderModel& model, const ThresholdTable& r_star,
                                  const ExperimentConfig& config) {
    check_table_matches(model, r_star);
    if (!r_star.converged) throw ContractError("simulation needs a converged threshold table");
    if (config.replications == 0) throw ContractError("replications must be positive");

    ExperimentResult result;
    result.replications = config.replications;
    result.seed = config.seed;
    result.horizon = config.horizon > 0 ? config.horizon : default_horizon(model);
    result.theoretical_value = problem_value(model, r_star);

    std::vector<Replication> reps(config.replications);
    for_each_replication(config.replications, config.parallel, config.threads, [&](std::size_t i) {
        reps[i] = run_replication(model, r_star, config.seed, i, result.horizon, i < config.record_traces);
    });

    std::size_t successes = 0;
    result.records.reserve(reps.size());
    for (auto& r : reps) {
        successes += r.record.success;
        result.undecided_count += r.record.undecided;
        result.records.push_back(r.record);
        if (r.trace) result.traces.push_back(std::move(*r.trace));
    }
    const auto n = static_cast<double>(config.replications);
    result.success_rate = static_cast<double>(successes) / n;
    result.standard_error = nonzero(std::sqrt(result.success_rate * (1.0 - result.success_rate) / n));
    if (result.standard_error) {
        result.z_score = (result.success_rate - result.theoretical_value) / *result.standard_error;
    }
    return result;
}

void write_replications_csv(std::ostream& out, const ExperimentResult& result) {
    out << "rep,theta,tau,success,undecided\n";
    for (const auto& r : result.records) {
        out << r.rep << ',' << r.theta << ',';
        if (r.tau) out << *r.tau;
        out << ',' << (r.success ? 1 : 0) << ',' << (r.undecided ? 1 : 0) << '\n';
    }
}

NamedRule optimal_rule(const DisorderModel& model, const ThresholdTable& r_star) {
    return {"optimal", [&model, &r_star](std::span<const State> path) {
                return run_to_decision(model, r_star, path).stop_time;
            }};
}

NamedRule fixed_time_baseline(std::int64_t t) {
    return {fmt::format("fixed_{}", t), [t](std::span<const State> path) -> std::optional<std::int64_t> {
                if (t < static_cast<std::int64_t>(path.size())) return t;
                return std::nullopt;
            }};
}

NamedRule posterior_threshold_baseline(const DisorderModel& model, double level) {
    return {fmt::format("posterior_{:.3g}", level),
            [&model, level](std::span<const State> path) -> std::optional<std::int64_t> {
                auto state = initial_posterior(model);
                if (state.pi_n >= level) return 0;
                for (std::size_t n = 1; n < path.size(); ++n) {
                    state = posterior_step(model, state, path[n - 1], path[n]);
                    if (state.pi_n >= level) return static_cast<std::int64_t>(n);
                }
                return std::nullopt;
            }};
}

std::vector<RuleComparisonRow> compare_rules(const DisorderModel& model, const ThresholdTable& r_star,
                                             const ExperimentConfig& config,
                                             const std::vector<NamedRule>& rules) {
    check_table_matches(model, r_star);
    if (config.replications == 0) throw ContractError("replications must be positive");
    std::vector<NamedRule> all{optimal_rule(model, r_star)};
    all.insert(all.end(), rules.begin(), rules.end());
    const std::size_t horizon = config.horizon > 0 ? config.horizon : default_horizon(model);

    // success[i * k + j]: rule j on replication i.
    const std::size_t k = all.size();
    std::vector<std::uint8_t> success(config.replications * k, 0);
    for_each_replication(config.replications, config.parallel, config.threads, [&](std::size_t i) {
        auto rng = Rng::stream(config.seed, i);
        const auto theta = sample_theta(model.prior, rng);
        const auto path = sample_path(model, theta, horizon, rng);
        for (std::size_t j = 0; j < k; ++j) {
            const auto tau = all[j].rule(path.observations);
            success[i * k + j] = tau && is_success(model.window, theta, *tau);
        }
    });

    const auto n = static_cast<double>(config.replications);
    std::vector<RuleComparisonRow> rows;
    for (std::size_t j = 0; j < k; ++j) {
        double sum = 0.0, diff_sum = 0.0, diff_sq = 0.0;
        for (std::size_t i = 0; i < config.replications; ++i) {
            const double s = success[i * k + j];
            const double d = s - success[i * k];
            sum += s;
            diff_sum += d;
            diff_sq += d * d;
        }
        RuleComparisonRow row;
        row.name = all[j].name;
        row.success_rate = sum / n;
        row.standard_error = std::sqrt(row.success_rate * (1.0 - row.success_rate) / n);
        row.paired_difference = diff_sum / n;
        const double var = n > 1 ? (diff_sq - n * row.paired_difference * row.paired_difference) / (n - 1) : 0.0;
        row.paired_standard_error = std::sqrt(std::max(var, 0.0) / n);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace disorder
