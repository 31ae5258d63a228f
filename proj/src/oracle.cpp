#include "disorder/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <omp.h>

#include "disorder/errors.hpp"

namespace disorder {

namespace {

std::size_t ipow(std::size_t base, std::size_t e) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < e; ++i) out *= base;
    return out;
}

ThetaInterval success_interval(const PrecisionWindow& window, std::int64_t n) {
    return {n - window.d1, n + window.d2};
}

}  // namespace

JointTable enumerate_joint(const DisorderModel& model, std::size_t horizon) {
    const std::size_t s = model.num_states();
    const std::size_t cells = horizon + 3;
    const double paths = std::pow(static_cast<double>(s), static_cast<double>(horizon));
    check_budget(2.0 * paths * static_cast<double>(cells) * sizeof(double), "joint enumeration");

    JointTable joint;
    joint.model_ = model;
    joint.horizon_ = horizon;
    joint.num_states_ = s;
    joint.levels_.resize(horizon + 1);

    const std::size_t leaves = ipow(s, horizon);
    auto& full = joint.levels_[horizon];
    full.assign(leaves * cells, 0.0);
    const double tail = prior_tail(model.prior, static_cast<std::int64_t>(horizon) + 1);

#pragma omp parallel for schedule(static)
    for (std::int64_t code = 0; code < static_cast<std::int64_t>(leaves); ++code) {
        std::vector<State> path(horizon + 1);
        path[0] = model.x0;
        auto rest = static_cast<std::size_t>(code);
        for (std::size_t i = horizon; i >= 1; --i) {
            path[i] = static_cast<State>(rest % s);
            rest /= s;
        }
        double* out = full.data() + static_cast<std::size_t>(code) * cells;
        for (std::size_t j = 0; j <= horizon + 1; ++j) {
            double prob = prior_pmf(model.prior, j);
            for (std::size_t r = 1; r <= horizon; ++r) {
                const auto& kernel = r >= j ? model.kernel1 : model.kernel0;
                prob *= kernel(path[r - 1], path[r]);
            }
            out[j] = prob;
        }
        double prob = tail;
        for (std::size_t r = 1; r <= horizon; ++r) prob *= model.kernel0(path[r - 1], path[r]);
        out[horizon + 2] = prob;
    }

    for (std::size_t n = horizon; n-- > 0;) {
        const auto& child = joint.levels_[n + 1];
        auto& level = joint.levels_[n];
        const std::size_t count = ipow(s, n);
        level.assign(count * cells, 0.0);
        for (std::size_t code = 0; code < count; ++code) {
            for (std::size_t y = 0; y < s; ++y) {
                const double* src = child.data() + (code * s + y) * cells;
                double* dst = level.data() + code * cells;
                for (std::size_t c = 0; c < cells; ++c) dst[c] += src[c];
            }
        }
    }
    return joint;
}

double JointTable::total_mass() const {
    double out = 0.0;
    for (double v : levels_[0]) out += v;
    return out;
}

std::vector<double> JointTable::theta_marginal() const {
    return {levels_[0].begin(), levels_[0].end()};
}

std::optional<std::size_t> JointTable::code_of(std::span<const State> prefix) const {
    if (prefix.empty() || prefix.size() > horizon_ + 1) {
        throw ContractError(fmt::format("prefix length {} outside 1..{}", prefix.size(), horizon_ + 1));
    }
    if (prefix[0] != model_.x0) return std::nullopt;
    std::size_t code = 0;
    for (std::size_t i = 1; i < prefix.size(); ++i) {
        if (prefix[i] >= num_states_) throw InputError(fmt::format("state index {} out of range", prefix[i]));
        code = code * num_states_ + prefix[i];
    }
    return code;
}

std::vector<State> JointTable::prefix(std::size_t n, std::size_t code) const {
    std::vector<State> out(n + 1);
    out[0] = model_.x0;
    for (std::size_t i = n; i >= 1; --i) {
        out[i] = static_cast<State>(code % num_states_);
        code /= num_states_;
    }
    return out;
}

double JointTable::prefix_mass_at(std::size_t n, std::size_t code) const {
    const double* row = levels_[n].data() + code * num_cells();
    double out = 0.0;
    for (std::size_t c = 0; c < num_cells(); ++c) out += row[c];
    return out;
}

double JointTable::joint_mass_at(std::size_t n, std::size_t code, const ThetaInterval& interval) const {
    const double* row = levels_[n].data() + code * num_cells();
    const auto last_exact = static_cast<std::int64_t>(horizon_) + 1;
    double out = 0.0;
    for (std::int64_t j = std::max<std::int64_t>(interval.lo, 0); j <= last_exact; ++j) {
        if (interval.hi && j > *interval.hi) break;
        out += row[j];
    }
    // Given theta > N+1, theta - (N+1) is geometric on {1,2,...} with success q.
    const std::int64_t from = std::max(interval.lo, last_exact + 1);
    if (!interval.hi || *interval.hi >= from) {
        const double p = model_.prior.p;
        double share = std::pow(p, static_cast<double>(from - last_exact - 1));
        if (interval.hi) share -= std::pow(p, static_cast<double>(*interval.hi - last_exact));
        out += row[num_cells() - 1] * share;
    }
    return out;
}

double JointTable::prefix_mass(std::span<const State> prefix) const {
    const auto code = code_of(prefix);
    return code ? prefix_mass_at(prefix.size() - 1, *code) : 0.0;
}

double JointTable::joint_mass(std::span<const State> prefix, const ThetaInterval& interval) const {
    const auto code = code_of(prefix);
    return code ? joint_mass_at(prefix.size() - 1, *code, interval) : 0.0;
}

double oracle_conditional(const JointTable& joint, std::span<const State> prefix,
                          const ThetaInterval& interval) {
    const double mass = joint.prefix_mass(prefix);
    if (!(mass > 0.0)) throw ImpossiblePathError("prefix has zero probability");
    return joint.joint_mass(prefix, interval) / mass;
}

double oracle_rule_value(const JointTable& joint, const StoppingRule& rule) {
    const auto& window = joint.model().window;
    const std::size_t s = joint.num_states();
    std::vector<State> prefix{joint.model().x0};

    std::function<double(std::size_t, std::size_t)> visit = [&](std::size_t n, std::size_t code) {
        if (!(joint.prefix_mass_at(n, code) > 0.0)) return 0.0;
        if (rule(prefix)) {
            return joint.joint_mass_at(n, code, success_interval(window, static_cast<std::int64_t>(n)));
        }
        if (n == joint.horizon()) return 0.0;
        double acc = 0.0;
        for (std::size_t y = 0; y < s; ++y) {
            prefix.push_back(static_cast<State>(y));
            acc += visit(n + 1, code * s + y);
            prefix.pop_back();
        }
        return acc;
    };
    return visit(0, 0);
}

StoppingRule fixed_time_rule(std::int64_t t) {
    return [t](std::span<const State> prefix) {
        return static_cast<std::int64_t>(prefix.size()) - 1 >= t;
    };
}

StoppingRule forced_by(const StoppingRule& rule, std::size_t horizon) {
    return [rule, horizon](std::span<const State> prefix) {
        return prefix.size() - 1 >= horizon || rule(prefix);
    };
}

TruncatedSolution oracle_optimal_value(const DisorderModel& model, std::size_t horizon) {
    TruncatedSolution sol{{}, {}, enumerate_joint(model, horizon)};
    const auto& joint = sol.joint;
    const std::size_t s = model.num_states();

    std::vector<double> next_values;
    sol.stop.resize(horizon + 1);
    for (std::size_t n = horizon + 1; n-- > 0;) {
        const std::size_t count = joint.level_size(n);
        std::vector<double> values(count);
        sol.stop[n].assign(count, 0);
        const auto interval = success_interval(model.window, static_cast<std::int64_t>(n));
        for (std::size_t code = 0; code < count; ++code) {
            const double stop_value = joint.joint_mass_at(n, code, interval);
            double continue_value = -1.0;
            if (n < horizon) {
                continue_value = 0.0;
                for (std::size_t y = 0; y < s; ++y) continue_value += next_values[code * s + y];
            }
            sol.stop[n][code] = stop_value >= continue_value;
            values[code] = std::max(stop_value, continue_value);
        }
        next_values = std::move(values);
    }
    sol.value.horizon = horizon;
    sol.value.value_lower = next_values[0];
    sol.value.value_upper = std::min(
        1.0, sol.value.value_lower +
                 prior_tail(model.prior, static_cast<std::int64_t>(horizon) - model.window.d1));
    return sol;
}

StoppingRule TruncatedSolution::rule() const {
    return [this](std::span<const State> prefix) {
        const std::size_t n = prefix.size() - 1;
        std::size_t code = 0;
        for (std::size_t i = 1; i < prefix.size(); ++i) code = code * joint.num_states() + prefix[i];
        return stop[n][code] != 0;
    };
}

std::vector<double> max_window_probability_by_time(const JointTable& joint) {
    std::vector<double> out(joint.horizon() + 1, 0.0);
    for (std::size_t n = 0; n <= joint.horizon(); ++n) {
        const auto interval = success_interval(joint.model().window, static_cast<std::int64_t>(n));
        for (std::size_t code = 0; code < joint.level_size(n); ++code) {
            const double mass = joint.prefix_mass_at(n, code);
            if (mass > 0.0) out[n] = std::max(out[n], joint.joint_mass_at(n, code, interval) / mass);
        }
    }
    return out;
}

}  // namespace disorder
