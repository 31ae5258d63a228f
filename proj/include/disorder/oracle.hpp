#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "disorder/model.hpp"

namespace disorder {

/// Inclusive range lo <= theta <= hi; an unset `hi` means unbounded.
struct ThetaInterval {
    std::int64_t lo = 0;
    std::optional<std::int64_t> hi;

    static ThetaInterval at_most(std::int64_t hi) { return {0, hi}; }
    static ThetaInterval all() { return {0, std::nullopt}; }
};

/// Exact P(theta = j, X_0..X_n = prefix) for every prefix up to the horizon,
/// built by enumerating full paths with direct kernel products and summing
/// extensions out level by level. Change times are cells 0..N+1 plus one
/// aggregate cell for theta > N+1, which is split analytically when a
/// predicate cuts through it (given theta > N+1 every path law is the same).
class JointTable {
public:
    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_cells() const noexcept { return horizon_ + 3; }
    const DisorderModel& model() const noexcept { return model_; }

    double total_mass() const;
    /// P(theta in cell); the last cell is theta > N+1.
    std::vector<double> theta_marginal() const;

    /// P(X_0..X_n = prefix). Prefixes must start with x0; otherwise 0.
    double prefix_mass(std::span<const State> prefix) const;
    /// P(theta in interval, X_0..X_n = prefix).
    double joint_mass(std::span<const State> prefix, const ThetaInterval& interval) const;

    /// Number of prefixes of length n+1 (all start at x0).
    std::size_t level_size(std::size_t n) const noexcept { return levels_[n].size() / num_cells(); }
    /// The prefix of length n+1 with the given code over x_1..x_n.
    std::vector<State> prefix(std::size_t n, std::size_t code) const;

    double joint_mass_at(std::size_t n, std::size_t code, const ThetaInterval& interval) const;
    double prefix_mass_at(std::size_t n, std::size_t code) const;

private:
    friend JointTable enumerate_joint(const DisorderModel& model, std::size_t horizon);

    std::optional<std::size_t> code_of(std::span<const State> prefix) const;

    DisorderModel model_;
    std::size_t horizon_ = 0;
    std::size_t num_states_ = 0;
    // levels_[n][code * num_cells + cell]
    std::vector<std::vector<double>> levels_;
};

/// Throws BudgetError when s^N (N+3) cells exceed the memory budget.
JointTable enumerate_joint(const DisorderModel& model, std::size_t horizon);

/// P(theta in interval | X_0..X_n = prefix). Throws ImpossiblePathError on a
/// zero-mass prefix.
double oracle_conditional(const JointTable& joint, std::span<const State> prefix,
                          const ThetaInterval& interval);

/// Decision function on prefixes X_0..X_n: true means stop at n.
using StoppingRule = std::function<bool(std::span<const State> prefix)>;

/// Exact P(-d1 <= theta - tau <= d2) for `rule`. Paths on which the rule has
/// not stopped by the horizon count as failures.
double oracle_rule_value(const JointTable& joint, const StoppingRule& rule);

/// Fixed-time rule tau = t.
StoppingRule fixed_time_rule(std::int64_t t);

/// `rule`, forced to stop at the horizon at the latest.
StoppingRule forced_by(const StoppingRule& rule, std::size_t horizon);

struct TruncatedValue {
    std::size_t horizon = 0;
    /// Best success probability among rules that stop by the horizon.
    double value_lower = 0.0;
    /// value_lower plus the prior mass of change times that only a rule
    /// stopping after the horizon could catch: P(theta > N - d1).
    double value_upper = 0.0;
};

struct TruncatedSolution {
    TruncatedValue value;
    /// stop[n][code]: the optimal truncated rule stops at prefix (n, code).
    std::vector<std::vector<std::uint8_t>> stop;
    JointTable joint;

    /// The optimal truncated rule as a StoppingRule (borrows *this).
    StoppingRule rule() const;
};

/// Backward induction over the full prefix tree up to the horizon.
TruncatedSolution oracle_optimal_value(const DisorderModel& model, std::size_t horizon);

/// max over prefixes of length n+1 of P(-d1 <= theta - n <= d2 | prefix), n = 0..N.
std::vector<double> max_window_probability_by_time(const JointTable& joint);

}  // namespace disorder
