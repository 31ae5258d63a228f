#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "disorder/detector.hpp"
#include "disorder/model.hpp"
#include "disorder/solver.hpp"

namespace disorder {

struct ExperimentConfig {
    std::size_t replications = 100000;
    std::uint64_t seed = 1;
    /// Path length per replication; 0 picks default_horizon(model).
    std::size_t horizon = 0;
    /// Keep full detector traces for the first k replications.
    std::size_t record_traces = 0;
    bool parallel = true;
    int threads = 0;
};

struct ReplicationRecord {
    std::size_t rep = 0;
    std::uint64_t theta = 0;
    std::optional<std::int64_t> tau;
    bool success = false;
    bool undecided = false;
};

struct ExperimentResult {
    double success_rate = 0.0;
    /// sqrt(rate (1 - rate) / replications); unset when it is zero.
    std::optional<double> standard_error;
    std::size_t undecided_count = 0;
    double theoretical_value = 0.0;
    std::optional<double> z_score;
    std::size_t replications = 0;
    std::size_t horizon = 0;
    std::uint64_t seed = 0;
    std::vector<ReplicationRecord> records;
    std::vector<DetectionReport> traces;
};

/// Smallest horizon with P(theta > horizon - d2) < 1e-6, plus a margin of
/// 64 (d1 + 1) steps so the detector has room to stop after late changes.
std::size_t default_horizon(const DisorderModel& model);

/// Replication `rep` draws theta and then the path from substream (seed, rep),
/// so results do not depend on the thread count or on scheduling.
ExperimentResult estimate_success(const DisorderModel& model, const ThresholdTable& r_star,
                                  const ExperimentConfig& config);

/// Writes `rep,theta,tau,success,undecided`; tau is empty when undecided.
void write_replications_csv(std::ostream& out, const ExperimentResult& result);

/// A stopping rule evaluated on a whole path; it may only look at X_0..X_n
/// to decide about n. Returns the stop time or nothing if it never stops.
using PathRule = std::function<std::optional<std::int64_t>(std::span<const State> path)>;

struct NamedRule {
    std::string name;
    PathRule rule;
};

NamedRule optimal_rule(const DisorderModel& model, const ThresholdTable& r_star);
NamedRule fixed_time_baseline(std::int64_t t);
/// Stop at the first n with Pi_n >= level.
NamedRule posterior_threshold_baseline(const DisorderModel& model, double level);

struct RuleComparisonRow {
    std::string name;
    double success_rate = 0.0;
    double standard_error = 0.0;
    /// Mean of (this rule's success - optimal rule's success) over shared paths.
    double paired_difference = 0.0;
    double paired_standard_error = 0.0;
};

/// Common-random-numbers comparison: every rule sees the same simulated paths.
/// Row 0 is always the optimal rule.
std::vector<RuleComparisonRow> compare_rules(const DisorderModel& model, const ThresholdTable& r_star,
                                             const ExperimentConfig& config,
                                             const std::vector<NamedRule>& rules);

}  // namespace disorder
