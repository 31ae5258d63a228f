#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "disorder/model.hpp"
#include "disorder/posterior.hpp"
#include "disorder/solver.hpp"

namespace disorder {

enum class Decision { kContinue, kStop };

struct TraceRecord {
    std::int64_t n = 0;
    std::optional<double> g;       // unset before the window is full
    std::optional<double> r_star;  // unset before the window is full
    double pi_n = 0.0;
};

/// Online form of the optimal rule: stop at the first n >= d1+1 with
/// g(X_{n-d1-1..n}) >= r*(X_{n-d1..n}).
///
/// Keeps a ring of the last d1+2 observations and Pi_n via the one-step
/// recursion. The model and table are borrowed and must outlive the detector.
class Detector {
public:
    /// Throws ConfigError when the table was not built for the model.
    Detector(const DisorderModel& model, const ThresholdTable& r_star, bool record_trace = false);

    /// Throws ContractError after a stop or when the first observation is not
    /// x0, and InputError for states outside the model.
    Decision push(State x);

    std::int64_t time() const noexcept { return n_; }
    std::optional<std::int64_t> stopped_at() const noexcept { return stopped_at_; }
    const PosteriorState& posterior() const noexcept { return posterior_; }
    const std::vector<TraceRecord>& trace() const noexcept { return trace_; }

    /// Whether the rule's inequality holds at the last time of `prefix`
    /// (a full path from time 0). False while the window is not yet full.
    static bool crosses(const DisorderModel& model, const ThresholdTable& r_star,
                        std::span<const State> prefix);

private:
    const DisorderModel* model_;
    const ThresholdTable* table_;
    bool record_trace_;
    std::vector<State> ring_;
    std::size_t head_ = 0;
    std::int64_t n_ = -1;
    std::optional<std::int64_t> stopped_at_;
    PosteriorState posterior_;
    std::vector<TraceRecord> trace_;
    std::vector<State> scratch_;
};

struct DetectionReport {
    std::optional<std::int64_t> stop_time;
    bool undecided = true;
    /// Set in simulation mode, when the true change time is known.
    std::optional<bool> success;
    std::optional<std::uint64_t> theta;
    std::int64_t observations = 0;
    std::vector<TraceRecord> trace;
};

/// -d1 <= theta - tau <= d2.
bool is_success(const PrecisionWindow& window, std::uint64_t theta, std::int64_t tau);

/// Feeds `observations` (starting with x0) through a fresh detector.
DetectionReport run_to_decision(const DisorderModel& model, const ThresholdTable& r_star,
                                std::span<const State> observations,
                                std::optional<std::uint64_t> theta = std::nullopt,
                                bool record_trace = false);

}  // namespace disorder
