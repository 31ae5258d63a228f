#pragma once

#include <cstdint>

#include "disorder/likelihood.hpp"
#include "disorder/model.hpp"

namespace disorder {

/// Pi_n = P(theta <= n | X_0..X_n), tagged with the time it refers to so that
/// window/posterior misalignment is caught instead of silently mixed up.
struct PosteriorState {
    double pi_n = 0.0;
    std::int64_t n = 0;
    /// Number of updates whose raw result fell outside [0,1] and was clamped.
    std::uint32_t clamp_events = 0;
};

/// Pi_0 = pi.
PosteriorState initial_posterior(const DisorderModel& model);

/// 1 - Pi_n = (1 - pi) p^n L_0 / S on a window starting at time 0.
PosteriorState posterior_exact(const DisorderModel& model, const Window& w);

/// One-step recursion Pi_{n+1} = f1 (q + p Pi_n) / G.
PosteriorState posterior_step(const DisorderModel& model, const PosteriorState& state, State x_n,
                              State x_next);

/// l-step recursion from Pi_{n-l-1} over the window x_{n-l-1..n}. The window
/// must start at state.n.
PosteriorState posterior_multistep(const DisorderModel& model, const PosteriorState& state,
                                   const Window& w);

/// P(theta <= n + k | F_n) = 1 - p^k (1 - Pi_n).
double prob_change_within(const DisorderModel& model, const PosteriorState& state, std::uint64_t k);

/// P(theta <= n - l - 1 | F_n) from Pi_{n-l-1} and the window x_{n-l-1..n}.
double prob_change_before_window(const DisorderModel& model, const PosteriorState& state,
                                 const Window& w);

/// Stopping payoff h(w, alpha) = g(w) (1 - alpha) on a window of length d1+2,
/// clamped to [0,1]. With alpha = Pi_n it is P(-d1 <= theta - n <= d2 | F_n).
double window_payoff_h(const DisorderModel& model, const Window& w, double alpha,
                       PayoffIndexing indexing = PayoffIndexing::kMatched);

}  // namespace disorder
