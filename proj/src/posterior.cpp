#include "disorder/posterior.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "disorder/errors.hpp"

namespace disorder {

namespace {

PosteriorState clamped(double raw, std::int64_t n, std::uint32_t events) {
    if (raw < 0.0 || raw > 1.0) {
        ++events;
        raw = std::clamp(raw, 0.0, 1.0);
    }
    return {raw, n, events};
}

void check_alignment(const PosteriorState& state, const Window& w) {
    if (state.n != w.start()) {
        throw ContractError(fmt::format("posterior refers to time {} but the window starts at {}",
                                        state.n, w.start()));
    }
    if (w.size() < 2) throw ContractError("window needs at least one transition");
}

void check_probability(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("posterior must lie in [0,1]");
}

// Mixture terms of G on a window of length l+2, with every likelihood scaled
// by exp(-shift) so long windows do not underflow. Ratios are unaffected.
struct ScaledMixture {
    double changed_before;  // L_{l+1}
    double changed_inside;  // q sum_{k=0}^{l} p^{l-k} L_{k+1}
    double unchanged;       // p^{l+1} L_0
};

ScaledMixture scaled_mixture(const DisorderModel& model, const Window& w) {
    const std::size_t l = w.size() - 2;
    auto log_l = log_L_all(model, w);
    const double shift = *std::max_element(log_l.begin(), log_l.end());
    if (!std::isfinite(shift)) throw ImpossiblePathError("window has zero probability under every change time");
    const double p = model.prior.p, q = model.prior.q();
    ScaledMixture m{std::exp(log_l[l + 1] - shift), 0.0,
                    std::pow(p, static_cast<double>(l + 1)) * std::exp(log_l[0] - shift)};
    for (std::size_t k = 0; k <= l; ++k) {
        m.changed_inside += std::pow(p, static_cast<double>(l - k)) * std::exp(log_l[k + 1] - shift);
    }
    m.changed_inside *= q;
    return m;
}

}  // namespace

PosteriorState initial_posterior(const DisorderModel& model) { return {model.prior.pi, 0, 0}; }

PosteriorState posterior_exact(const DisorderModel& model, const Window& w) {
    const double log_s = log_joint_density_S(model, w);
    if (log_s == -std::numeric_limits<double>::infinity()) {
        throw ImpossiblePathError("prefix has zero probability");
    }
    if (w.size() == 1) return initial_posterior(model);
    const auto n = static_cast<double>(w.transitions());
    const double log_unchanged =
        std::log1p(-model.prior.pi) + n * std::log(model.prior.p) + log_L(model, w, 0);
    return clamped(1.0 - std::exp(log_unchanged - log_s), w.end(), 0);
}

PosteriorState posterior_step(const DisorderModel& model, const PosteriorState& state, State x_n,
                              State x_next) {
    check_probability(state.pi_n);
    const double f0 = transition_density(model, Regime::kPre, x_n, x_next);
    const double f1 = transition_density(model, Regime::kPost, x_n, x_next);
    const double p = model.prior.p, q = model.prior.q();
    const double changed = (q + p * state.pi_n) * f1;
    const double g = p * (1.0 - state.pi_n) * f0 + changed;
    if (!(g > 0.0)) throw ImpossiblePathError("transition has zero predictive probability");
    return clamped(changed / g, state.n + 1, state.clamp_events);
}

PosteriorState posterior_multistep(const DisorderModel& model, const PosteriorState& state,
                                   const Window& w) {
    check_alignment(state, w);
    check_probability(state.pi_n);
    const double alpha = state.pi_n;
    const auto m = scaled_mixture(model, w);
    const double changed = alpha * m.changed_before + (1.0 - alpha) * m.changed_inside;
    const double g = changed + (1.0 - alpha) * m.unchanged;
    if (!(g > 0.0)) throw ImpossiblePathError("window has zero predictive probability");
    return clamped(changed / g, w.end(), state.clamp_events);
}

double prob_change_within(const DisorderModel& model, const PosteriorState& state, std::uint64_t k) {
    return 1.0 - std::pow(model.prior.p, static_cast<double>(k)) * (1.0 - state.pi_n);
}

double prob_change_before_window(const DisorderModel& model, const PosteriorState& state,
                                 const Window& w) {
    check_alignment(state, w);
    check_probability(state.pi_n);
    const double alpha = state.pi_n;
    const auto m = scaled_mixture(model, w);
    const double g = alpha * m.changed_before + (1.0 - alpha) * (m.changed_inside + m.unchanged);
    if (!(g > 0.0)) throw ImpossiblePathError("window has zero predictive probability");
    return std::clamp(alpha * m.changed_before / g, 0.0, 1.0);
}

double window_payoff_h(const DisorderModel& model, const Window& w, double alpha,
                       PayoffIndexing indexing) {
    check_probability(alpha);
    if (alpha == 1.0) return 0.0;
    const double g = detection_statistic_g(model, w, indexing);
    if (g == kSaturated) return 1.0;
    return std::clamp(g * (1.0 - alpha), 0.0, 1.0);
}

}  // namespace disorder
