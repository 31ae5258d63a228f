#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "disorder/model.hpp"

namespace disorder {

/// Value of the detection statistic when the window is impossible before the
/// change but possible after it: the change has certainly happened.
inline constexpr double kSaturated = std::numeric_limits<double>::infinity();

/// Contiguous observations x_k..x_n, addressed by absolute time.
class Window {
public:
    /// Throws ContractError on an empty span. The span is not copied.
    Window(std::span<const State> states, std::int64_t start = 0);

    std::int64_t start() const noexcept { return start_; }
    std::int64_t end() const noexcept { return start_ + static_cast<std::int64_t>(states_.size()) - 1; }
    std::size_t size() const noexcept { return states_.size(); }
    std::size_t transitions() const noexcept { return states_.size() - 1; }
    State operator[](std::size_t i) const noexcept { return states_[i]; }
    State back() const noexcept { return states_.back(); }
    std::span<const State> states() const noexcept { return states_; }

    /// The trailing `count` observations, keeping absolute positions.
    Window tail(std::size_t count) const;
    /// The leading `count` observations.
    Window head(std::size_t count) const;

private:
    std::span<const State> states_;
    std::int64_t start_;
};

/// log L_m(w): the last m transitions follow kernel1, the earlier ones kernel0.
/// Empty products contribute 0. Throws ContractError unless m <= w.transitions().
double log_L(const DisorderModel& model, const Window& w, std::size_t m);

/// log L_m(w) for m = 0..w.transitions(), each equal to log_L(w, m).
std::vector<double> log_L_all(const DisorderModel& model, const Window& w);

/// Joint probability S of a window observed from time 0 (w[0] must be x0).
double joint_density_S(const DisorderModel& model, const Window& w);
double log_joint_density_S(const DisorderModel& model, const Window& w);

/// G(w, alpha) for a window of length l+2: predictive probability of the last
/// l+1 transitions given posterior alpha at the window's first time.
double g_kernel(const DisorderModel& model, const Window& w, double alpha);

/// Index conventions for the window sum in the stopping statistic. kMatched is
/// sum_{m=1}^{d1+1} L_m / (p^m L_0), the one that reproduces the conditional
/// window probability. The others are kept so the verification harness can
/// show that they do not.
enum class PayoffIndexing {
    kMatched,          // sum_{m=1}^{d1+1} L_m     / (p^m L_0)
    kPowerLagged,      // sum_{m=0}^{d1}   L_{m+1} / (p^m L_0)
    kLikelihoodLagged  // sum_{m=0}^{d1}   L_m     / (p^m L_0)
};

const char* to_string(PayoffIndexing indexing);

/// 1 - p^{d2} + q * sum over the window of likelihood ratios, on a window of
/// length d1+2. Returns kSaturated when L_0 = 0 but some L_m > 0 and throws
/// ImpossiblePathError when every L_m vanishes.
double detection_statistic_g(const DisorderModel& model, const Window& w,
                             PayoffIndexing indexing = PayoffIndexing::kMatched);

/// Same statistic from precomputed log L_0..log L_{d1+1}.
double detection_statistic_from_logs(const DisorderModel& model, std::span<const double> log_l,
                                     PayoffIndexing indexing = PayoffIndexing::kMatched);

}  // namespace disorder
