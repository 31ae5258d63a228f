#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "disorder/rng.hpp"

namespace disorder {

/// Index of a state in the model's ordered state set.
using State = std::uint32_t;

/// Geometric prior on the change time with an atom at zero:
/// P(theta = 0) = pi, P(theta = j) = (1 - pi) p^(j-1) q for j >= 1.
struct PriorParams {
    double pi = 0.0;
    double p = 0.5;

    double q() const noexcept { return 1.0 - p; }
};

/// Row-stochastic transition matrix on a finite state set. Entry (x, y) is the
/// transition probability f_x(y); the reference measure is counting measure.
class MarkovKernel {
public:
    MarkovKernel() = default;

    /// Throws InputError unless `rows` is a non-empty square matrix.
    explicit MarkovKernel(const std::vector<std::vector<double>>& rows);

    std::size_t size() const noexcept { return size_; }
    double operator()(State from, State to) const noexcept { return probs_[from * size_ + to]; }
    std::span<const double> row(State from) const noexcept {
        return {probs_.data() + from * size_, size_};
    }
    std::vector<std::vector<double>> rows() const;

    bool operator==(const MarkovKernel&) const = default;

private:
    std::size_t size_ = 0;
    std::vector<double> probs_;
};

/// Allowed lateness d1 and earliness d2: stopping at tau succeeds when
/// -d1 <= theta - tau <= d2.
struct PrecisionWindow {
    int d1 = 0;
    int d2 = 0;
};

enum class Regime { kPre, kPost };

struct DisorderModel {
    PriorParams prior;
    MarkovKernel kernel0;  // pre-change
    MarkovKernel kernel1;  // post-change
    PrecisionWindow window;
    std::vector<std::string> states;
    State x0 = 0;

    std::size_t num_states() const noexcept { return states.size(); }
    const MarkovKernel& kernel(Regime r) const noexcept { return r == Regime::kPre ? kernel0 : kernel1; }

    /// Throws InputError for labels outside the state set.
    State state_index(std::string_view label) const;
    const std::string& label(State s) const;
};

/// A simulated disordered path: the sampled change time and X_0..X_N.
struct Path {
    std::uint64_t theta = 0;
    std::vector<State> observations;
};

/// Every violated invariant, each with a readable message. Empty iff valid.
std::vector<std::string> validate_model(const DisorderModel& model);

/// FNV-1a over a canonical rendering of every model field (numbers at 17
/// significant digits). Threshold tables record it to detect mismatches.
std::uint64_t model_hash(const DisorderModel& model);

double prior_pmf(const PriorParams& prior, std::uint64_t j);

/// P(theta > k).
double prior_tail(const PriorParams& prior, std::int64_t k);

std::uint64_t sample_theta(const PriorParams& prior, Rng& rng);

/// Draws from row `from` of `kernel` by inversion with a fixed summation order.
State sample_next(const MarkovKernel& kernel, State from, Rng& rng);

/// X_0 = x0; the transition into X_n uses kernel1 when n >= theta and kernel0
/// otherwise, so theta = 0 and theta = 1 give the same path law.
Path sample_path(const DisorderModel& model, std::uint64_t theta, std::size_t n_steps, Rng& rng);

/// f^0_x(y) or f^1_x(y). Throws InputError for states outside the model.
double transition_density(const DisorderModel& model, Regime regime, State x, State y);
double transition_density(const DisorderModel& model, Regime regime, std::string_view x,
                          std::string_view y);

}  // namespace disorder
