#include "disorder/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "disorder/errors.hpp"

namespace disorder {

MarkovKernel::MarkovKernel(const std::vector<std::vector<double>>& rows) : size_(rows.size()) {
    if (rows.empty()) throw InputError("transition matrix must have at least one row");
    probs_.reserve(size_ * size_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != size_) {
            throw InputError(fmt::format("transition matrix row {} has {} entries, expected {}", i,
                                         rows[i].size(), size_));
        }
        probs_.insert(probs_.end(), rows[i].begin(), rows[i].end());
    }
}

std::vector<std::vector<double>> MarkovKernel::rows() const {
    std::vector<std::vector<double>> out(size_);
    for (std::size_t i = 0; i < size_; ++i) {
        auto r = row(static_cast<State>(i));
        out[i].assign(r.begin(), r.end());
    }
    return out;
}

State DisorderModel::state_index(std::string_view label) const {
    auto it = std::find(states.begin(), states.end(), label);
    if (it == states.end()) throw InputError(fmt::format("unknown state label '{}'", label));
    return static_cast<State>(it - states.begin());
}

const std::string& DisorderModel::label(State s) const {
    if (s >= states.size()) throw InputError(fmt::format("state index {} out of range", s));
    return states[s];
}

namespace {

void check_kernel(const MarkovKernel& kernel, const char* name, std::size_t expected,
                  std::vector<std::string>& out) {
    if (kernel.size() != expected) {
        out.push_back(fmt::format("{} is {}x{} but there are {} states", name, kernel.size(),
                                  kernel.size(), expected));
        return;
    }
    for (std::size_t i = 0; i < kernel.size(); ++i) {
        double sum = 0.0;
        bool negative = false;
        for (double v : kernel.row(static_cast<State>(i))) {
            if (!(v >= 0.0) || !std::isfinite(v)) negative = true;
            sum += v;
        }
        if (negative) out.push_back(fmt::format("{} row {} has a negative or non-finite entry", name, i));
        if (!(std::abs(sum - 1.0) <= 1e-12)) out.push_back(fmt::format("{} row {} sums to {:.15g}", name, i, sum));
    }
}

}  // namespace

std::vector<std::string> validate_model(const DisorderModel& model) {
    std::vector<std::string> out;
    const auto& prior = model.prior;
    if (!(prior.pi >= 0.0 && prior.pi < 1.0)) out.emplace_back("pi must lie in [0,1)");
    if (!(prior.p > 0.0 && prior.p < 1.0)) out.emplace_back("p must lie in (0,1)");
    if (model.window.d1 < 0) out.emplace_back("d1 must be nonnegative");
    if (model.window.d2 < 0) out.emplace_back("d2 must be nonnegative");
    if (model.states.size() < 2) out.emplace_back("the state set needs at least 2 states");
    std::set<std::string> unique(model.states.begin(), model.states.end());
    if (unique.size() != model.states.size()) out.emplace_back("state labels must be distinct");
    check_kernel(model.kernel0, "kernel0", model.states.size(), out);
    check_kernel(model.kernel1, "kernel1", model.states.size(), out);
    if (model.x0 >= model.states.size()) out.emplace_back("x0 must be a member of the state set");
    return out;
}

std::uint64_t model_hash(const DisorderModel& model) {
    std::string canon = fmt::format("pi={:.17g};p={:.17g};d1={};d2={};x0={};states=", model.prior.pi,
                                    model.prior.p, model.window.d1, model.window.d2, model.x0);
    for (const auto& label : model.states) canon += fmt::format("{}:{},", label.size(), label);
    for (const auto* kernel : {&model.kernel0, &model.kernel1}) {
        canon += ";K=";
        for (std::size_t x = 0; x < kernel->size(); ++x) {
            for (double v : kernel->row(static_cast<State>(x))) canon += fmt::format("{:.17g},", v);
        }
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double prior_pmf(const PriorParams& prior, std::uint64_t j) {
    if (j == 0) return prior.pi;
    return (1.0 - prior.pi) * std::pow(prior.p, static_cast<double>(j - 1)) * prior.q();
}

double prior_tail(const PriorParams& prior, std::int64_t k) {
    if (k < 0) return 1.0;
    return (1.0 - prior.pi) * std::pow(prior.p, static_cast<double>(k));
}

std::uint64_t sample_theta(const PriorParams& prior, Rng& rng) {
    // One uniform decides the atom, a second one inverts the geometric tail:
    // P(theta >= k | theta >= 1) = p^(k-1) <=> U <= p^(k-1).
    if (rng.uniform() < prior.pi) return 0;
    const double u = rng.uniform_open_closed();
    const double k = std::floor(std::log(u) / std::log(prior.p));
    if (!(k < 1e18)) return static_cast<std::uint64_t>(1e18);
    return 1 + static_cast<std::uint64_t>(k);
}

State sample_next(const MarkovKernel& kernel, State from, Rng& rng) {
    const double u = rng.uniform();
    auto row = kernel.row(from);
    double acc = 0.0;
    State last_positive = 0;
    for (std::size_t y = 0; y < row.size(); ++y) {
        if (row[y] <= 0.0) continue;
        acc += row[y];
        last_positive = static_cast<State>(y);
        if (u < acc) return last_positive;
    }
    return last_positive;
}

Path sample_path(const DisorderModel& model, std::uint64_t theta, std::size_t n_steps, Rng& rng) {
    Path path;
    path.theta = theta;
    path.observations.reserve(n_steps + 1);
    path.observations.push_back(model.x0);
    for (std::size_t n = 1; n <= n_steps; ++n) {
        const auto& kernel = n >= theta ? model.kernel1 : model.kernel0;
        path.observations.push_back(sample_next(kernel, path.observations.back(), rng));
    }
    return path;
}

double transition_density(const DisorderModel& model, Regime regime, State x, State y) {
    const auto n = model.num_states();
    if (x >= n || y >= n) throw InputError(fmt::format("state index out of range ({}, {})", x, y));
    return model.kernel(regime)(x, y);
}

double transition_density(const DisorderModel& model, Regime regime, std::string_view x,
                          std::string_view y) {
    return transition_density(model, regime, model.state_index(x), model.state_index(y));
}

}  // namespace disorder
