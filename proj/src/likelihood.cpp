#include "disorder/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "disorder/errors.hpp"

namespace disorder {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

double log_sum_exp(std::span<const double> terms) {
    double hi = kNegInf;
    for (double t : terms) hi = std::max(hi, t);
    if (hi == kNegInf) return kNegInf;
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - hi);
    return hi + std::log(sum);
}

}  // namespace

Window::Window(std::span<const State> states, std::int64_t start) : states_(states), start_(start) {
    if (states_.empty()) throw ContractError("a window holds at least one observation");
}

Window Window::tail(std::size_t count) const {
    if (count == 0 || count > size()) throw ContractError("window tail length out of range");
    return Window(states_.last(count), end() - static_cast<std::int64_t>(count) + 1);
}

Window Window::head(std::size_t count) const {
    if (count == 0 || count > size()) throw ContractError("window head length out of range");
    return Window(states_.first(count), start_);
}

std::vector<double> log_L_all(const DisorderModel& model, const Window& w) {
    // Each entry is summed in time order, like log_L, so equal kernels give
    // bitwise equal products.
    const std::size_t t = w.transitions();
    std::vector<double> pre(t + 1), post(t + 1);
    for (std::size_t r = 1; r <= t; ++r) {
        pre[r] = safe_log(model.kernel0(w[r - 1], w[r]));
        post[r] = safe_log(model.kernel1(w[r - 1], w[r]));
    }
    std::vector<double> out(t + 1, 0.0);
    for (std::size_t m = 0; m <= t; ++m) {
        double acc = 0.0;
        for (std::size_t r = 1; r <= t; ++r) acc += r + m > t ? post[r] : pre[r];
        out[m] = acc;
    }
    return out;
}

double log_L(const DisorderModel& model, const Window& w, std::size_t m) {
    if (m > w.transitions()) {
        throw ContractError(fmt::format("L_{} needs at least {} transitions, window has {}", m, m,
                                        w.transitions()));
    }
    double acc = 0.0;
    const std::size_t t = w.transitions();
    for (std::size_t r = 1; r <= t; ++r) {
        const auto& kernel = r + m > t ? model.kernel1 : model.kernel0;
        acc += safe_log(kernel(w[r - 1], w[r]));
    }
    return acc;
}

double log_joint_density_S(const DisorderModel& model, const Window& w) {
    if (w.start() != 0 || w[0] != model.x0) {
        throw ContractError("joint density needs a window that starts at time 0 in x0");
    }
    const auto n = w.transitions();
    const auto log_l = log_L_all(model, w);
    const double p = model.prior.p, q = model.prior.q(), pi = model.prior.pi;
    std::vector<double> terms;
    terms.reserve(n + 2);
    terms.push_back(safe_log(pi) + log_l[n]);
    const double log_rest = safe_log(1.0 - pi);
    for (std::size_t i = 1; i <= n; ++i) {
        terms.push_back(log_rest + static_cast<double>(i - 1) * std::log(p) + std::log(q) + log_l[n - i + 1]);
    }
    terms.push_back(log_rest + static_cast<double>(n) * std::log(p) + log_l[0]);
    return log_sum_exp(terms);
}

double joint_density_S(const DisorderModel& model, const Window& w) {
    return std::exp(log_joint_density_S(model, w));
}

double g_kernel(const DisorderModel& model, const Window& w, double alpha) {
    if (w.size() < 2) throw ContractError("G needs a window with at least one transition");
    const std::size_t l = w.size() - 2;
    const auto log_l = log_L_all(model, w);
    const double p = model.prior.p, q = model.prior.q();
    double mix = std::pow(p, static_cast<double>(l + 1)) * std::exp(log_l[0]);
    for (std::size_t i = 0; i <= l; ++i) {
        mix += std::pow(p, static_cast<double>(l - i)) * q * std::exp(log_l[i + 1]);
    }
    return alpha * std::exp(log_l[l + 1]) + (1.0 - alpha) * mix;
}

const char* to_string(PayoffIndexing indexing) {
    switch (indexing) {
        case PayoffIndexing::kMatched: return "matched";
        case PayoffIndexing::kPowerLagged: return "power-lagged";
        case PayoffIndexing::kLikelihoodLagged: return "likelihood-lagged";
    }
    return "unknown";
}

double detection_statistic_from_logs(const DisorderModel& model, std::span<const double> log_l,
                                     PayoffIndexing indexing) {
    const int d1 = model.window.d1;
    if (log_l.size() != static_cast<std::size_t>(d1) + 2) {
        throw ContractError(fmt::format("statistic needs a window of length d1+2 = {}", d1 + 2));
    }
    const double p = model.prior.p, q = model.prior.q();
    const double base = 1.0 - std::pow(p, model.window.d2);
    const double log_p = std::log(p);

    // (likelihood index, power of p) pairs for the chosen convention.
    auto term_index = [&](int k) -> std::pair<int, int> {
        switch (indexing) {
            case PayoffIndexing::kPowerLagged: return {k + 1, k};
            case PayoffIndexing::kLikelihoodLagged: return {k, k};
            case PayoffIndexing::kMatched: break;
        }
        return {k + 1, k + 1};
    };

    if (log_l[0] == kNegInf) {
        if (std::all_of(log_l.begin(), log_l.end(), [](double v) { return v == kNegInf; })) {
            throw ImpossiblePathError("window has zero probability under every change time");
        }
        return kSaturated;
    }
    double sum = 0.0;
    for (int k = 0; k <= d1; ++k) {
        const auto [li, power] = term_index(k);
        sum += std::exp(log_l[li] - log_l[0] - power * log_p);
    }
    return base + q * sum;
}

double detection_statistic_g(const DisorderModel& model, const Window& w, PayoffIndexing indexing) {
    if (w.size() != static_cast<std::size_t>(model.window.d1) + 2) {
        throw ContractError(fmt::format("statistic needs a window of length d1+2 = {}, got {}",
                                        model.window.d1 + 2, w.size()));
    }
    return detection_statistic_from_logs(model, log_L_all(model, w), indexing);
}

}  // namespace disorder
