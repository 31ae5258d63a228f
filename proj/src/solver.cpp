#include "disorder/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <omp.h>

#include "disorder/errors.hpp"
#include "disorder/likelihood.hpp"

namespace disorder {

namespace {

std::size_t checked_power(std::size_t base, std::size_t exponent, const char* what) {
    const double approx = std::pow(static_cast<double>(base), static_cast<double>(exponent));
    check_budget(approx * sizeof(double), what);
    std::size_t out = 1;
    for (std::size_t i = 0; i < exponent; ++i) out *= base;
    return out;
}

std::vector<State> decode(std::size_t code, std::size_t base, std::size_t length) {
    std::vector<State> out(length);
    for (std::size_t i = length; i-- > 0;) {
        out[i] = static_cast<State>(code % base);
        code /= base;
    }
    return out;
}

ThresholdTable empty_table(const DisorderModel& model, std::size_t domain) {
    ThresholdTable t;
    t.num_states = model.num_states();
    t.d1 = model.window.d1;
    t.d2 = model.window.d2;
    t.model_hash = model_hash(model);
    t.values.assign(domain, 0.0);
    return t;
}

double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
    double out = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isinf(a[i]) || std::isinf(b[i])) continue;
        out = std::max(out, std::abs(a[i] - b[i]));
    }
    return out;
}

}  // namespace

std::size_t ThresholdTable::index(std::span<const State> tuple) const {
    if (tuple.size() != tuple_length()) {
        throw ContractError(fmt::format("threshold tuples have length {}, got {}", tuple_length(), tuple.size()));
    }
    std::size_t code = 0;
    for (State s : tuple) {
        if (s >= num_states) throw InputError(fmt::format("state index {} out of range", s));
        code = code * num_states + s;
    }
    return code;
}

std::vector<State> ThresholdTable::tuple(std::size_t index) const {
    return decode(index, num_states, tuple_length());
}

ThresholdOperator::ThresholdOperator(const DisorderModel& model)
    : num_states_(model.num_states()), p_(model.prior.p) {
    const auto len = static_cast<std::size_t>(model.window.d1) + 1;
    const std::size_t windows = checked_power(num_states_, len + 1, "statistic table");
    check_budget(static_cast<double>(windows + 3 * windows / num_states_) * sizeof(double),
                 "threshold solver");
    domain_size_ = windows / num_states_;

    kernel0_.resize(num_states_ * num_states_);
    for (std::size_t x = 0; x < num_states_; ++x)
        for (std::size_t y = 0; y < num_states_; ++y)
            kernel0_[x * num_states_ + y] = model.kernel0(static_cast<State>(x), static_cast<State>(y));

    statistics_.resize(windows);
    std::vector<State> buf;
    for (std::size_t code = 0; code < windows; ++code) {
        buf = decode(code, num_states_, len + 1);
        const auto log_l = log_L_all(model, Window(buf));
        if (log_l[0] == -std::numeric_limits<double>::infinity()) {
            statistics_[code] = kSaturated;  // never weighted by the sweep
        } else {
            statistics_[code] = detection_statistic_from_logs(model, log_l);
        }
    }
    saturated_.resize(domain_size_);
    for (std::size_t t = 0; t < domain_size_; ++t) {
        buf = decode(t, num_states_, len);
        saturated_[t] = log_L(model, Window(buf), 0) == -std::numeric_limits<double>::infinity();
    }
}

double ThresholdOperator::entry(std::span<const double> prev, std::size_t tuple) const {
    if (saturated_[tuple]) return kSaturated;
    const std::size_t last = tuple % num_states_;
    const double* row = kernel0_.data() + last * num_states_;
    double acc = 0.0;
    for (std::size_t y = 0; y < num_states_; ++y) {
        if (row[y] == 0.0) continue;
        const std::size_t window = tuple * num_states_ + y;
        acc += row[y] * std::max(statistics_[window], prev[window % domain_size_]);
    }
    return p_ * acc;
}

void ThresholdOperator::apply_serial(std::span<const double> prev, std::span<double> next) const {
    for (std::size_t t = 0; t < domain_size_; ++t) next[t] = entry(prev, t);
}

void ThresholdOperator::apply_parallel(std::span<const double> prev, std::span<double> next,
                                       int threads) const {
    const auto n = static_cast<std::int64_t>(domain_size_);
    const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
    for (std::int64_t t = 0; t < n; ++t) next[t] = entry(prev, static_cast<std::size_t>(t));
}

void ThresholdOperator::apply(std::span<const double> prev, std::span<double> next,
                              const SolveOptions& options) const {
    if (options.parallel) {
        apply_parallel(prev, next, options.threads);
    } else {
        apply_serial(prev, next);
    }
}

ThresholdTable r0_table(const DisorderModel& model) {
    const auto s = model.num_states();
    const auto len = static_cast<std::size_t>(model.window.d1) + 1;
    auto table = empty_table(model, checked_power(s, len, "threshold table"));
    const double p = model.prior.p, q = model.prior.q();
    const double base = 1.0 - std::pow(p, model.window.d2);

    std::vector<double> reach(s, 0.0);
    for (std::size_t x = 0; x < s; ++x)
        for (std::size_t y = 0; y < s; ++y)
            if (model.kernel0(static_cast<State>(x), static_cast<State>(y)) > 0.0)
                reach[x] += model.kernel1(static_cast<State>(x), static_cast<State>(y));

    for (std::size_t t = 0; t < table.values.size(); ++t) {
        const auto tuple = table.tuple(t);
        const auto log_l = log_L_all(model, Window(tuple));
        if (log_l[0] == -std::numeric_limits<double>::infinity()) {
            table.values[t] = kSaturated;
            continue;
        }
        double sum = 0.0;
        for (std::size_t m = 1; m <= len; ++m) {
            sum += std::exp(log_l[m - 1] - log_l[0] - static_cast<double>(m) * std::log(p));
        }
        table.values[t] = p * (base + q * reach[tuple.back()] * sum);
    }
    return table;
}

ThresholdTable iterate_threshold(const DisorderModel& model, const ThresholdTable& prev,
                                 const SolveOptions& options) {
    check_table_matches(model, prev);
    ThresholdOperator op(model);
    auto next = prev;
    op.apply(prev.values, next.values, options);
    next.iteration = prev.iteration + 1;
    next.sup_delta = sup_abs_diff(prev.values, next.values);
    next.converged = false;
    return next;
}

std::pair<ThresholdTable, SolveDiagnostics> solve_threshold(const DisorderModel& model,
                                                            double tolerance,
                                                            std::int64_t max_iterations,
                                                            const SolveOptions& options) {
    if (!(tolerance > 0.0)) throw ContractError("tolerance must be positive");
    ThresholdOperator op(model);
    auto table = empty_table(model, op.domain_size());
    table.tolerance = tolerance;

    // r_0 = T h is one sweep from the zero table, since g >= 0.
    std::vector<double> zeros(op.domain_size(), 0.0);
    op.apply(zeros, table.values, options);

    SolveDiagnostics diag;
    diag.tolerance = tolerance;
    std::vector<double> next(op.domain_size());
    for (std::int64_t k = 1; k <= max_iterations; ++k) {
        op.apply(table.values, next, options);
        for (std::size_t i = 0; i < next.size(); ++i) {
            if (next[i] < table.values[i]) diag.monotone = false;
        }
        const double delta = sup_abs_diff(table.values, next);
        diag.sup_delta_history.push_back(delta);
        table.values.swap(next);
        table.iteration = k;
        table.sup_delta = delta;
        if (delta < tolerance) {
            table.converged = true;
            break;
        }
    }
    diag.iterations = table.iteration;
    diag.converged = table.converged;
    return {std::move(table), std::move(diag)};
}

double fixed_point_residual(const DisorderModel& model, const ThresholdTable& table) {
    check_table_matches(model, table);
    ThresholdOperator op(model);
    std::vector<double> next(table.values.size());
    op.apply_serial(table.values, next);
    return sup_abs_diff(table.values, next);
}

double problem_value(const DisorderModel& model, const ThresholdTable& r_star) {
    check_table_matches(model, r_star);
    if (!r_star.converged) throw ContractError("problem value needs a converged threshold table");
    const std::size_t len = r_star.tuple_length();
    std::vector<State> window(len + 1);
    window[0] = model.x0;
    double acc = 0.0;
    for (std::size_t t = 0; t < r_star.values.size(); ++t) {
        const auto tuple = r_star.tuple(t);
        std::copy(tuple.begin(), tuple.end(), window.begin() + 1);
        const Window w(window);
        const double l0 = std::exp(log_L(model, w, 0));
        if (l0 == 0.0) continue;
        acc += std::max(detection_statistic_g(model, w), r_star.values[t]) * l0;
    }
    return prior_tail(model.prior, model.window.d1 + 1) * acc;
}

void check_table_matches(const DisorderModel& model, const ThresholdTable& table) {
    if (table.num_states != model.num_states() || table.d1 != model.window.d1 ||
        table.d2 != model.window.d2) {
        throw ConfigError(fmt::format("threshold table (s={}, d1={}, d2={}) does not fit the model "
                                      "(s={}, d1={}, d2={})",
                                      table.num_states, table.d1, table.d2, model.num_states(),
                                      model.window.d1, model.window.d2));
    }
    if (table.model_hash != model_hash(model)) {
        throw ConfigError(fmt::format("threshold table was built for model {:016x}, not {:016x}",
                                      table.model_hash, model_hash(model)));
    }
    std::size_t expected = 1;
    for (std::size_t i = 0; i < table.tuple_length(); ++i) expected *= model.num_states();
    if (table.values.size() != expected) throw ConfigError("threshold table has the wrong number of entries");
}

}  // namespace disorder
