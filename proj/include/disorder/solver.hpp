#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "disorder/model.hpp"

namespace disorder {

/// r(w) over every state tuple w of length d1+1, stored densely in mixed radix
/// with the first element most significant. Entries whose tuple is impossible
/// before the change hold kSaturated.
struct ThresholdTable {
    std::size_t num_states = 0;
    int d1 = 0;
    int d2 = 0;
    std::uint64_t model_hash = 0;
    std::vector<double> values;
    std::int64_t iteration = 0;
    bool converged = false;
    double sup_delta = 0.0;
    double tolerance = 0.0;

    std::size_t tuple_length() const noexcept { return static_cast<std::size_t>(d1) + 1; }
    std::size_t index(std::span<const State> tuple) const;
    std::vector<State> tuple(std::size_t index) const;
    double at(std::span<const State> tuple) const { return values[index(tuple)]; }
};

struct SolveDiagnostics {
    std::int64_t iterations = 0;
    std::vector<double> sup_delta_history;
    bool converged = false;
    double tolerance = 0.0;
    /// False if any sweep decreased an entry.
    bool monotone = true;
};

struct SolveOptions {
    bool parallel = true;
    /// OpenMP team size; 0 uses the runtime default.
    int threads = 0;
};

/// The Q-operator sweep r_k = p sum_y f0(w_last, y) max{g(w y), r_{k-1}(shift(w y))}
/// with every statistic g precomputed. Each entry is an independent fixed-order
/// sum, so the serial and parallel kernels agree bit for bit.
class ThresholdOperator {
public:
    /// Throws BudgetError when s^{d1+2} statistics do not fit the memory budget.
    explicit ThresholdOperator(const DisorderModel& model);

    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t domain_size() const noexcept { return domain_size_; }
    /// g over every window of length d1+2 (window code = tuple code * s + next state).
    std::span<const double> statistics() const noexcept { return statistics_; }

    void apply_serial(std::span<const double> prev, std::span<double> next) const;
    void apply_parallel(std::span<const double> prev, std::span<double> next, int threads = 0) const;
    void apply(std::span<const double> prev, std::span<double> next, const SolveOptions& options) const;

private:
    double entry(std::span<const double> prev, std::size_t tuple) const;

    std::size_t num_states_;
    std::size_t domain_size_;
    double p_;
    std::vector<double> statistics_;
    std::vector<double> kernel0_;
    std::vector<std::uint8_t> saturated_;
};

/// r_0 in closed form: p [1 - p^{d2} + q sum_{m=1}^{d1+1} c(w_last) L_{m-1}(w) / (p^m L_0(w))]
/// with c(x) the kernel1 mass on states reachable under kernel0 from x (1 when
/// kernel1 is absolutely continuous with respect to kernel0).
ThresholdTable r0_table(const DisorderModel& model);

/// One Q-sweep applied to `prev`.
ThresholdTable iterate_threshold(const DisorderModel& model, const ThresholdTable& prev,
                                 const SolveOptions& options = {});

/// Value iteration from r_0 until the sup-norm change drops below `tolerance`
/// or `max_iterations` sweeps have run.
std::pair<ThresholdTable, SolveDiagnostics> solve_threshold(const DisorderModel& model,
                                                            double tolerance = 1e-10,
                                                            std::int64_t max_iterations = 100000,
                                                            const SolveOptions& options = {});

/// sup_w |Q(r)(w) - r(w)| over finite entries.
double fixed_point_residual(const DisorderModel& model, const ThresholdTable& table);

/// Maximal success probability: (1-pi) p^{d1+1} sum_t max{g(x0 t), r*(t)} L_0(x0 t).
/// Throws ContractError for a table that has not converged.
double problem_value(const DisorderModel& model, const ThresholdTable& r_star);

/// Throws ConfigError unless `table` was built for `model`.
void check_table_matches(const DisorderModel& model, const ThresholdTable& table);

}  // namespace disorder
