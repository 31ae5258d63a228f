#pragma once

#include <stdexcept>
#include <string>

namespace disorder {

/// Input that cannot be interpreted: unparsable files, unknown state labels,
/// missing fields. The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (index out of range, misaligned
/// posterior state, push after stop).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The observed window has zero probability under every change time.
class ImpossiblePathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model and a threshold table that were not built for each other.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Refusal to allocate beyond the configured memory budget.
class BudgetError : public std::runtime_error {
public:
    BudgetError(const std::string& what, double required_mb, double budget_mb)
        : std::runtime_error(what), required_mb_(required_mb), budget_mb_(budget_mb) {}

    double required_mb() const noexcept { return required_mb_; }
    double budget_mb() const noexcept { return budget_mb_; }

private:
    double required_mb_;
    double budget_mb_;
};

/// Memory budget in MiB, read from DISORDER_DETECT_BUDGET_MB (default 1024).
double memory_budget_mb();

/// Throws BudgetError when `bytes` exceeds the budget.
void check_budget(double bytes, const std::string& what);

}  // namespace disorder
