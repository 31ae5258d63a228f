#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "disorder/likelihood.hpp"
#include "disorder/model.hpp"

namespace disorder {

struct GateResult {
    std::string name;
    double max_abs_error = 0.0;
    double tolerance = 0.0;
    bool passed = true;
    /// Non-gating results are reported but do not affect the overall verdict.
    bool gating = true;
    bool skipped = false;
    std::size_t checks = 0;
    std::string note;
};

struct OracleReport {
    std::size_t horizon = 0;
    std::vector<GateResult> gates;

    bool all_passed() const;
    const GateResult* find(const std::string& name) const;
};

struct OracleCheckOptions {
    std::size_t horizon = 6;
    double tolerance = 1e-10;
    /// Index convention used by the payoff gate; anything but kMatched is a
    /// deliberate fault injection.
    PayoffIndexing payoff_indexing = PayoffIndexing::kMatched;
    double solver_tolerance = 1e-12;
};

/// Compares every closed-form identity against exhaustive enumeration on all
/// positive-mass prefixes up to the horizon, then checks the optimal rule
/// against finite-horizon backward induction. Throws BudgetError if the
/// enumeration does not fit.
OracleReport oracle_check(const DisorderModel& model, const OracleCheckOptions& options = {});

/// Max abs error of h(w, Pi_n) against the oracle window probability over all
/// full windows up to the horizon, for one index convention.
double payoff_gate_error(const DisorderModel& model, std::size_t horizon, PayoffIndexing indexing);

void write_oracle_report(std::ostream& out, const OracleReport& report);
std::string format_oracle_report(const OracleReport& report);

}  // namespace disorder
