#include "disorder/errors.hpp"

#include <cstdlib>
#include <string>

#include <fmt/format.h>

namespace disorder {

double memory_budget_mb() {
    if (const char* env = std::getenv("DISORDER_DETECT_BUDGET_MB")) {
        try {
            const double v = std::stod(env);
            if (v > 0.0) return v;
        } catch (const std::exception&) {
        }
    }
    return 1024.0;
}

void check_budget(double bytes, const std::string& what) {
    const double required = bytes / (1024.0 * 1024.0);
    const double budget = memory_budget_mb();
    if (!(required <= budget)) {
        throw BudgetError(fmt::format("{} needs {:.1f} MB, budget is {:.1f} MB "
                                      "(raise DISORDER_DETECT_BUDGET_MB)",
                                      what, required, budget),
                          required, budget);
    }
}

}  // namespace disorder
