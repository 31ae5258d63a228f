#include <cmath>
#include <cstdlib>
#include <gtest/gtest.h>
#include <omp.h>

#include "disorder/errors.hpp"
#include "disorder/likelihood.hpp"
#include "disorder/oracle.hpp"
#include "reference_models.hpp"

using namespace disorder;
using disorder::testing::all_paths;
using disorder::testing::make_model;
using disorder::testing::no_information;
using disorder::testing::three_state;
using disorder::testing::two_state;

// =============================================================================
// Joint enumeration
// =============================================================================

TEST(JointTable, TotalMassAndThetaMarginal) {
    const auto m = two_state(0.2, 0.7);
    const auto joint = enumerate_joint(m, 3);
    EXPECT_NEAR(joint.total_mass(), 1.0, 1e-14);
    const auto marginal = joint.theta_marginal();
    ASSERT_EQ(marginal.size(), 6u);
    for (std::uint64_t j = 0; j <= 4; ++j) EXPECT_NEAR(marginal[j], prior_pmf(m.prior, j), 1e-14);
    EXPECT_NEAR(marginal[5], prior_tail(m.prior, 4), 1e-14);
}

TEST(JointTable, PrefixMassMatchesJointDensity) {
    const auto m = three_state(0.2, 0.9);
    const auto joint = enumerate_joint(m, 4);
    for (std::size_t n = 0; n <= 4; ++n) {
        for (const auto& path : all_paths(m, n)) {
            EXPECT_NEAR(joint.prefix_mass(path), joint_density_S(m, Window(path)), 1e-14);
        }
    }
    EXPECT_EQ(joint.prefix_mass(std::vector<State>{1, 0}), 0.0);
    EXPECT_EQ(joint.level_size(3), 27u);
}

TEST(JointTable, TailCellIsSplitAnalytically) {
    const auto m = two_state(0.0, 0.5);
    const auto joint = enumerate_joint(m, 2);
    const std::vector<State> root{0};
    EXPECT_NEAR(joint.joint_mass(root, ThetaInterval::at_most(9)), 1.0 - prior_tail(m.prior, 9), 1e-15);
    EXPECT_NEAR(joint.joint_mass(root, ThetaInterval{5, 7}),
                prior_tail(m.prior, 4) - prior_tail(m.prior, 7), 1e-15);
    EXPECT_NEAR(joint.joint_mass(root, ThetaInterval{6, std::nullopt}), prior_tail(m.prior, 5), 1e-15);
}

TEST(JointTable, IndependentOfThreadCount) {
    const auto m = three_state(0.2, 0.9);
    omp_set_num_threads(1);
    const auto a = enumerate_joint(m, 5);
    omp_set_num_threads(4);
    const auto b = enumerate_joint(m, 5);
    for (std::size_t code = 0; code < a.level_size(5); ++code) {
        EXPECT_EQ(a.prefix_mass_at(5, code), b.prefix_mass_at(5, code));
        EXPECT_EQ(a.prefix(5, code), b.prefix(5, code));
    }
}

TEST(JointTable, RespectsMemoryBudget) {
    ::setenv("DISORDER_DETECT_BUDGET_MB", "0.01", 1);
    EXPECT_THROW(enumerate_joint(three_state(), 9), BudgetError);
    ::unsetenv("DISORDER_DETECT_BUDGET_MB");
}

// =============================================================================
// Conditionals
// =============================================================================

TEST(OracleConditional, HandValue) {
    const auto joint = enumerate_joint(two_state(), 3);
    const std::vector<State> aab{0, 0, 1};
    EXPECT_NEAR(oracle_conditional(joint, aab, ThetaInterval::at_most(2)), 95.0 / 104.0, 1e-14);
    EXPECT_NEAR(oracle_conditional(joint, aab, ThetaInterval{1, 3}), 199.0 / 208.0, 1e-14);
}

TEST(OracleConditional, ZeroMassPrefixThrows) {
    const auto m = make_model({{1.0, 0.0}, {0.5, 0.5}}, {{1.0, 0.0}, {0.5, 0.5}}, {"a", "b"}, 0.0, 0.5, 1, 1);
    const auto joint = enumerate_joint(m, 2);
    EXPECT_THROW(oracle_conditional(joint, std::vector<State>{0, 1}, ThetaInterval::all()), ImpossiblePathError);
}

// =============================================================================
// Rule values
// =============================================================================

TEST(RuleValue, FixedTimeRuleIsPriorWindowMass) {
    const auto m = two_state(0.2, 0.5);
    const auto joint = enumerate_joint(m, 5);
    EXPECT_NEAR(oracle_rule_value(joint, fixed_time_rule(1)), 0.8, 1e-15);
    EXPECT_NEAR(oracle_rule_value(joint, fixed_time_rule(2)), 0.7, 1e-15);
    // Never stopping within the horizon is a failure.
    EXPECT_EQ(oracle_rule_value(joint, fixed_time_rule(9)), 0.0);
    const StoppingRule never = [](std::span<const State>) { return false; };
    EXPECT_NEAR(oracle_rule_value(joint, forced_by(never, 5)), oracle_rule_value(joint, fixed_time_rule(5)),
                1e-15);
}

TEST(RuleValue, NoInformationFixedRule) {
    for (int d1 = 0; d1 <= 2; ++d1) {
        for (int d2 = 0; d2 <= 2; ++d2) {
            const double p = 0.6;
            const auto m = no_information(0.0, p, d1, d2);
            const auto joint = enumerate_joint(m, 4);
            EXPECT_NEAR(oracle_rule_value(joint, fixed_time_rule(d1 + 1)), 1.0 - std::pow(p, d1 + d2 + 1), 1e-14);
        }
    }
}

TEST(OptimalValue, NoInformationLowerBound) {
    const double p = 0.5;
    const auto m = no_information(0.0, p, 1, 1);
    const auto sol = oracle_optimal_value(m, 5);
    EXPECT_NEAR(sol.value.value_lower, 0.875, 1e-14);
    EXPECT_NEAR(sol.value.value_upper, std::min(1.0, 0.875 + prior_tail(m.prior, 4)), 1e-14);
    EXPECT_NEAR(oracle_rule_value(sol.joint, sol.rule()), sol.value.value_lower, 1e-14);
}

TEST(OptimalValue, EnvelopeNarrowsWithHorizon) {
    const auto m = two_state(0.0, 0.7);
    double previous_lower = 0.0;
    double previous_upper = 1.0;
    for (std::size_t n = 3; n <= 8; ++n) {
        const auto v = oracle_optimal_value(m, n).value;
        EXPECT_GE(v.value_lower, previous_lower - 1e-15);
        EXPECT_LE(v.value_upper, previous_upper + 1e-15);
        EXPECT_LE(v.value_lower, v.value_upper);
        previous_lower = v.value_lower;
        previous_upper = v.value_upper;
    }
}

TEST(WindowProbability, OnePerTime) {
    const auto joint = enumerate_joint(two_state(), 4);
    const auto best = max_window_probability_by_time(joint);
    ASSERT_EQ(best.size(), 5u);
    for (double v : best) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}
