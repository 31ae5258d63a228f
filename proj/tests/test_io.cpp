#include <cmath>
#include <gtest/gtest.h>
#include <sstream>

#include "disorder/errors.hpp"
#include "disorder/io.hpp"
#include "disorder/solver.hpp"
#include "reference_models.hpp"

using namespace disorder;
using disorder::testing::absorbing_jump;
using disorder::testing::three_state;
using disorder::testing::two_state;

namespace {

const char* kTwoState = R"({
  "pi": 0.0, "p": 0.5, "d1": 1, "d2": 1,
  "states": ["a", "b"],
  "P0": [[0.9, 0.1], [0.2, 0.8]],
  "P1": [[0.5, 0.5], [0.5, 0.5]],
  "x0": "a"
})";

std::string replace(std::string s, const std::string& from, const std::string& to) {
    s.replace(s.find(from), from.size(), to);
    return s;
}

}  // namespace

// =============================================================================
// Models
// =============================================================================

TEST(ParseModel, ReferenceDocument) {
    const auto m = parse_model(kTwoState);
    EXPECT_EQ(model_hash(m), model_hash(two_state()));
    EXPECT_TRUE(validate_model(m).empty());
}

TEST(ParseModel, WriteThenParseRoundTrips) {
    for (const auto& m : {three_state(0.2, 0.9, 2, 0), absorbing_jump()}) {
        std::ostringstream out;
        write_model(out, m);
        EXPECT_EQ(model_hash(parse_model(out.str())), model_hash(m));
    }
}

TEST(ParseModel, MalformedDocuments) {
    EXPECT_THROW(parse_model("{"), InputError);
    EXPECT_THROW(parse_model("[1, 2]"), InputError);
    EXPECT_THROW(parse_model(replace(kTwoState, "\"p\": 0.5,", "")), InputError);
    EXPECT_THROW(parse_model(replace(kTwoState, "\"d1\": 1", "\"d1\": 1.5")), InputError);
    EXPECT_THROW(parse_model(replace(kTwoState, "[0.2, 0.8]", "[0.2]")), InputError);
    EXPECT_THROW(parse_model(replace(kTwoState, "[0.9, 0.1]", "[0.9, \"x\"]")), InputError);
    EXPECT_THROW(load_model("/nonexistent/model.json"), InputError);
}

TEST(ParseModel, UnknownX0IsAValidationError) {
    const auto m = parse_model(replace(kTwoState, "\"x0\": \"a\"", "\"x0\": \"z\""));
    const auto v = validate_model(m);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0], "x0 must be a member of the state set");
}

// =============================================================================
// Threshold tables
// =============================================================================

TEST(ThresholdTableIo, RoundTripIsBitwise) {
    for (const auto& m : {three_state(0.2, 0.9, 2, 1), absorbing_jump()}) {
        const auto [table, diag] = solve_threshold(m, 1e-12);
        std::stringstream buf;
        write_threshold_table(buf, table, m);
        const auto back = read_threshold_table(buf, m);
        EXPECT_EQ(back.values, table.values);
        EXPECT_EQ(back.model_hash, table.model_hash);
        EXPECT_EQ(back.converged, table.converged);
        EXPECT_EQ(back.iteration, table.iteration);
        EXPECT_EQ(back.sup_delta, table.sup_delta);
        EXPECT_EQ(back.tolerance, table.tolerance);
    }
}

TEST(ThresholdTableIo, SaturatedEntriesSurvive) {
    const auto m = absorbing_jump();
    const auto [table, diag] = solve_threshold(m);
    std::stringstream buf;
    write_threshold_table(buf, table, m);
    EXPECT_NE(buf.str().find("inf"), std::string::npos);
    EXPECT_TRUE(std::isinf(read_threshold_table(buf, m).at(std::vector<State>{0, 2})));
}

TEST(ThresholdTableIo, ForeignModel) {
    const auto m = two_state();
    const auto [table, diag] = solve_threshold(m);
    std::stringstream buf;
    write_threshold_table(buf, table, m);
    const auto text = buf.str();
    {
        std::istringstream in(text);
        const auto back = read_threshold_table(in, two_state(0.0, 0.6));
        EXPECT_THROW(check_table_matches(two_state(0.0, 0.6), back), ConfigError);
    }
    {
        std::istringstream in(text);
        EXPECT_THROW(read_threshold_table(in, three_state()), ConfigError);
    }
}

TEST(ThresholdTableIo, MalformedTables) {
    const auto m = two_state();
    const auto [table, diag] = solve_threshold(m);
    std::stringstream buf;
    write_threshold_table(buf, table, m);
    const auto text = buf.str();
    {
        std::istringstream in(text.substr(0, text.size() - 12));
        EXPECT_THROW(read_threshold_table(in, m), InputError);
    }
    {
        std::istringstream in(replace(text, "records 4", "records 3"));
        EXPECT_THROW(read_threshold_table(in, m), ConfigError);
    }
    {
        std::istringstream in(replace(text, "\nb a ", "\na a "));
        EXPECT_THROW(read_threshold_table(in, m), InputError);
    }
}

// =============================================================================
// Observation streams
// =============================================================================

TEST(ReadObservations, LabelsHeaderAndBlankLines) {
    const auto m = two_state();
    std::istringstream in("x\na\n\nb\n  a  \n");
    EXPECT_EQ(read_observations(in, m), (std::vector<State>{0, 1, 0}));
}

TEST(ReadObservations, UnknownLabelCitesLine) {
    const auto m = two_state();
    std::istringstream in("a\nb\nq\n");
    try {
        read_observations(in, m);
        FAIL() << "expected InputError";
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

// =============================================================================
// Number rendering
// =============================================================================

TEST(JsonNumber, FullPrecision) {
    EXPECT_EQ(std::stod(json_number(0.1)), 0.1);
    EXPECT_EQ(std::stod(json_number(1.0 / 3.0)), 1.0 / 3.0);
    EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), "null");
    EXPECT_EQ(json_string("a\"b"), "\"a\\\"b\"");
}
