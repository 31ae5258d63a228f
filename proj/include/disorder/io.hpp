#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "disorder/detector.hpp"
#include "disorder/model.hpp"
#include "disorder/montecarlo.hpp"
#include "disorder/solver.hpp"

namespace disorder {

/// Parses a model document with fields pi, p, d1, d2, states, P0, P1, x0.
/// Throws InputError on malformed JSON, missing or mistyped fields. Numeric
/// invariants (row sums, ranges) are left to validate_model; an unknown x0
/// label yields an out-of-range x0 that validate_model reports.
DisorderModel parse_model(const std::string& text);
DisorderModel load_model(const std::filesystem::path& path);
void write_model(std::ostream& out, const DisorderModel& model);

/// Text format: a header of `key value` lines (model_hash, d1, d2, tolerance,
/// iterations, converged, sup_delta, num_states, records) followed by one line
/// per tuple with its state labels and r value.
void write_threshold_table(std::ostream& out, const ThresholdTable& table, const DisorderModel& model);
ThresholdTable read_threshold_table(std::istream& in, const DisorderModel& model);
ThresholdTable load_threshold_table(const std::filesystem::path& path, const DisorderModel& model);

/// Newline-delimited state labels, or a one-column CSV with header `x`. Blank
/// lines are skipped. Throws InputError naming the 1-based line of the first
/// unknown label.
std::vector<State> read_observations(std::istream& in, const DisorderModel& model);

/// Number rendering for machine-readable output: 17 significant digits,
/// `null` for non-finite values.
std::string json_number(double v);
/// Quoted and escaped JSON string literal.
std::string json_string(const std::string& s);

void write_detection_report(std::ostream& out, const DetectionReport& report, const DisorderModel& model);
void write_experiment_summary(std::ostream& out, const ExperimentResult& result, const DisorderModel& model);

}  // namespace disorder
