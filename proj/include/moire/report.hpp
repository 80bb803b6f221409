#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "moire/experiment.hpp"
#include "moire/svg_plot.hpp"

namespace moire {

// Table builders return the whole CSV text; all numbers go through fixed
// formats so identical inputs give identical bytes.

std::string measurements_csv_header();
std::string measurements_csv_rows(const std::string& image_id, double alpha_deg,
                                  const std::vector<WaveMeasurement>& waves);

std::string measurements_csv(const SweepDataset& ds);
std::string branches_csv(const SweepDataset& ds);
nlohmann::json branch_summary_json(const SweepDataset& ds);
std::string predictions_csv(const std::vector<double>& alphas, const std::vector<std::vector<PredictedPeak>>& preds);
std::string predictions_csv(const SweepDataset& ds);
std::string comparison_csv(const ComparisonReport& report);
nlohmann::json comparison_json(const ComparisonReport& report);
std::string opening_ratio_csv(const OpeningRatioReport& report);
std::string pitch_csv(const std::vector<PitchRow>& rows);
std::string free_angles_csv(const std::vector<FreeAngleCandidate>& candidates, FreeAngleCriterion criterion);

// Three stacked panels (wrapped orientation, period, amplitude vs alpha),
// one series per branch.
Figure sweep_figure(const SweepDataset& ds);
// Max amplitude of each branch against the angle of its period maximum.
Figure max_amplitude_figure(const SweepDataset& ds);
// Period and amplitude against barrier pitch.
Figure pitch_figure(const std::vector<PitchRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);

// Writes measurements.csv, branches.csv, branch_summary.json and
// predictions.csv; plus sweep.svg and max_amplitude.svg when there is at
// least one branch. Returns the written paths.
std::vector<std::filesystem::path> emit_reports(const SweepDataset& ds, const std::filesystem::path& dir);

std::vector<std::filesystem::path> emit_pitch_report(const std::vector<PitchRow>& rows,
                                                     const std::filesystem::path& dir);

}  // namespace moire
