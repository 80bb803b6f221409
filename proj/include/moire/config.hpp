#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "moire/experiment.hpp"

namespace moire {

/// Parameters of the opening-ratio and pitch studies.
struct StudyConfig {
    std::vector<double> opening_ratios{0.1, 0.2, 0.3};
    std::vector<double> or_angles{0.0, 26.565, 45.0};
    // illustrative pair about 10 % apart, not measured device values
    std::vector<double> or_grid_pitches{0.266, 0.293};
    std::vector<double> pitches{0.508, 0.339, 0.170};
    double pitch_angle = 45.0;
};

/// The whole experiment document.
///
/// YAML layout (every key optional, defaults as in the structs):
///
///   scene:    {grid: {pitch, opening_ratio, phase: [px, py]},
///              barrier: {pitch, opening_ratio, phase},
///              alpha_deg, extent_mm, resolution, supersample, seed}
///   plan:     {alpha_start, alpha_end, coarse_step, fine_step,
///              refine_radius, rational_max_order}
///   analyzer: {amplitude_floor, min_amplitude, min_snr, max_frequency,
///              max_peaks, dc_guard_bins, subbin_refinement,
///              harmonic_angle_tol_deg, harmonic_ratio_tol}
///   gates:    {max_dphi_deg, max_dperiod, max_gap}
///   prune:    {min_points, min_rel_amplitude, min_rel_period}
///   theory:   {visibility_fraction, grid_order_bound, barrier_order_bound,
///              viewing_distance_mm, pupil_mm, wavelength_nm}
///   studies:  {opening_ratios, or_angles, or_grid_pitches, pitches, pitch_angle}
///   output:   {dir, workers}
struct ExperimentConfig {
    SceneConfig scene;
    SweepPlan plan;
    ExperimentSettings settings;
    StudyConfig studies;
    std::string output_dir = "out";
};

/// Unknown keys are rejected so typos do not pass silently.
ExperimentConfig config_from_yaml(const YAML::Node& root);
ExperimentConfig load_config(const std::filesystem::path& path);
YAML::Node config_to_yaml(const ExperimentConfig& config);

/// Applies `a.b.c=value` (value parsed as YAML) onto a document.
void apply_override(YAML::Node& root, const std::string& assignment);

nlohmann::json grating_to_json(const GratingSpec& g);
GratingSpec grating_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const SceneConfig& s);
SceneConfig scene_from_json(const nlohmann::json& j);

nlohmann::json dataset_to_json(const SweepDataset& ds);
SweepDataset dataset_from_json(const nlohmann::json& j);

void save_dataset(const std::filesystem::path& path, const SweepDataset& ds);
SweepDataset load_dataset(const std::filesystem::path& path);

}  // namespace moire
