#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "moire/analyzer.hpp"
#include "moire/branch_tracker.hpp"
#include "moire/eye_mtf.hpp"
#include "moire/raster.hpp"
#include "moire/spectral_theory.hpp"

namespace moire {

/// Rotation angles of an experiment: a coarse grid over the range plus a
/// fine lattice (multiples of fine_step) around every rational angle.
struct SweepPlan {
    double alpha_start = -10.0;
    double alpha_end = 100.0;
    double coarse_step = 1.0;
    double fine_step = 0.1;
    double refine_radius = 2.0;
    int rational_max_order = 3;

    void validate() const;
    std::vector<double> grid() const;
    bool contains(double alpha_deg) const;
};

struct ObserverModel {
    double viewing_distance_mm = 500.0;
    MTFParams mtf;
};

struct ExperimentSettings {
    AnalyzerConfig analyzer;
    LinkGates gates;
    PruneOptions prune;
    SpectrumOptions spectrum;
    ObserverModel observer;
    int workers = 1;
};

/// Everything recorded at one rotation angle.
struct AngleRecord {
    double alpha_deg = 0.0;
    std::vector<WaveMeasurement> measurements;
    std::vector<int> branch_ids;  // parallel to measurements, -1 if pruned
    std::vector<PredictedPeak> predictions;
};

struct SweepDataset {
    SceneConfig scene;
    SweepPlan plan;
    ExperimentSettings settings;
    Calibration calibration;
    std::vector<AngleRecord> records;
    std::vector<Branch> branches;  // after pruning
};

/// A rejection raised while processing one angle of a sweep.
class AngleError : public Error {
public:
    AngleError(double alpha_deg, const std::string& what);
    double alpha_deg() const { return alpha_; }

private:
    double alpha_;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Theory predictions at one angle, MTF-weighted for the observer.
std::vector<PredictedPeak> weighted_predictions(const SceneConfig& scene, double alpha_deg,
                                                const ExperimentSettings& settings);

/// Eye-weighted version of a measured amplitude.
double perceived_amplitude(const WaveMeasurement& w, const ObserverModel& observer);

/// Renders, calibrates and analyses every angle of the plan (in parallel up
/// to settings.workers), then links and prunes branches.
SweepDataset run_sweep(const SceneConfig& scene, const SweepPlan& plan, const ExperimentSettings& settings,
                       const ProgressFn& progress = {});

struct PointResidual {
    double alpha_deg = 0.0;
    double predicted_period = 0.0;
    double measured_period = 0.0;
    double period_residual = 0.0;  // relative
    double predicted_orientation = 0.0;
    double measured_orientation = 0.0;
    double orientation_residual = 0.0;  // degrees, mod 180
    double predicted_weighted = 0.0;
    double perceived = 0.0;
};

struct BranchComparison {
    int branch_id = 0;
    bool matched = false;
    int m = 0;
    int n = 0;
    int barrier_order = 0;
    std::optional<std::string> label;
    double max_abs_period_residual = 0.0;
    double max_abs_orientation_residual = 0.0;
    double amplitude_rank_correlation = 0.0;
    std::vector<double> zero_crossings;
    /// Distance from each crossing to the family's maximum angle (mod 180).
    std::vector<double> zero_crossing_offsets;
    std::vector<PointResidual> residuals;
};

/// The strongest predicted wave at one angle against its nearest measurement.
struct DominantCheck {
    double alpha_deg = 0.0;
    bool checked = false;   // prediction above the detection floor
    bool detected = false;  // a measurement within 10 % of the wavevector
    int m = 0;
    int n = 0;
    int barrier_order = 0;
    double predicted_period = 0.0;
    double predicted_orientation = 0.0;
    double measured_period = 0.0;
    double measured_orientation = 0.0;
    double period_residual = 0.0;
    double orientation_residual = 0.0;
};

struct ComparisonReport {
    std::vector<BranchComparison> branches;
    std::vector<DominantCheck> dominant;
};

ComparisonReport compare_to_theory(const SweepDataset& dataset);

/// Spearman rank correlation (average ranks for ties).
double rank_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct OpeningRatioRow {
    double grid_pitch = 0.0;
    double ratio = 0.0;
    double alpha_deg = 0.0;
    double max_amplitude = 0.0;
    double max_period = 0.0;
    double predicted_amplitude = 0.0;  // strongest predicted fringe contrast
    double mean_intensity = 0.0;
};

struct OpeningRatioReport {
    std::vector<OpeningRatioRow> rows;
    /// Per (grid pitch, angle): whether max amplitude rises strictly with ratio
    /// over the ratios in (0, 0.5].
    struct Trend {
        double grid_pitch;
        double alpha_deg;
        bool monotone;
    };
    std::vector<Trend> trends;
};

/// Varies the barrier opening ratio at fixed angles.
OpeningRatioReport opening_ratio_study(const SceneConfig& scene_base, const std::vector<double>& ratios,
                                       const std::vector<double>& angles, const ExperimentSettings& settings);

struct PitchRow {
    double barrier_pitch = 0.0;
    double rho = 0.0;
    double alpha_deg = 0.0;
    double max_period = 0.0;
    double max_amplitude = 0.0;
    double max_perceived_amplitude = 0.0;
};

/// Varies the barrier pitch at a fixed angle. The raster resolution is raised
/// where needed to keep every grating resolved.
std::vector<PitchRow> pitch_study(const SceneConfig& scene_base, const std::vector<double>& pitches,
                                  double alpha_deg, const ExperimentSettings& settings);

enum class FreeAngleCriterion { MaxDistanceToRational, MinPredictedAmplitude };

FreeAngleCriterion free_angle_criterion_from_string(const std::string& name);
std::string to_string(FreeAngleCriterion c);

struct FreeAngleCandidate {
    double alpha_deg = 0.0;
    double score = 0.0;
};

/// Candidate moiré-free angles on the plan's fine lattice, best first.
/// MaxDistanceToRational scores by distance to the nearest rational angle
/// (higher is better); MinPredictedAmplitude by the worst summed weighted
/// contrast within +-neighbourhood_deg (lower is better). Angles within
/// 0.5 degrees of a rational angle are never returned.
std::vector<FreeAngleCandidate> find_moire_free(const SceneConfig& scene, const SweepPlan& plan,
                                                FreeAngleCriterion criterion,
                                                const ExperimentSettings& settings, std::size_t top_n = 5,
                                                double neighbourhood_deg = 0.5);

}  // namespace moire
