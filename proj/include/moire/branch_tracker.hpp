#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "moire/analyzer.hpp"

namespace moire {

/// Measurements of one image in a sweep.
struct SweepStep {
    double alpha_deg = 0.0;
    std::vector<WaveMeasurement> measurements;
};

struct BranchPoint {
    double alpha_deg = 0.0;
    WaveMeasurement measurement;
    std::size_t step = 0;    // index into the sweep
    std::size_t source = 0;  // index into that step's measurements
};

/// A smooth sequence of waves across the sweep, sorted by alpha.
struct Branch {
    int id = 0;
    std::vector<BranchPoint> points;
    double max_amplitude = 0.0;
    double max_period = 0.0;
    double angle_at_max_period = 0.0;

    /// Recomputes the per-branch extrema from the points.
    void update_extrema();
};

struct LinkGates {
    double max_dphi_deg = 5.0;  // per sweep step
    double max_dperiod = 0.30;  // relative change per sweep step
    int max_gap = 2;            // missing steps bridged

    void validate() const;
};

struct PruneOptions {
    int min_points = 8;
    double min_rel_amplitude = 0.10;
    double min_rel_period = 0.50;
};

struct BranchSummary {
    double angle_at_max_period = 0.0;
    double max_period = 0.0;
    double max_amplitude = 0.0;
    double orientation_at_max = 0.0;
};

/// Greedy nearest-neighbour chaining of a sweep sorted by alpha.
///
/// At each step the (measurement, branch) pairs that pass the gates are
/// taken in order of dphi/max_dphi + dperiod/max_dperiod, ties going
/// to the branch with the longer current period. Gates scale with the number
/// of steps since the branch's last point. Unclaimed measurements open new
/// branches.
std::vector<Branch> link_branches(const std::vector<SweepStep>& sweep, const LinkGates& gates = {});

/// Keeps a branch if it passes any of: point count >= min_points, max
/// amplitude >= min_rel_amplitude * global max, max period >= min_rel_period
/// * global max. Surviving branches keep their ids.
std::vector<Branch> prune_branches(const std::vector<Branch>& branches, const PruneOptions& options);

BranchSummary branch_summary(const Branch& branch);

/// Angles where the branch period has a local maximum (plateaus reported
/// once, endpoints excluded).
std::vector<double> local_period_maxima(const Branch& branch);

/// Angles where (phi - alpha) wrapped to (-90, 90] changes sign, linearly
/// interpolated. Jumps across the +-90 wrap are not crossings.
std::vector<double> wrapped_zero_crossings(const Branch& branch);

/// Label of the rational angle near `angle_deg` ("0", "1/3", "inf", ...).
/// Angles are folded so that -t, t and t + 90 share a label.
std::optional<std::string> rational_label(double angle_deg, int max_order = 3, double tol_deg = 0.5);

/// Angular distance from `angle_deg` to the nearest rational angle of order
/// <= max_order, including their reflections and 90-degree shifts.
double distance_to_rational(double angle_deg, int max_order = 3);

}  // namespace moire
