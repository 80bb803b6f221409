#pragma once

#include <optional>
#include <vector>

#include "moire/raster.hpp"
#include "moire/spectrum.hpp"

namespace moire {

/// One detected plane wave.
struct WaveMeasurement {
    double wavenumber = 0.0;       // cycles/mm
    double orientation_deg = 0.0;  // wavevector direction, (-90, 90]
    double amplitude = 0.0;        // peak-to-mean contrast after calibration
    double period = 0.0;           // mm, 1 / wavenumber
    double snr = 0.0;              // peak magnitude over the local spectral floor

    static WaveMeasurement from_wavevector(double fx, double fy, double amplitude, double snr);
};

struct AnalyzerConfig {
    Window window_for_geometry = Window::Hann;
    Window window_for_amplitude = Window::FlatTop;
    /// Relative to the strongest in-band peak.
    double amplitude_floor = 0.05;
    /// Absolute floor in calibrated contrast units.
    double min_amplitude = 0.002;
    double min_snr = 6.0;
    /// Visibility cutoff in cycles/mm. Unset: 0.8 min(k0, k1) of the image's
    /// scene when known, else a quarter of the sampling frequency.
    std::optional<double> max_frequency;
    int max_peaks = 8;
    int dc_guard_bins = 2;
    bool subbin_refinement = true;
    double harmonic_angle_tol_deg = 2.0;
    double harmonic_ratio_tol = 0.05;

    void validate() const;
};

/// Band limit used for `image` under `config`.
double effective_max_frequency(const RasterImage& image, const AnalyzerConfig& config);

/// Windowed-FFT measurement of the plane waves in `image`.
///
/// Geometry (wavenumber, orientation) comes from the geometry window with
/// log-parabolic sub-bin refinement finished on the DTFT; amplitude from a
/// fit of {cos, sin, 1} at that frequency weighted by the amplitude window,
/// divided by the calibration scale. Harmonics are removed, then up to max_peaks waves are returned:
/// first the strong ones (>= 10x the relative floor) by descending period,
/// then the rest by descending amplitude.
std::vector<WaveMeasurement> analyze(const RasterImage& image, const AnalyzerConfig& config = {},
                                     const Calibration& calibration = {});

/// Removes every wave whose orientation matches a lower-wavenumber wave
/// (within angle_tol, mod 180) at an integer ratio >= 2 (within ratio_tol),
/// unless it is the stronger of the two.
std::vector<WaveMeasurement> suppress_harmonics(const std::vector<WaveMeasurement>& peaks,
                                                double angle_tol_deg, double ratio_tol);

/// (phi - alpha) reduced mod 180 into (-90, 90].
double wrapped_orientation(double phi_deg, double alpha_deg);

/// Smallest angle between two orientations taken mod 180.
double orientation_distance(double a_deg, double b_deg);

}  // namespace moire
