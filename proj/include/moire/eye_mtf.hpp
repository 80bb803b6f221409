#pragma once

#include "moire/spectral_theory.hpp"

namespace moire {

/// Observer optics. Frequencies are in cycles/degree of visual angle.
struct MTFParams {
    double pupil_mm = 4.0;
    double wavelength_nm = 555.0;

    /// Diffraction cutoff d / lambda, converted from cycles/radian.
    double u0() const;
    /// Aberration corner frequency 21.95 - 5.512 d + 0.3922 d^2.
    double u1() const;

    void validate() const;
};

struct ViewingGeometry {
    double distance_mm = 500.0;
    double surface_period_mm = 1.0;  // moiré period at unit magnification
};

/// Radial MTF of the eye, diffraction term times aberration roll-off.
/// Returns 0 beyond the cutoff u0; negative u throws.
double mtf_exact(double u, const MTFParams& params = {});

/// Cubic approximation for d = 4 mm, 555 nm. Intended for u in
/// [0, kMtfPolyMaxFrequency]; negative outputs clamp to 0.
double mtf_poly(double u);

constexpr double kMtfPolyMaxFrequency = 60.0;

/// Moiré periods per degree of visual angle seen from `geom.distance_mm`.
/// An infinite magnification gives 0.
double perceived_frequency(const ViewingGeometry& geom, double magnification);

/// Same, from a physical period in millimetres.
double perceived_frequency_of_period(double distance_mm, double period_mm);

/// Fills weighted_amplitude = raw_amplitude * MTF(perceived frequency) with
/// the peak's own period seen from `distance_mm`.
PredictedPeak weight_amplitude(const PredictedPeak& peak, double distance_mm,
                               const MTFParams& params = {});

}  // namespace moire
