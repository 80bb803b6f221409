#include "moire/eye_mtf.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace moire {

double MTFParams::u0() const {
    const double wavelength_mm = wavelength_nm * 1e-6;
    return (pupil_mm / wavelength_mm) * kPi / 180.0;
}

double MTFParams::u1() const {
    return 21.95 - 5.512 * pupil_mm + 0.3922 * pupil_mm * pupil_mm;
}

void MTFParams::validate() const {
    if (!(pupil_mm >= 2.0 && pupil_mm <= 6.0)) {
        throw Error(fmt::format("pupil diameter must lie in [2, 6] mm, got {}", pupil_mm));
    }
    if (!(wavelength_nm > 0.0)) {
        throw Error("wavelength must be positive");
    }
}

double mtf_exact(double u, const MTFParams& params) {
    if (u < 0.0) {
        throw Error(fmt::format("spatial frequency must be non-negative, got {}", u));
    }
    const double u0 = params.u0();
    if (u >= u0) {
        return 0.0;
    }
    const double s = u / u0;
    const double diffraction = std::sqrt(2.0 / kPi) *
                               std::sqrt(std::acos(s) - s * std::sqrt(1.0 - s * s));
    const double t = u / params.u1();
    const double value = diffraction / std::pow(1.0 + t * t, 0.62);
    return std::clamp(value, 0.0, 1.0);
}

double mtf_poly(double u) {
    const double value = ((-2e-6 * u + 4e-4) * u - 3e-2) * u + 1.0;
    return std::max(0.0, value);
}

double perceived_frequency_of_period(double distance_mm, double period_mm) {
    if (!(distance_mm > 0.0)) {
        throw Error("viewing distance must be positive");
    }
    if (std::isinf(period_mm)) {
        return 0.0;
    }
    if (!(period_mm > 0.0)) {
        throw Error("period must be positive");
    }
    // periods per radian, small-angle
    return (distance_mm / period_mm) * kPi / 180.0;
}

double perceived_frequency(const ViewingGeometry& geom, double magnification) {
    if (!(geom.surface_period_mm > 0.0)) {
        throw Error("surface period must be positive");
    }
    if (!(magnification > 0.0)) {
        throw Error("magnification must be positive");
    }
    return perceived_frequency_of_period(geom.distance_mm,
                                         geom.surface_period_mm * magnification);
}

PredictedPeak weight_amplitude(const PredictedPeak& peak, double distance_mm,
                               const MTFParams& params) {
    PredictedPeak out = peak;
    const double u = perceived_frequency_of_period(distance_mm, peak.period());
    out.weighted_amplitude = peak.raw_amplitude * mtf_exact(u, params);
    return out;
}

}  // namespace moire
