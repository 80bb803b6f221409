#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "moire/grating.hpp"

namespace moire {

using Complex = std::complex<double>;

/// A point on the spectral trajectory traced by a barrier component as it
/// rotates around grid component (m, n).
struct TrajectoryPoint {
    Complex z;          // moiré wavevector, cycles/mm (real = x, imag = y)
    double alpha_deg;
    Complex center;     // (m + jn) k0
    double radius;      // k1
};

/// Theoretical moiré component from grid order (m, n) and barrier harmonic p.
struct PredictedPeak {
    int m = 0;
    int n = 0;
    int barrier_order = 1;
    Complex wavevector;            // cycles/mm
    double wavenumber = 0.0;       // |wavevector|, cycles/mm
    double orientation_deg = 0.0;  // wrapped to (-90, 90]
    double magnification = 0.0;    // p k1 / k_m; +inf at zero wavenumber
    double max_angle_deg = 0.0;    // arg of the trajectory centre
    double rho = 0.0;
    double raw_amplitude = 0.0;    // |c_grid(m, n)| |c_barrier(p)|
    double weighted_amplitude = 0.0;
    bool is_harmonic = false;      // integer multiple of another listed family

    double period() const;
    /// Peak-to-mean amplitude of the real fringe this conjugate pair forms.
    double fringe_contrast() const { return 2.0 * raw_amplitude; }
    double weighted_fringe_contrast() const { return 2.0 * weighted_amplitude; }
};

/// Reduce an angle modulo 180 degrees into (-90, 90].
double wrap_half_turn(double deg);

/// z = (m + jn) k0 - k1 e^{j alpha}.
TrajectoryPoint trajectory_point(int m, int n, double k0, double k1, double alpha_deg);

/// k1 sqrt(1 + rho^2 - 2 rho cos(alpha - alpha_max)).
double moire_wavenumber(double rho, double k1, double alpha_deg, double alpha_max_deg);

/// arctan(n / m) in degrees; m = 0 maps to 90.
double max_angle(int m, int n);

/// Orientation of the moiré wavevector in (-90, 90]; nullopt at the
/// singular point where the wavevector vanishes.
std::optional<double> orientation(int m, int n, double k0, double k1, double alpha_deg);

/// Moiré magnification factor; nullopt means an infinite period.
std::optional<double> magnification(double rho, double alpha_deg, double alpha_max_deg);

/// 1 / |rho - 1|; nullopt (infinite period) at rho = 1.
std::optional<double> max_magnification(double rho);

/// Sorted unique rational angles arctan(n/m), 0 <= m, n <= max_order.
std::vector<double> enumerate_moire_angles(int max_order);

struct SpectrumOptions {
    double visibility_fraction = 0.8;  // of min(k0, k1)
    int grid_order_bound = 3;          // |m|, |n| <= bound
    int barrier_order_bound = 3;       // 1 <= p <= bound
};

/// Enumerates moiré components inside the visibility circle at the scene's
/// rotation angle. Sorted by descending raw amplitude, then longer period.
std::vector<PredictedPeak> predict_spectrum(const SceneConfig& scene,
                                            const SpectrumOptions& options = {});

/// Builds the peak of family (m, n, p) at `alpha_deg` regardless of
/// visibility. Amplitudes come from the scene's layer coefficients.
PredictedPeak family_peak(const SceneConfig& scene, int m, int n, int barrier_order,
                          double alpha_deg);

}  // namespace moire
