#include "moire/spectral_theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/core.h>

namespace moire {

double PredictedPeak::period() const {
    return wavenumber > 0.0 ? 1.0 / wavenumber : std::numeric_limits<double>::infinity();
}

double wrap_half_turn(double deg) {
    double r = std::fmod(deg, 180.0);
    if (r <= -90.0) {
        r += 180.0;
    } else if (r > 90.0) {
        r -= 180.0;
    }
    return r;
}

TrajectoryPoint trajectory_point(int m, int n, double k0, double k1, double alpha_deg) {
    const Complex center = Complex(m, n) * k0;
    const Complex z = center - k1 * std::polar(1.0, deg2rad(alpha_deg));
    return TrajectoryPoint{z, alpha_deg, center, k1};
}

double moire_wavenumber(double rho, double k1, double alpha_deg, double alpha_max_deg) {
    if (!(rho > 0.0) || !(k1 > 0.0)) {
        throw Error("moire_wavenumber requires rho > 0 and k1 > 0");
    }
    const double c = std::cos(deg2rad(alpha_deg - alpha_max_deg));
    // clamp tiny negative round-off at rho = 1, alpha = alpha_max
    return k1 * std::sqrt(std::max(0.0, 1.0 + rho * rho - 2.0 * rho * c));
}

double max_angle(int m, int n) {
    if (m == 0 && n == 0) {
        throw Error("max_angle is undefined for the (0, 0) component");
    }
    if (m == 0) {
        return 90.0;
    }
    return rad2deg(std::atan(static_cast<double>(n) / static_cast<double>(m)));
}

std::optional<double> orientation(int m, int n, double k0, double k1, double alpha_deg) {
    const double a = deg2rad(alpha_deg);
    const double num = n * k0 - k1 * std::sin(a);
    const double den = m * k0 - k1 * std::cos(a);
    const double scale = std::max({std::abs(m * k0), std::abs(n * k0), std::abs(k1), 1e-300});
    if (std::hypot(num, den) <= 1e-12 * scale) {
        return std::nullopt;
    }
    return wrap_half_turn(rad2deg(std::atan2(num, den)));
}

std::optional<double> magnification(double rho, double alpha_deg, double alpha_max_deg) {
    if (!(rho > 0.0)) {
        throw Error("magnification requires rho > 0");
    }
    const double c = std::cos(deg2rad(alpha_deg - alpha_max_deg));
    const double q = 1.0 + rho * rho - 2.0 * rho * c;
    if (q <= 1e-24) {
        return std::nullopt;
    }
    return 1.0 / std::sqrt(q);
}

std::optional<double> max_magnification(double rho) {
    if (!(rho > 0.0)) {
        throw Error("max_magnification requires rho > 0");
    }
    if (rho == 1.0) {
        return std::nullopt;
    }
    return 1.0 / std::abs(rho - 1.0);
}

std::vector<double> enumerate_moire_angles(int max_order) {
    if (max_order < 1) {
        throw Error(fmt::format("max_order must be >= 1, got {}", max_order));
    }
    std::vector<double> angles;
    for (int m = 0; m <= max_order; ++m) {
        for (int n = 0; n <= max_order; ++n) {
            if ((m == 0 && n == 0) || std::gcd(m, n) != 1) {
                continue;
            }
            angles.push_back(max_angle(m, n));
        }
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

PredictedPeak family_peak(const SceneConfig& scene, int m, int n, int barrier_order,
                          double alpha_deg) {
    const double k0 = scene.grid.wavenumber();
    const double k1 = barrier_order * scene.barrier.wavenumber();
    const TrajectoryPoint tp = trajectory_point(m, n, k0, k1, alpha_deg);

    PredictedPeak peak;
    peak.m = m;
    peak.n = n;
    peak.barrier_order = barrier_order;
    peak.wavevector = tp.z;
    peak.wavenumber = std::abs(tp.z);
    peak.max_angle_deg = rad2deg(std::arg(tp.center));
    peak.rho = std::abs(tp.center) / k1;
    peak.orientation_deg = peak.wavenumber > 0.0 ? wrap_half_turn(rad2deg(std::arg(tp.z))) : 0.0;
    peak.magnification = peak.wavenumber > 0.0 ? k1 / peak.wavenumber
                                               : std::numeric_limits<double>::infinity();
    peak.raw_amplitude = fourier_coefficient(scene.grid, m, n) *
                         fourier_coefficient(scene.barrier, barrier_order, 0);
    peak.weighted_amplitude = peak.raw_amplitude;
    return peak;
}

std::vector<PredictedPeak> predict_spectrum(const SceneConfig& scene,
                                            const SpectrumOptions& options) {
    scene.validate();
    if (!(options.visibility_fraction > 0.0 && options.visibility_fraction <= 1.0)) {
        throw Error("visibility fraction must lie in (0, 1]");
    }
    const double cutoff = options.visibility_fraction *
                          std::min(scene.grid.wavenumber(), scene.barrier.wavenumber());
    const int gb = options.grid_order_bound;

    std::vector<PredictedPeak> peaks;
    for (int m = -gb; m <= gb; ++m) {
        for (int n = -gb; n <= gb; ++n) {
            if (m == 0 && n == 0) {
                continue;
            }
            for (int p = 1; p <= options.barrier_order_bound; ++p) {
                PredictedPeak peak = family_peak(scene, m, n, p, scene.alpha_deg);
                if (peak.wavenumber < cutoff) {
                    peaks.push_back(peak);
                }
            }
        }
    }

    // (m, n, p) = q (m', n', p') with q >= 2 describes a harmonic of a fringe
    // family that is itself in the list.
    for (auto& peak : peaks) {
        const int g = std::gcd(std::gcd(std::abs(peak.m), std::abs(peak.n)), peak.barrier_order);
        if (g < 2) {
            continue;
        }
        for (int q = 2; q <= g; ++q) {
            if (g % q != 0) {
                continue;
            }
            const int fm = peak.m / q, fn = peak.n / q, fp = peak.barrier_order / q;
            const bool listed = std::any_of(peaks.begin(), peaks.end(), [&](const PredictedPeak& o) {
                return o.m == fm && o.n == fn && o.barrier_order == fp && o.raw_amplitude > 0.0;
            });
            if (listed) {
                peak.is_harmonic = true;
                break;
            }
        }
    }

    std::stable_sort(peaks.begin(), peaks.end(), [](const PredictedPeak& a, const PredictedPeak& b) {
        if (a.raw_amplitude != b.raw_amplitude) {
            return a.raw_amplitude > b.raw_amplitude;
        }
        return a.wavenumber < b.wavenumber;
    });
    return peaks;
}

}  // namespace moire
