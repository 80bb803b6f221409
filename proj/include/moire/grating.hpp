#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace moire {

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Thrown for invalid inputs across the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

enum class GratingKind { PixelGrid2D, LinearBarrier1D };

std::string to_string(GratingKind kind);
GratingKind grating_kind_from_string(const std::string& name);

/// One periodic binary layer.
///
/// Pitch is in millimetres. The opening ratio is the transparent fraction of
/// one period (per axis for the 2D grid). Phase is a fraction of a period;
/// phase 0 centres an opening on the origin. The 1D barrier only uses
/// phase[0].
struct GratingSpec {
    GratingKind kind = GratingKind::LinearBarrier1D;
    double pitch = 1.0;
    double opening_ratio = 0.5;
    std::array<double, 2> phase{0.0, 0.0};

    /// Fundamental wavenumber in cycles/mm.
    double wavenumber() const { return 1.0 / pitch; }

    /// Throws moire::Error when an invariant is violated.
    void validate() const;

    static GratingSpec pixel_grid(double pitch, double opening_ratio);
    static GratingSpec barrier(double pitch, double opening_ratio);
};

/// Two stacked layers: a static pixel grid and a barrier rotated by alpha.
struct SceneConfig {
    GratingSpec grid = GratingSpec::pixel_grid(0.266, 0.7);
    GratingSpec barrier = GratingSpec::barrier(0.339, 0.3);
    double alpha_deg = 0.0;
    double extent_mm = 32.0;      // square raster side
    double resolution = 16.0;     // raster samples per mm
    int supersample = 4;          // sub-samples per raster sample per axis
    std::uint64_t seed = 1;

    void validate() const;

    /// Pitch ratio of the fundamental pair, pitch_barrier / pitch_grid.
    double rho() const { return barrier.pitch / grid.pitch; }

    int raster_size() const;
};

namespace detail {

/// Open-interval test for a 1D binary profile. The opening occupies
/// (-ratio/2, +ratio/2] around every integer of `coord / pitch - phase`.
inline bool open_1d(double coord, double pitch, double ratio, double phase) {
    if (ratio >= 1.0) {
        return true;
    }
    const double w = coord / pitch - phase + 0.5 * ratio;
    const double f = w - std::floor(w);
    return f > 0.0 && f <= ratio;
}

}  // namespace detail

/// Binary transmittance (0 or 1) of `spec` at `point`. `rotation_deg`
/// rotates the grating axes counter-clockwise about the origin.
double transmittance(const GratingSpec& spec, Point2 point, double rotation_deg);

/// Magnitude of the complex Fourier-series coefficient of order
/// (order_x, order_y). For the 1D barrier order_y must be 0. The DC term is
/// the open fraction: r for the barrier, r^2 for the grid.
double fourier_coefficient(const GratingSpec& spec, int order_x, int order_y);

/// 1D square-wave coefficient magnitude |sin(pi p r)| / (pi |p|), r at p = 0.
double square_wave_coefficient(double opening_ratio, int order);

/// Mean transmittance over one period (r or r^2).
double open_fraction(const GratingSpec& spec);

}  // namespace moire
