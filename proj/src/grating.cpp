#include "moire/grating.hpp"

#include <cmath>
#include <fmt/core.h>

namespace moire {

std::string to_string(GratingKind kind) {
    switch (kind) {
        case GratingKind::PixelGrid2D: return "pixel_grid_2d";
        case GratingKind::LinearBarrier1D: return "linear_barrier_1d";
    }
    return "unknown";
}

GratingKind grating_kind_from_string(const std::string& name) {
    if (name == "pixel_grid_2d" || name == "grid") {
        return GratingKind::PixelGrid2D;
    }
    if (name == "linear_barrier_1d" || name == "barrier") {
        return GratingKind::LinearBarrier1D;
    }
    throw Error(fmt::format("unknown grating kind '{}'", name));
}

void GratingSpec::validate() const {
    if (!(pitch > 0.0) || !std::isfinite(pitch)) {
        throw Error(fmt::format("grating pitch must be positive, got {}", pitch));
    }
    if (!(opening_ratio > 0.0 && opening_ratio <= 1.0)) {
        throw Error(fmt::format("opening ratio must lie in (0, 1], got {}", opening_ratio));
    }
    for (double p : phase) {
        if (!(p >= 0.0 && p < 1.0)) {
            throw Error(fmt::format("phase must lie in [0, 1), got {}", p));
        }
    }
}

GratingSpec GratingSpec::pixel_grid(double pitch, double opening_ratio) {
    return GratingSpec{GratingKind::PixelGrid2D, pitch, opening_ratio, {0.0, 0.0}};
}

GratingSpec GratingSpec::barrier(double pitch, double opening_ratio) {
    return GratingSpec{GratingKind::LinearBarrier1D, pitch, opening_ratio, {0.0, 0.0}};
}

void SceneConfig::validate() const {
    grid.validate();
    barrier.validate();
    if (grid.kind != GratingKind::PixelGrid2D) {
        throw Error("scene grid layer must be a 2D pixel grid");
    }
    if (barrier.kind != GratingKind::LinearBarrier1D) {
        throw Error("scene barrier layer must be a 1D linear barrier");
    }
    if (!std::isfinite(alpha_deg)) {
        throw Error("rotation angle must be finite");
    }
    if (!(extent_mm > 0.0) || !(resolution > 0.0)) {
        throw Error("raster extent and resolution must be positive");
    }
    if (supersample < 1) {
        throw Error(fmt::format("supersample must be >= 1, got {}", supersample));
    }
}

int SceneConfig::raster_size() const {
    return static_cast<int>(std::lround(extent_mm * resolution));
}

double transmittance(const GratingSpec& spec, Point2 point, double rotation_deg) {
    const double a = deg2rad(rotation_deg);
    const double c = std::cos(a);
    const double s = std::sin(a);
    // coordinates along the rotated grating axes
    const double u = point.x * c + point.y * s;
    const double v = -point.x * s + point.y * c;
    const bool open_u = detail::open_1d(u, spec.pitch, spec.opening_ratio, spec.phase[0]);
    if (spec.kind == GratingKind::LinearBarrier1D) {
        return open_u ? 1.0 : 0.0;
    }
    const bool open_v = detail::open_1d(v, spec.pitch, spec.opening_ratio, spec.phase[1]);
    return (open_u && open_v) ? 1.0 : 0.0;
}

double square_wave_coefficient(double opening_ratio, int order) {
    if (order == 0) {
        return opening_ratio;
    }
    if (opening_ratio >= 1.0) {
        return 0.0;
    }
    const double p = static_cast<double>(order);
    return std::abs(std::sin(kPi * p * opening_ratio)) / (kPi * std::abs(p));
}

double fourier_coefficient(const GratingSpec& spec, int order_x, int order_y) {
    if (spec.kind == GratingKind::LinearBarrier1D) {
        if (order_y != 0) {
            throw Error(fmt::format(
                "a 1D barrier has no spectral component with order_y = {}", order_y));
        }
        return square_wave_coefficient(spec.opening_ratio, order_x);
    }
    return square_wave_coefficient(spec.opening_ratio, order_x) *
           square_wave_coefficient(spec.opening_ratio, order_y);
}

double open_fraction(const GratingSpec& spec) {
    return spec.kind == GratingKind::PixelGrid2D ? spec.opening_ratio * spec.opening_ratio
                                                 : spec.opening_ratio;
}

}  // namespace moire
