#pragma once

#include <cmath>
#include <random>

#include "moire/raster.hpp"

namespace moire::testing {

// A plane wave 0.5 + contrast*cos(2 pi (f . x) + phase) on an n x n raster.
// Orientation is the wavevector direction in the physical (y-up) frame.
inline RasterImage sinusoid(int n, double pixel_pitch, double period_mm, double orientation_deg,
                            double contrast, double phase = 0.0, double mean = 0.5) {
    RasterImage img(n, n, pixel_pitch);
    const double fx = std::cos(deg2rad(orientation_deg)) / period_mm;
    const double fy = std::sin(deg2rad(orientation_deg)) / period_mm;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const Point2 p = img.position(c, r);
            img.at(c, r) = mean + contrast * std::cos(2.0 * kPi * (fx * p.x + fy * p.y) + phase);
        }
    }
    return img;
}

inline void add_sinusoid(RasterImage& img, double period_mm, double orientation_deg, double contrast,
                         double phase = 0.0) {
    const double fx = std::cos(deg2rad(orientation_deg)) / period_mm;
    const double fy = std::sin(deg2rad(orientation_deg)) / period_mm;
    for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
            const Point2 p = img.position(c, r);
            img.at(c, r) += contrast * std::cos(2.0 * kPi * (fx * p.x + fy * p.y) + phase);
        }
    }
}

// Wrapped absolute difference of two orientations in degrees.
inline double angle_gap(double a, double b) {
    double d = std::fmod(std::abs(a - b), 180.0);
    return std::min(d, 180.0 - d);
}

}  // namespace moire::testing
