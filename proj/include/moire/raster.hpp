#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "moire/grating.hpp"

namespace moire {

/// Row-major grayscale image. Row 0 is the top of the picture; the physical
/// y axis points up, so y decreases with the row index.
struct RasterImage {
    int width = 0;
    int height = 0;
    double pixel_pitch = 1.0;  // mm per sample
    std::vector<double> samples;

    std::string id;
    std::optional<SceneConfig> scene;  // generating scene, when synthetic
    std::optional<double> alpha_deg;

    RasterImage() = default;
    RasterImage(int w, int h, double pitch, double fill = 0.0)
        : width(w), height(h), pixel_pitch(pitch),
          samples(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

    double& at(int col, int row) { return samples[static_cast<std::size_t>(row) * width + col]; }
    double at(int col, int row) const { return samples[static_cast<std::size_t>(row) * width + col]; }

    double mean() const;

    /// Physical coordinate of a sample centre, origin at the image centre.
    Point2 position(double col, double row) const {
        return {(col + 0.5 - 0.5 * width) * pixel_pitch, (0.5 * height - row - 0.5) * pixel_pitch};
    }
};

/// Black/white reference levels; amplitudes are divided by their difference.
struct Calibration {
    double white_level = 1.0;
    double black_level = 0.0;

    double scale() const { return white_level - black_level; }

    static Calibration from_frames(const RasterImage& white, const RasterImage& black);
};

}  // namespace moire
