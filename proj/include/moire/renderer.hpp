#pragma once

#include <utility>

#include "moire/raster.hpp"

namespace moire {

/// Minimum raster samples per grating period accepted by render().
constexpr double kMinSamplesPerPeriod = 4.0;

/// Rasterises the product of the grid and the rotated barrier. Each output
/// sample averages supersample^2 stratified, jittered sub-samples; the jitter
/// stream is seeded from scene.seed and the row index, so the result does not
/// depend on `workers`.
///
/// Throws moire::Error if either grating has fewer than
/// kMinSamplesPerPeriod raster samples per period.
RasterImage render(const SceneConfig& scene, int workers = 1);

/// White (both layers fully open) and black (uniform 0) reference frames.
std::pair<RasterImage, RasterImage> calibration_frames(const SceneConfig& scene);

}  // namespace moire
