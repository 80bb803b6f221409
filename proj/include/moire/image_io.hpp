#pragma once

#include <filesystem>

#include "moire/raster.hpp"

namespace moire {

/// 16-bit linear grayscale PNG. Samples are clamped to [0, 1].
void write_png16(const std::filesystem::path& path, const RasterImage& image);

/// Plain-text (P2) PGM with maxval 65535.
void write_pgm(const std::filesystem::path& path, const RasterImage& image);

/// Writes the image in the format implied by the extension (.png or .pgm)
/// together with a `<stem>.json` metadata sidecar.
void save_image(const std::filesystem::path& path, const RasterImage& image);

/// Reads PNG (any bit depth, colour converted to luminance) or PGM (P2/P5).
/// Picks up a `<stem>.json` sidecar when one exists next to the file.
RasterImage load_image(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& image_path);

}  // namespace moire
