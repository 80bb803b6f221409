#pragma once

#include <complex>
#include <vector>

#include "moire/raster.hpp"

namespace moire {

enum class Window { Rectangular, Hann, FlatTop };

/// Periodic (DFT-even) window of length n.
std::vector<double> make_window(Window kind, int n);

/// Windowed 2D DFT of a real image, stored as the non-redundant half plane.
///
/// Bin coordinates are signed integers (kx, ky) in image-index convention:
/// kx along columns, ky along rows. Any bin can be read; the missing half is
/// filled from conjugate symmetry.
class Spectrum2D {
public:
    Spectrum2D(const RasterImage& image, Window window, double subtract = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }

    std::complex<double> bin(int kx, int ky) const;
    double magnitude(int kx, int ky) const { return std::abs(bin(kx, ky)); }

    /// Sum of the 2D window, i.e. the DFT magnitude of a unit constant.
    double coherent_sum() const { return coherent_sum_; }

    /// Peak-to-mean amplitude of a real sinusoid centred on bin (kx, ky).
    double sinusoid_amplitude(int kx, int ky) const { return 2.0 * magnitude(kx, ky) / coherent_sum_; }

private:
    int width_;
    int height_;
    int half_width_;  // width / 2 + 1 stored columns
    double coherent_sum_;
    std::vector<std::complex<double>> data_;
};

}  // namespace moire
