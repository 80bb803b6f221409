#include "moire/spectrum.hpp"

#include <cmath>
#include <mutex>
#include <numeric>

#include <fftw3.h>

namespace moire {

namespace {

// fftw planner calls are not thread-safe.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

int wrap_index(int k, int n) {
    int r = k % n;
    return r < 0 ? r + n : r;
}

}  // namespace

std::vector<double> make_window(Window kind, int n) {
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    const double step = 2.0 * kPi / n;
    switch (kind) {
        case Window::Rectangular:
            break;
        case Window::Hann:
            for (int i = 0; i < n; ++i) {
                w[i] = 0.5 - 0.5 * std::cos(step * i);
            }
            break;
        case Window::FlatTop: {
            // five-term flat top, passband ripple well below 0.1 %
            constexpr double a0 = 0.21557895, a1 = 0.41663158, a2 = 0.277263158;
            constexpr double a3 = 0.083578947, a4 = 0.006947368;
            for (int i = 0; i < n; ++i) {
                const double t = step * i;
                w[i] = a0 - a1 * std::cos(t) + a2 * std::cos(2 * t) - a3 * std::cos(3 * t) +
                       a4 * std::cos(4 * t);
            }
            break;
        }
    }
    return w;
}

Spectrum2D::Spectrum2D(const RasterImage& image, Window window, double subtract)
    : width_(image.width), height_(image.height), half_width_(image.width / 2 + 1) {
    const std::vector<double> wx = make_window(window, width_);
    const std::vector<double> wy = make_window(window, height_);
    coherent_sum_ = std::accumulate(wx.begin(), wx.end(), 0.0) *
                    std::accumulate(wy.begin(), wy.end(), 0.0);

    const std::size_t n_in = static_cast<std::size_t>(width_) * height_;
    const std::size_t n_out = static_cast<std::size_t>(half_width_) * height_;
    double* in = fftw_alloc_real(n_in);
    fftw_complex* out = fftw_alloc_complex(n_out);
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_2d(height_, width_, in, out, FFTW_ESTIMATE);
    }
    for (int row = 0; row < height_; ++row) {
        for (int col = 0; col < width_; ++col) {
            in[static_cast<std::size_t>(row) * width_ + col] =
                (image.at(col, row) - subtract) * wx[col] * wy[row];
        }
    }
    fftw_execute(plan);
    data_.resize(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        data_[i] = {out[i][0], out[i][1]};
    }
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
}

std::complex<double> Spectrum2D::bin(int kx, int ky) const {
    int cx = wrap_index(kx, width_);
    int cy = wrap_index(ky, height_);
    bool conj = false;
    if (cx >= half_width_) {
        cx = wrap_index(-kx, width_);
        cy = wrap_index(-ky, height_);
        conj = true;
    }
    const std::complex<double> v = data_[static_cast<std::size_t>(cy) * half_width_ + cx];
    return conj ? std::conj(v) : v;
}

}  // namespace moire
