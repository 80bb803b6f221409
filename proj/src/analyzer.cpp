#include "moire/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>

#include <fmt/core.h>

#include "moire/spectral_theory.hpp"

namespace moire {

namespace {

constexpr int kMinImageSize = 64;

struct Candidate {
    int kx;
    int ky;
    double u;  // sub-bin position
    double v;
    double hann_amplitude;
    WaveMeasurement wave;
};

// Vertex offset of a parabola through ln(a), ln(b), ln(c) at -1, 0, +1.
double log_parabola_offset(double a, double b, double c) {
    constexpr double tiny = 1e-300;
    const double la = std::log(std::max(a, tiny));
    const double lb = std::log(std::max(b, tiny));
    const double lc = std::log(std::max(c, tiny));
    const double den = la - 2.0 * lb + lc;
    if (!(den < 0.0)) {
        return 0.0;
    }
    return std::clamp(0.5 * (la - lc) / den, -0.5, 0.5);
}

bool is_local_max(const Spectrum2D& s, int kx, int ky, double centre) {
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            if ((dx != 0 || dy != 0) && !(centre > s.magnitude(kx + dx, ky + dy))) {
                return false;
            }
        }
    }
    return true;
}

double local_floor(const Spectrum2D& s, int kx, int ky) {
    constexpr int inner = 6, outer = 10;
    std::vector<double> ring;
    ring.reserve((2 * outer + 1) * (2 * outer + 1));
    for (int dy = -outer; dy <= outer; ++dy) {
        for (int dx = -outer; dx <= outer; ++dx) {
            if (std::max(std::abs(dx), std::abs(dy)) >= inner) {
                ring.push_back(s.magnitude(kx + dx, ky + dy));
            }
        }
    }
    auto mid = ring.begin() + static_cast<std::ptrdiff_t>(ring.size() / 2);
    std::nth_element(ring.begin(), mid, ring.end());
    return *mid;
}

// Windowed image whose DTFT can be read at fractional bins. A plane wave under
// a separable window gives a separable peak, so refining u and v apart is
// enough.
class ZoomDTFT {
public:
    ZoomDTFT(const RasterImage& image, Window window, double mean)
        : w_(image.width), h_(image.height), data_(image.samples.size()) {
        const auto wx = make_window(window, w_);
        const auto wy = make_window(window, h_);
        for (int r = 0; r < h_; ++r) {
            for (int c = 0; c < w_; ++c) {
                data_[static_cast<std::size_t>(r) * w_ + c] = wy[r] * wx[c] * (image.at(c, r) - mean);
            }
        }
    }

    // Row transforms at horizontal bin u.
    std::vector<std::complex<double>> rows_at(double u) const {
        const auto tw = twiddles(u, w_);
        std::vector<std::complex<double>> out(h_);
        for (int r = 0; r < h_; ++r) {
            const double* row = &data_[static_cast<std::size_t>(r) * w_];
            std::complex<double> acc = 0.0;
            for (int c = 0; c < w_; ++c) {
                acc += row[c] * tw[c];
            }
            out[r] = acc;
        }
        return out;
    }

    double log_magnitude(const std::vector<std::complex<double>>& rows, double v) const {
        const auto tw = twiddles(v, h_);
        std::complex<double> acc = 0.0;
        for (int r = 0; r < h_; ++r) {
            acc += rows[r] * tw[r];
        }
        return std::log(std::max(std::abs(acc), 1e-300));
    }

    // Moves (u, v) onto the peak of the magnitude.
    void refine(double& u, double& v) const {
        for (double step : {0.1, 0.02}) {
            const auto centre = rows_at(u);
            const double l0 = log_magnitude(centre, v);
            const double lu_m = log_magnitude(rows_at(u - step), v);
            const double lu_p = log_magnitude(rows_at(u + step), v);
            const double lv_m = log_magnitude(centre, v - step);
            const double lv_p = log_magnitude(centre, v + step);
            u += step * vertex(lu_m, l0, lu_p);
            v += step * vertex(lv_m, l0, lv_p);
        }
    }

private:
    static std::vector<std::complex<double>> twiddles(double k, int n) {
        std::vector<std::complex<double>> tw(n);
        for (int i = 0; i < n; ++i) {
            tw[i] = std::polar(1.0, -2.0 * kPi * k * i / n);
        }
        return tw;
    }

    static double vertex(double a, double b, double c) {
        const double den = a - 2.0 * b + c;
        if (!(den < 0.0)) {
            return 0.0;
        }
        return std::clamp(0.5 * (a - c) / den, -2.0, 2.0);
    }

    int w_;
    int h_;
    std::vector<double> data_;
};

// Amplitude of a plane wave at a known fractional bin by weighted least
// squares on {cos, sin, 1}. For many cycles this is the windowed DFT reading;
// near DC it also absorbs the wave's own mirror image and the residual mean,
// which a single bin read cannot separate under a wide window.
class WindowedFit {
public:
    WindowedFit(const RasterImage& image, Window window)
        : w_(image.width), h_(image.height), wx_(make_window(window, w_)), wy_(make_window(window, h_)),
          data_(image.samples.size()) {
        double sx = 0.0, sy = 0.0;
        for (double v : wx_) sx += v;
        for (double v : wy_) sy += v;
        sum_w_ = sx * sy;
        for (int r = 0; r < h_; ++r) {
            for (int c = 0; c < w_; ++c) {
                const double wxy = wy_[r] * wx_[c];
                const std::size_t i = static_cast<std::size_t>(r) * w_ + c;
                data_[i] = wxy * image.samples[i];
                sum_wx_ += data_[i];
            }
        }
    }

    double amplitude(double u, double v) const {
        using C = std::complex<double>;
        const auto tu = twiddles(u, w_);
        const auto tv = twiddles(v, h_);
        // P = sum w x e^{-j theta}
        C p = 0.0;
        for (int r = 0; r < h_; ++r) {
            const double* row = &data_[static_cast<std::size_t>(r) * w_];
            C acc = 0.0;
            for (int c = 0; c < w_; ++c) {
                acc += row[c] * tu[c];
            }
            p += acc * tv[r];
        }
        const C e1 = window_sum(wx_, u) * window_sum(wy_, v);
        const C e2 = window_sum(wx_, 2.0 * u) * window_sum(wy_, 2.0 * v);

        // normal equations for x = a cos + b sin + c0
        const double cc = 0.5 * (sum_w_ + e2.real());
        const double ss = 0.5 * (sum_w_ - e2.real());
        const double cs = -0.5 * e2.imag();
        const double c1 = e1.real();
        const double s1 = -e1.imag();
        const double m[3][3] = {{cc, cs, c1}, {cs, ss, s1}, {c1, s1, sum_w_}};
        const double rhs[3] = {p.real(), -p.imag(), sum_wx_};
        const auto det3 = [](const double a[3][3]) {
            return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                   a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                   a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        };
        const double det = det3(m);
        if (!(std::abs(det) > 0.0)) {
            return 2.0 * std::abs(p) / sum_w_;
        }
        double coef[2];
        for (int k = 0; k < 2; ++k) {
            double mk[3][3];
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    mk[i][j] = j == k ? rhs[i] : m[i][j];
                }
            }
            coef[k] = det3(mk) / det;
        }
        return std::hypot(coef[0], coef[1]);
    }

private:
    static std::vector<std::complex<double>> twiddles(double k, int n) {
        std::vector<std::complex<double>> tw(n);
        for (int i = 0; i < n; ++i) {
            tw[i] = std::polar(1.0, -2.0 * kPi * k * i / n);
        }
        return tw;
    }

    static std::complex<double> window_sum(const std::vector<double>& w, double k) {
        const int n = static_cast<int>(w.size());
        std::complex<double> acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += w[i] * std::polar(1.0, -2.0 * kPi * k * i / n);
        }
        return acc;
    }

    int w_;
    int h_;
    std::vector<double> wx_;
    std::vector<double> wy_;
    std::vector<double> data_;  // window * image
    double sum_w_ = 0.0;
    double sum_wx_ = 0.0;
};

}  // namespace

WaveMeasurement WaveMeasurement::from_wavevector(double fx, double fy, double amplitude, double snr) {
    WaveMeasurement w;
    w.wavenumber = std::hypot(fx, fy);
    w.orientation_deg = wrap_half_turn(rad2deg(std::atan2(fy, fx)));
    w.period = 1.0 / w.wavenumber;
    w.amplitude = amplitude;
    w.snr = snr;
    return w;
}

void AnalyzerConfig::validate() const {
    if (!(amplitude_floor > 0.0 && amplitude_floor < 1.0)) {
        throw Error(fmt::format("amplitude_floor must lie in (0, 1), got {}", amplitude_floor));
    }
    if (min_amplitude < 0.0 || min_snr < 0.0) {
        throw Error("min_amplitude and min_snr must be non-negative");
    }
    if (max_frequency && !(*max_frequency > 0.0)) {
        throw Error("max_frequency must be positive");
    }
    if (max_peaks < 1) {
        throw Error("max_peaks must be >= 1");
    }
    if (dc_guard_bins < 0) {
        throw Error("dc_guard_bins must be non-negative");
    }
}

double effective_max_frequency(const RasterImage& image, const AnalyzerConfig& config) {
    if (config.max_frequency) {
        return *config.max_frequency;
    }
    if (image.scene) {
        return 0.8 * std::min(image.scene->grid.wavenumber(), image.scene->barrier.wavenumber());
    }
    return 0.25 / image.pixel_pitch;
}

double orientation_distance(double a_deg, double b_deg) {
    return std::abs(wrap_half_turn(a_deg - b_deg));
}

double wrapped_orientation(double phi_deg, double alpha_deg) {
    return wrap_half_turn(phi_deg - alpha_deg);
}

std::vector<WaveMeasurement> suppress_harmonics(const std::vector<WaveMeasurement>& peaks,
                                                double angle_tol_deg, double ratio_tol) {
    std::vector<bool> drop(peaks.size(), false);
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        for (std::size_t j = 0; j < peaks.size(); ++j) {
            if (i == j || !(peaks[j].wavenumber > peaks[i].wavenumber)) {
                continue;
            }
            if (orientation_distance(peaks[i].orientation_deg, peaks[j].orientation_deg) > angle_tol_deg) {
                continue;
            }
            // a harmonic is never stronger than its fundamental; without this a weak
            // aliasing residue at k/3 would swallow a real fringe at k
            if (peaks[j].amplitude > peaks[i].amplitude) {
                continue;
            }
            const double ratio = peaks[j].wavenumber / peaks[i].wavenumber;
            const double q = std::round(ratio);
            if (q >= 2.0 && std::abs(ratio - q) <= ratio_tol) {
                drop[j] = true;
            }
        }
    }
    std::vector<WaveMeasurement> kept;
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        if (!drop[i]) {
            kept.push_back(peaks[i]);
        }
    }
    return kept;
}

std::vector<WaveMeasurement> analyze(const RasterImage& image, const AnalyzerConfig& config,
                                     const Calibration& calibration) {
    config.validate();
    if (image.width < kMinImageSize || image.height < kMinImageSize) {
        throw Error(fmt::format("image {}x{} is too small for analysis (need >= {}x{})",
                                image.width, image.height, kMinImageSize, kMinImageSize));
    }
    if (!(calibration.scale() > 0.0)) {
        throw Error("calibration scale must be positive");
    }

    const double mean = image.mean();
    const Spectrum2D geometry(image, config.window_for_geometry, mean);
    const Spectrum2D amplitude(image, config.window_for_amplitude, mean);

    const double dfx = 1.0 / (image.width * image.pixel_pitch);
    const double dfy = 1.0 / (image.height * image.pixel_pitch);
    const double fmax = effective_max_frequency(image, config);
    const int kx_max = std::min(static_cast<int>(std::ceil(fmax / dfx)) + 1, image.width / 2 - 2);
    const int ky_max = std::min(static_cast<int>(std::ceil(fmax / dfy)) + 1, image.height / 2 - 2);
    const int guard = config.dc_guard_bins;

    std::vector<Candidate> candidates;
    for (int ky = -ky_max; ky <= ky_max; ++ky) {
        for (int kx = 0; kx <= kx_max; ++kx) {
            if (kx == 0 && ky <= 0) {
                continue;  // conjugate half
            }
            if (kx <= guard && std::abs(ky) <= guard) {
                continue;
            }
            const double mag = geometry.magnitude(kx, ky);
            if (!(mag > 0.0) || !is_local_max(geometry, kx, ky, mag)) {
                continue;
            }
            double dx = 0.0, dy = 0.0;
            if (config.subbin_refinement) {
                dx = log_parabola_offset(geometry.magnitude(kx - 1, ky), mag, geometry.magnitude(kx + 1, ky));
                dy = log_parabola_offset(geometry.magnitude(kx, ky - 1), mag, geometry.magnitude(kx, ky + 1));
            }
            // row index grows downwards, physical y upwards
            const double fx = (kx + dx) * dfx;
            const double fy = -(ky + dy) * dfy;
            if (std::hypot(fx, fy) > fmax) {
                continue;
            }
            const int ax = static_cast<int>(std::lround(kx + dx));
            const int ay = static_cast<int>(std::lround(ky + dy));
            const double amp = amplitude.sinusoid_amplitude(ax, ay) / calibration.scale();
            const double floor = local_floor(geometry, kx, ky);
            const double snr = floor > 0.0 ? mag / floor : std::numeric_limits<double>::max();
            candidates.push_back({kx, ky, kx + dx, ky + dy, geometry.sinusoid_amplitude(kx, ky),
                                  WaveMeasurement::from_wavevector(fx, fy, amp, snr)});
        }
    }
    if (candidates.empty()) {
        return {};
    }

    const double strongest_geometry =
        std::max_element(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            return a.hann_amplitude < b.hann_amplitude;
        })->hann_amplitude;

    std::erase_if(candidates, [&](const Candidate& c) {
        return c.hann_amplitude < config.amplitude_floor * strongest_geometry;
    });
    const double strongest =
        std::max_element(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            return a.wave.amplitude < b.wave.amplitude;
        })->wave.amplitude;
    std::erase_if(candidates, [&](const Candidate& c) {
        const WaveMeasurement& w = c.wave;
        return w.amplitude < config.amplitude_floor * strongest || w.amplitude < config.min_amplitude ||
               w.snr < config.min_snr;
    });

    // the three-point fit is biased by the window shape; finish on the DTFT,
    // then take the amplitude at the final position
    std::vector<WaveMeasurement> waves;
    std::optional<ZoomDTFT> zoom;
    std::optional<WindowedFit> fit;
    for (auto& c : candidates) {
        if (config.subbin_refinement) {
            if (!zoom) {
                zoom.emplace(image, config.window_for_geometry, mean);
            }
            double u = c.u, v = c.v;
            zoom->refine(u, v);
            if (std::abs(u - c.kx) <= 1.0 && std::abs(v - c.ky) <= 1.0) {
                c.u = u;
                c.v = v;
            }
        }
        if (!fit) {
            fit.emplace(image, config.window_for_amplitude);
        }
        const double amp = fit->amplitude(c.u, c.v) / calibration.scale();
        c.wave = WaveMeasurement::from_wavevector(c.u * dfx, -c.v * dfy, amp, c.wave.snr);
        if (c.wave.wavenumber <= fmax) {
            waves.push_back(c.wave);
        }
    }

    waves = suppress_harmonics(waves, config.harmonic_angle_tol_deg, config.harmonic_ratio_tol);

    double top = 0.0;
    for (const auto& w : waves) {
        top = std::max(top, w.amplitude);
    }
    const double strong_level = std::min(1.0, 10.0 * config.amplitude_floor) * top;
    std::sort(waves.begin(), waves.end(), [&](const WaveMeasurement& a, const WaveMeasurement& b) {
        const bool sa = a.amplitude >= strong_level;
        const bool sb = b.amplitude >= strong_level;
        if (sa != sb) {
            return sa;
        }
        if (sa && a.period != b.period) {
            return a.period > b.period;
        }
        if (a.amplitude != b.amplitude) {
            return a.amplitude > b.amplitude;
        }
        return a.orientation_deg < b.orientation_deg;
    });
    if (static_cast<int>(waves.size()) > config.max_peaks) {
        waves.resize(static_cast<std::size_t>(config.max_peaks));
    }
    return waves;
}

}  // namespace moire
