#include "moire/renderer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include <fmt/core.h>

namespace moire {

double RasterImage::mean() const {
    if (samples.empty()) {
        return 0.0;
    }
    return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

Calibration Calibration::from_frames(const RasterImage& white, const RasterImage& black) {
    Calibration c{white.mean(), black.mean()};
    if (!(c.scale() > 0.0)) {
        throw Error("calibration white level must exceed black level");
    }
    return c;
}

namespace {

// 1D binary profile with the division hoisted out of the inner loop.
struct Profile {
    double inv_pitch;
    double ratio;
    double offset;

    explicit Profile(const GratingSpec& g, int axis)
        : inv_pitch(1.0 / g.pitch), ratio(g.opening_ratio),
          offset(0.5 * g.opening_ratio - g.phase[axis]) {}

    bool open(double coord) const {
        if (ratio >= 1.0) {
            return true;
        }
        const double w = coord * inv_pitch + offset;
        const double f = w - std::floor(w);
        return f > 0.0 && f <= ratio;
    }
};

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_resolution(const SceneConfig& scene) {
    const auto check = [&](const GratingSpec& g, const char* name) {
        const double samples = g.pitch * scene.resolution;
        if (samples < kMinSamplesPerPeriod) {
            throw Error(fmt::format(
                "scene under-resolved: {} pitch {} mm gets {:.3f} samples/period at {} samples/mm "
                "(need >= {})",
                name, g.pitch, samples, scene.resolution, kMinSamplesPerPeriod));
        }
    };
    check(scene.grid, "grid");
    check(scene.barrier, "barrier");
}

double normalized_angle(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0.0) {
        a += 360.0;
    }
    return a;
}

}  // namespace

RasterImage render(const SceneConfig& scene, int workers) {
    scene.validate();
    check_resolution(scene);

    const int size = scene.raster_size();
    if (size < 1) {
        throw Error("scene raster is empty");
    }
    RasterImage image(size, size, 1.0 / scene.resolution);
    image.scene = scene;
    image.alpha_deg = scene.alpha_deg;
    image.id = fmt::format("alpha_{:+.3f}", scene.alpha_deg);

    const Profile gx(scene.grid, 0);
    const Profile gy(scene.grid, 1);
    const Profile bar(scene.barrier, 0);
    const double a = deg2rad(normalized_angle(scene.alpha_deg));
    const double ca = std::cos(a);
    const double sa = std::sin(a);
    const int ss = scene.supersample;
    const double sub = image.pixel_pitch / ss;
    const double norm = 1.0 / (ss * ss);

    const auto render_row = [&](int row) {
        std::mt19937_64 rng(scene.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(row + 1)));
        const Point2 origin = image.position(0.0, row);
        // top-left corner of the sample footprint
        const double x0 = origin.x - 0.5 * image.pixel_pitch;
        const double y0 = origin.y + 0.5 * image.pixel_pitch;
        // multi-jitter: cell (i, j) takes x sub-stratum px[i][j] and y sub-stratum
        // py[j][i], so the ss^2 samples also fill every x and y stratum of width sub/ss
        std::vector<int> px(ss * ss), py(ss * ss);
        const auto shuffle_rows = [&](std::vector<int>& perm) {
            for (int r = 0; r < ss; ++r) {
                int* p = perm.data() + r * ss;
                std::iota(p, p + ss, 0);
                for (int k = ss - 1; k > 0; --k) {
                    std::swap(p[k], p[rng() % static_cast<std::uint64_t>(k + 1)]);
                }
            }
        };
        for (int col = 0; col < size; ++col) {
            const double xc = x0 + col * image.pixel_pitch;
            shuffle_rows(px);
            shuffle_rows(py);
            int hits = 0;
            for (int j = 0; j < ss; ++j) {
                for (int i = 0; i < ss; ++i) {
                    const double x = xc + (i + (px[i * ss + j] + uniform01(rng)) / ss) * sub;
                    const double y = y0 - (j + (py[j * ss + i] + uniform01(rng)) / ss) * sub;
                    if (gx.open(x) && gy.open(y) && bar.open(x * ca + y * sa)) {
                        ++hits;
                    }
                }
            }
            image.at(col, row) = hits * norm;
        }
    };

    const int n_workers = std::clamp(workers, 1, size);
    if (n_workers == 1) {
        for (int row = 0; row < size; ++row) {
            render_row(row);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (int row = next++; row < size; row = next++) {
                    render_row(row);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return image;
}

std::pair<RasterImage, RasterImage> calibration_frames(const SceneConfig& scene) {
    SceneConfig open = scene;
    open.grid.opening_ratio = 1.0;
    open.barrier.opening_ratio = 1.0;
    RasterImage white = render(open);
    white.id = "white";
    RasterImage black(white.width, white.height, white.pixel_pitch, 0.0);
    black.id = "black";
    black.scene = scene;
    return {std::move(white), std::move(black)};
}

}  // namespace moire
