#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "moire/analyzer.hpp"
#include "moire/image_io.hpp"
#include "moire/renderer.hpp"
#include "moire/spectral_theory.hpp"
#include "support.hpp"

using namespace moire;
namespace fs = std::filesystem;

namespace {

SceneConfig small_scene() {
    SceneConfig s;
    s.extent_mm = 8.0;  // 128 x 128
    return s;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "moire_renderer_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Render, FullyOpenLayersGiveUniformWhite) {
    SceneConfig s = small_scene();
    s.grid.opening_ratio = 1.0;
    s.barrier.opening_ratio = 1.0;
    s.alpha_deg = 17.0;
    const auto img = render(s);
    EXPECT_TRUE(std::all_of(img.samples.begin(), img.samples.end(), [](double v) { return v == 1.0; }));
}

TEST(Render, GridAloneHasAreaFractionMean) {
    SceneConfig s;
    s.grid = GratingSpec::pixel_grid(0.266, 0.3);
    s.barrier.opening_ratio = 1.0;
    EXPECT_NEAR(render(s).mean(), 0.09, 0.005);
}

TEST(Render, SamplesInUnitIntervalAndMetadata) {
    SceneConfig s = small_scene();
    s.alpha_deg = 33.3;
    const auto img = render(s);
    EXPECT_EQ(img.width, 128);
    EXPECT_EQ(img.height, 128);
    EXPECT_EQ(img.samples.size(), 128u * 128u);
    EXPECT_DOUBLE_EQ(img.pixel_pitch, 1.0 / 16.0);
    ASSERT_TRUE(img.alpha_deg.has_value());
    EXPECT_EQ(*img.alpha_deg, 33.3);
    ASSERT_TRUE(img.scene.has_value());
    EXPECT_EQ(img.scene->seed, s.seed);
    for (double v : img.samples) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Render, EnergyBound) {
    for (double a : {0.0, 12.0, 45.0, 71.0}) {
        SceneConfig s = small_scene();
        s.alpha_deg = a;
        const double bound = std::min(open_fraction(s.grid), open_fraction(s.barrier));
        EXPECT_LE(render(s).mean(), bound + 0.005);
    }
}

TEST(Render, FullTurnIsIdentical) {
    SceneConfig s = small_scene();
    s.alpha_deg = 12.5;
    const auto a = render(s);
    s.alpha_deg = 372.5;
    const auto b = render(s);
    s.alpha_deg = -347.5;
    const auto c = render(s);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.samples, c.samples);
}

TEST(Render, DeterministicAcrossWorkersAndSeeded) {
    SceneConfig s = small_scene();
    s.alpha_deg = 8.0;
    const auto one = render(s, 1);
    EXPECT_EQ(one.samples, render(s, 3).samples);
    EXPECT_EQ(one.samples, render(s, 1).samples);
    s.seed = 99;
    EXPECT_NE(one.samples, render(s, 1).samples);
}

TEST(Render, RejectsUnderResolvedSceneNamingTheGrating) {
    SceneConfig s = small_scene();
    s.resolution = 6.0;  // 1.6 samples per grid period
    try {
        render(s);
        FAIL() << "expected rejection";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("grid"), std::string::npos);
    }
    s = small_scene();
    s.barrier.pitch = 0.2;  // 3.2 samples per period
    try {
        render(s);
        FAIL() << "expected rejection";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("barrier"), std::string::npos);
    }
}

TEST(Render, EqualPitchesGivePredictedPeriod) {
    SceneConfig s;
    s.grid.pitch = 0.5;
    s.barrier.pitch = 0.5;
    s.alpha_deg = 5.0;
    const auto waves = analyze(render(s));
    ASSERT_FALSE(waves.empty());
    const auto dominant = *std::max_element(waves.begin(), waves.end(),
                                            [](const auto& a, const auto& b) { return a.amplitude < b.amplitude; });
    const double mu = *magnification(1.0, 5.0, 0.0);
    EXPECT_NEAR(dominant.period, mu * 0.5, 0.02 * mu * 0.5);
}

TEST(CalibrationFrames, WhiteAndBlackLevels) {
    const auto [white, black] = calibration_frames(small_scene());
    EXPECT_DOUBLE_EQ(white.mean(), 1.0);
    EXPECT_DOUBLE_EQ(black.mean(), 0.0);
    const auto cal = Calibration::from_frames(white, black);
    EXPECT_DOUBLE_EQ(cal.scale(), 1.0);
}

TEST(CalibrationFrames, NormalisesSinusoidContrast) {
    const auto [white, black] = calibration_frames(small_scene());
    const auto cal = Calibration::from_frames(white, black);
    auto waves = analyze(moire::testing::sinusoid(256, 0.1, 2.0, 20.0, 0.2), {}, cal);
    ASSERT_EQ(waves.size(), 1u);
    EXPECT_NEAR(waves[0].amplitude, 0.2, 0.002);

    // a dimmer screen: half the white level, half the raw contrast
    const Calibration dim{0.5, 0.0};
    waves = analyze(moire::testing::sinusoid(256, 0.1, 2.0, 20.0, 0.1, 0.0, 0.25), {}, dim);
    ASSERT_EQ(waves.size(), 1u);
    EXPECT_NEAR(waves[0].amplitude, 0.2, 0.002);
}

TEST(ImageIo, PngRoundTripWithSidecar) {
    SceneConfig s = small_scene();
    s.alpha_deg = -7.25;
    s.seed = 42;
    const auto img = render(s);
    const auto path = scratch("roundtrip.png");
    save_image(path, img);
    EXPECT_TRUE(fs::exists(sidecar_path(path)));
    const auto back = load_image(path);
    ASSERT_EQ(back.width, img.width);
    ASSERT_EQ(back.height, img.height);
    EXPECT_DOUBLE_EQ(back.pixel_pitch, img.pixel_pitch);
    EXPECT_EQ(back.id, img.id);
    ASSERT_TRUE(back.alpha_deg && back.scene);
    EXPECT_EQ(*back.alpha_deg, -7.25);
    EXPECT_EQ(back.scene->seed, 42u);
    EXPECT_EQ(back.scene->barrier.pitch, s.barrier.pitch);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        EXPECT_NEAR(back.samples[i], img.samples[i], 0.5 / 65535.0 + 1e-12);
    }
}

TEST(ImageIo, PgmRoundTrip) {
    RasterImage img(70, 65, 0.2);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        img.samples[i] = (i % 97) / 96.0;
    }
    img.id = "ramp";
    const auto path = scratch("ramp.pgm");
    save_image(path, img);
    const auto back = load_image(path);
    ASSERT_EQ(back.width, 70);
    ASSERT_EQ(back.height, 65);
    EXPECT_DOUBLE_EQ(back.pixel_pitch, 0.2);
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
        EXPECT_NEAR(back.samples[i], img.samples[i], 0.5 / 65535.0 + 1e-12);
    }
}

TEST(ImageIo, ReadsBinaryPgmWithoutSidecar) {
    const auto path = scratch("binary.pgm");
    fs::remove(sidecar_path(path));
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n# comment\n3 2\n255\n";
        const unsigned char px[6] = {0, 51, 102, 153, 204, 255};
        out.write(reinterpret_cast<const char*>(px), 6);
    }
    const auto img = load_image(path);
    ASSERT_EQ(img.width, 3);
    ASSERT_EQ(img.height, 2);
    EXPECT_NEAR(img.at(1, 0), 0.2, 1e-12);
    EXPECT_NEAR(img.at(2, 1), 1.0, 1e-12);
    EXPECT_EQ(img.id, "binary");
    EXPECT_FALSE(img.scene.has_value());
}

TEST(ImageIo, Errors) {
    RasterImage img(4, 4, 1.0);
    EXPECT_THROW(save_image(scratch("x.tiff"), img), Error);
    EXPECT_THROW(load_image(scratch("does_not_exist.png")), Error);
    const auto bad = scratch("bad.pgm");
    std::ofstream(bad) << "P7\n1 1\n255\n0\n";
    EXPECT_THROW(load_image(bad), Error);
}
