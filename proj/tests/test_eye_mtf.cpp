#include <gtest/gtest.h>

#include "moire/eye_mtf.hpp"

using namespace moire;

TEST(MtfParams, QuotedConstants) {
    const MTFParams p;
    EXPECT_NEAR(p.u0(), 125.8, 0.1);
    EXPECT_NEAR(p.u1(), 6.18, 0.01);
    EXPECT_NO_THROW(p.validate());
    EXPECT_THROW((MTFParams{1.0, 555.0}).validate(), Error);
    EXPECT_THROW((MTFParams{7.0, 555.0}).validate(), Error);
    EXPECT_THROW((MTFParams{4.0, 0.0}).validate(), Error);
}

TEST(MtfExact, Endpoints) {
    const MTFParams p;
    EXPECT_NEAR(mtf_exact(0.0, p), 1.0, 1e-12);
    EXPECT_EQ(mtf_exact(p.u0(), p), 0.0);
    EXPECT_EQ(mtf_exact(2.0 * p.u0(), p), 0.0);
    EXPECT_THROW(mtf_exact(-1.0, p), Error);
}

TEST(MtfExact, IndependentEvaluation) {
    // u = 10 cycles/degree, d = 4 mm, 555 nm, evaluated by hand
    const double u0 = 4.0 / 555e-6 * kPi / 180.0;
    const double u1 = 21.95 - 5.512 * 4 + 0.3922 * 16;
    const double s = 10.0 / u0;
    const double want = std::sqrt(2 / kPi) * std::sqrt(std::acos(s) - s * std::sqrt(1 - s * s)) /
                        std::pow(1 + (10.0 / u1) * (10.0 / u1), 0.62);
    EXPECT_NEAR(mtf_exact(10.0), want, 1e-12);
    EXPECT_NEAR(mtf_exact(10.0), 0.427, 1e-3);
}

TEST(MtfExact, NonIncreasingAndBounded) {
    const MTFParams p;
    double prev = 1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = mtf_exact(p.u0() * i / 1000.0, p);
        EXPECT_LE(v, prev + 1e-15);
        EXPECT_GE(v, 0.0);
        prev = v;
    }
}

TEST(MtfPoly, DirectEvaluation) {
    EXPECT_DOUBLE_EQ(mtf_poly(0.0), 1.0);
    EXPECT_NEAR(mtf_poly(10.0), 0.738, 1e-12);
    EXPECT_NEAR(mtf_poly(50.0), 0.25, 1e-12);
    // the cubic has no real root before 100: -2 + 4 - 3 + 1 = 0 exactly there
    EXPECT_NEAR(mtf_poly(100.0), 0.0, 1e-12);
}

TEST(MtfPoly, ClampsNegativeValues) {
    // raw value at 120 is -2e-6*1728000 + 4e-4*14400 - 3.6 + 1 = -0.3
    EXPECT_EQ(mtf_poly(120.0), 0.0);
    EXPECT_GE(mtf_poly(1e4), 0.0);
}

TEST(MtfPoly, TracksExactCurveNearZero) {
    for (double u = 0.0; u <= 1.5; u += 0.05) {
        EXPECT_NEAR(mtf_poly(u), mtf_exact(u), 0.02) << "u=" << u;
    }
}

TEST(PerceivedFrequency, SmallAngleGeometry) {
    EXPECT_NEAR(perceived_frequency_of_period(1000.0, 5.0), 200.0 * kPi / 180.0, 1e-12);
    EXPECT_NEAR(perceived_frequency_of_period(1000.0, 5.0), 3.49, 5e-3);
    EXPECT_NEAR(perceived_frequency(ViewingGeometry{1000.0, 1.0}, 5.0), 3.49, 5e-3);
    EXPECT_DOUBLE_EQ(perceived_frequency(ViewingGeometry{2000.0, 1.0}, 5.0),
                     2.0 * perceived_frequency(ViewingGeometry{1000.0, 1.0}, 5.0));
    EXPECT_EQ(perceived_frequency(ViewingGeometry{1000.0, 1.0}, std::numeric_limits<double>::infinity()), 0.0);
    EXPECT_THROW(perceived_frequency_of_period(0.0, 1.0), Error);
    EXPECT_THROW(perceived_frequency_of_period(500.0, -1.0), Error);
    EXPECT_THROW(perceived_frequency(ViewingGeometry{500.0, 1.0}, 0.0), Error);
}

TEST(WeightAmplitude, InfinitePeriodKeepsRawAmplitude) {
    PredictedPeak p;
    p.raw_amplitude = 0.2;
    p.wavenumber = 0.0;
    EXPECT_NEAR(weight_amplitude(p, 500.0).weighted_amplitude, 0.2, 1e-12);
}

TEST(WeightAmplitude, BeyondCutoffIsZero) {
    PredictedPeak p;
    p.raw_amplitude = 0.2;
    p.wavenumber = 20.0;  // 0.05 mm at 500 mm is ~175 cycles/degree
    EXPECT_EQ(weight_amplitude(p, 500.0).weighted_amplitude, 0.0);
}

TEST(WeightAmplitude, NeverIncreasesRaw) {
    for (double k = 0.01; k < 30.0; k *= 1.3) {
        PredictedPeak p;
        p.raw_amplitude = 0.1;
        p.wavenumber = k;
        const double w = weight_amplitude(p, 500.0).weighted_amplitude;
        EXPECT_LE(w, 0.1);
        EXPECT_GE(w, 0.0);
    }
}

TEST(WeightAmplitude, SinglePeakedAroundMaxAngle) {
    // rho = 0.9 family: barrier 1.0 mm, grid 1/0.9 mm
    SceneConfig s;
    s.grid.pitch = 1.0 / 0.9;
    s.barrier.pitch = 1.0;
    const auto at = [&](double a) { return weight_amplitude(family_peak(s, 1, 0, 1, a), 500.0).weighted_amplitude; };
    const double top = at(0.0);
    EXPECT_LT(at(2.0), top);
    EXPECT_LT(at(-2.0), top);
    for (double a = 0.25; a < 20.0; a += 0.25) {
        EXPECT_LT(at(a), at(a - 0.25));
        EXPECT_LT(at(-a), at(-a + 0.25));
    }
}
