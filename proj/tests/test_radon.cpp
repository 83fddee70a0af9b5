#include <cmath>
#include <cstring>
#include <random>

#include <gtest/gtest.h>

#include "lrd/radon.hpp"
#include "oracles/radon_oracle.hpp"
#include "test_util.hpp"

using namespace lrd;

namespace {

double peak_relative_error(std::span<const double> got, const std::vector<double>& want) {
    return testutil::max_abs_diff(got, want) / testutil::max_abs(want);
}

} // namespace

TEST(angle_set, equidistant_over_half_turn) {
    const AngleSet a(18);
    ASSERT_EQ(a.size(), 18u);
    for (std::size_t j = 0; j < 18; ++j) EXPECT_DOUBLE_EQ(a.degrees(j), 10.0 * j);
    EXPECT_EQ(a.index_of(90.0), 9u);
    EXPECT_FALSE(a.index_of(95.0));
}

TEST(angle_set, rejects_odd_or_tiny_counts) {
    EXPECT_THROW(AngleSet(0), Error);
    EXPECT_THROW(AngleSet(1), Error);
    EXPECT_THROW(AngleSet(7), Error);
    EXPECT_NO_THROW(AngleSet(2));
}

TEST(radon_project, detector_length_covers_diagonal) {
    EXPECT_EQ(detector_length(2), 4u);
    EXPECT_EQ(detector_length(4), 7u);
    EXPECT_EQ(detector_length(16), 24u);
    EXPECT_EQ(detector_length(256), 364u);
}

TEST(radon_project, ones_2x2_at_zero_degrees_gives_column_sums) {
    const GrayImage w(2, 2, 1.0);
    const auto p = radon_project(w, AngleSet(2));
    ASSERT_EQ(p.detector_length, 4u);
    const auto col = p.projection(0);
    EXPECT_NEAR(col[0], 0.0, 1e-12);
    EXPECT_NEAR(col[1], 2.0, 1e-12);
    EXPECT_NEAR(col[2], 2.0, 1e-12);
    EXPECT_NEAR(col[3], 0.0, 1e-12);
}

TEST(radon_project, zero_window_projects_to_zero) {
    const GrayImage w(9, 9, 0.0);
    const auto p = radon_project(w, AngleSet(18));
    for (double v : p.values) EXPECT_EQ(v, 0.0);
}

TEST(radon_project, rejects_bad_windows) {
    EXPECT_THROW(radon_project(GrayImage(4, 3), AngleSet(4)), Error);
    EXPECT_THROW(radon_project(GrayImage(), AngleSet(4)), Error);
    GrayImage neg(3, 3, 1.0);
    neg(1, 1) = -1.0;
    EXPECT_THROW(radon_project(neg, AngleSet(4)), Error);
    GrayImage nan(3, 3, 1.0);
    nan(0, 2) = std::nan("");
    EXPECT_THROW(radon_project(nan, AngleSet(4)), Error);
}

// 4x4 window projected at 0, 45 and 90 degrees against the line-rasterisation
// oracle. The axis-aligned projections coincide with the oracle; the diagonal
// one is off by at most the footprint's sampling defect in every bin.
TEST(radon_project, small_window_matches_line_oracle) {
    std::vector<double> px(16);
    for (int i = 0; i < 16; ++i) px[i] = i + 1;
    const GrayImage w(4, 4, px);
    const AngleSet angles(4);  // 0, 45, 90, 135
    const auto p = radon_project(w, angles);
    for (std::size_t j : {0u, 1u, 2u}) {
        const auto want = oracle::line_integral_projection(px, 4, angles.degrees(j));
        const auto got = p.projection(j);
        if (j != 1) {
            for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9 * (1 + want[i]));
        } else {
            for (std::size_t i = 0; i < want.size(); ++i)
                EXPECT_LE(std::abs(got[i] - want[i]), 0.04 * want[i]) << "bin " << i;
            EXPECT_LE(peak_relative_error(got, want), 0.04);
        }
    }
}

TEST(sinogram, zero_and_constant_images) {
    const auto zero = sinogram(GrayImage(20, 20, 0.0));
    EXPECT_EQ(zero.angle_count, 180u);
    for (double v : zero.values) EXPECT_EQ(v, 0.0);

    const GrayImage flat(20, 20, 3.0);
    const auto s = sinogram(flat);
    for (std::size_t j = 0; j < 180; ++j) {
        double sum = 0.0;
        for (double v : s.projection(j)) sum += v;
        EXPECT_NEAR(sum, flat.mass(), 1e-9 * flat.mass());
    }
}

TEST(sinogram, centred_square_matches_line_oracle) {
    std::vector<double> px(32 * 32, 0.0);
    for (int y = 12; y < 20; ++y)
        for (int x = 12; x < 20; ++x) px[y * 32 + x] = 1.0;
    const auto s = sinogram(GrayImage(32, 32, px));
    double worst = 0.0;
    for (std::size_t j = 0; j < 180; ++j) {
        const auto want = oracle::line_integral_projection(px, 32, static_cast<double>(j));
        worst = std::max(worst, peak_relative_error(s.projection(j), want));
    }
    EXPECT_LE(worst, 0.04);
}

// Per-pixel weights are renormalised footprint samples; single-pixel bins
// therefore deviate from the oracle by at most the footprint's sampling
// defect, below 4% for every direction.
TEST(radon_project, per_bin_deviation_bounded_by_footprint_defect) {
    std::mt19937_64 rng(7);
    const auto w = testutil::random_image(rng, 16, 16, 0.0, 1.0);
    const std::vector<double> px(w.pixels().begin(), w.pixels().end());
    const AngleSet angles(18);
    const auto p = radon_project(w, angles);
    for (std::size_t j = 0; j < angles.size(); ++j) {
        const auto want = oracle::line_integral_projection(px, 16, angles.degrees(j));
        const auto got = p.projection(j);
        for (std::size_t i = 0; i < want.size(); ++i) {
            if (want[i] == 0.0)
                EXPECT_EQ(got[i], 0.0);
            else
                EXPECT_LE(std::abs(got[i] - want[i]) / want[i], 0.04) << "angle " << j << " bin " << i;
        }
    }
}

TEST(radon_properties, mass_conservation) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> side(1, 40);
    const AngleSet angles(18);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = side(rng);
        const auto w = testutil::random_image(rng, n, n, 0.0, 10.0);
        const auto p = radon_project(w, angles);
        for (std::size_t j = 0; j < angles.size(); ++j) {
            double sum = 0.0;
            for (double v : p.projection(j)) sum += v;
            EXPECT_LE(std::abs(sum - w.mass()), 1e-6 * w.mass());
        }
    }
}

TEST(radon_properties, linearity) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> scalar(0.1, 5.0);
    const AngleSet angles(18);
    for (int t = 0; t < 20; ++t) {
        const auto w1 = testutil::random_image(rng, 12, 12, 0.0, 1.0);
        const auto w2 = testutil::random_image(rng, 12, 12, 0.0, 1.0);
        const double a = scalar(rng), b = scalar(rng);
        GrayImage mix(12, 12);
        for (std::size_t i = 0; i < mix.size(); ++i) mix.pixels()[i] = a * w1.pixels()[i] + b * w2.pixels()[i];
        const auto p1 = radon_project(w1, angles), p2 = radon_project(w2, angles), pm = radon_project(mix, angles);
        for (std::size_t i = 0; i < pm.values.size(); ++i) {
            const double want = a * p1.values[i] + b * p2.values[i];
            EXPECT_NEAR(pm.values[i], want, 1e-6 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST(radon_properties, uniform_length_and_transpose_consistency) {
    std::mt19937_64 rng(13);
    const AngleSet angles(2);  // 0 and 90 degrees
    for (std::size_t n : {1u, 2u, 5u, 16u, 33u}) {
        const auto w = testutil::random_image(rng, n, n);
        const auto p = radon_project(w, angles);
        const auto pt = radon_project(w.transposed(), angles);
        ASSERT_EQ(p.values.size(), 2 * detector_length(n));
        for (std::size_t i = 0; i < p.detector_length; ++i) EXPECT_NEAR(p.at(i, 1), pt.at(i, 0), 1e-6);
    }
}

TEST(radon_properties, deterministic_bitwise) {
    std::mt19937_64 rng(14);
    const auto w = testutil::random_image(rng, 21, 21);
    const AngleSet angles(18);
    const auto a = radon_project(w, angles);
    const auto b = radon_project(w, angles);
    ASSERT_EQ(a.values.size(), b.values.size());
    EXPECT_EQ(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)), 0);
}
