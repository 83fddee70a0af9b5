#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lrd/error.hpp"
#include "lrd/image.hpp"

namespace lrd {

/// n projection directions spaced equally over [0, 180) degrees: angle j is j * 180 / n.
class AngleSet {
public:
    explicit AngleSet(std::size_t n) : n_(n) {
        if (n < 2 || n % 2 != 0)
            throw Error("AngleSet: angle count must be even and >= 2, got " + std::to_string(n));
    }

    std::size_t size() const noexcept { return n_; }
    double degrees(std::size_t j) const noexcept { return static_cast<double>(j) * 180.0 / static_cast<double>(n_); }
    double radians(std::size_t j) const noexcept { return static_cast<double>(j) * std::numbers::pi / static_cast<double>(n_); }

    std::vector<double> all_degrees() const {
        std::vector<double> out(n_);
        for (std::size_t j = 0; j < n_; ++j) out[j] = degrees(j);
        return out;
    }

    std::optional<std::size_t> index_of(double deg) const noexcept {
        for (std::size_t j = 0; j < n_; ++j)
            if (std::abs(degrees(j) - deg) < 1e-9) return j;
        return std::nullopt;
    }

    friend bool operator==(const AngleSet&, const AngleSet&) = default;

private:
    std::size_t n_;
};

/// Number of detector bins for a w x w window: ceil(w * sqrt(2)) + 1, centred on rho = 0.
inline std::size_t detector_length(std::size_t window_size) {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(window_size) * std::numbers::sqrt2)) + 1;
}

/// Radon projections of one square window, one contiguous column of L bins per angle.
struct ProjectionSet {
    std::size_t window_size = 0;
    std::size_t detector_length = 0;
    std::size_t angle_count = 0;
    std::vector<double> values;  // values[j * detector_length + i] = R(rho_i, theta_j)

    double at(std::size_t i, std::size_t j) const { return values[j * detector_length + i]; }
    std::span<const double> projection(std::size_t j) const {
        return {values.data() + j * detector_length, detector_length};
    }
    std::span<double> projection(std::size_t j) { return {values.data() + j * detector_length, detector_length}; }
};

namespace detail {

// Projection of one pixel's bilinear basis function onto the detector axis.
// For a direction with |cos| = a and |sin| = b this is the convolution of two
// triangles of half-widths a and b (a cubic box spline); it collapses to the
// unit triangle for axis-aligned directions.
class PixelFootprint {
public:
    PixelFootprint() = default;
    PixelFootprint(double a, double b) {
        constexpr double eps = 1e-9;
        if (a < eps || b < eps) {
            hat_ = true;
            a_ = std::max(a, b);
            reach_ = a_;
        } else {
            a_ = a;
            b_ = b;
            reach_ = a + b;
            inv_norm_ = 1.0 / (6.0 * a * a * b * b);
        }
    }

    double reach() const noexcept { return reach_; }

    double operator()(double u) const noexcept {
        // Measured from the left edge of the support so tail values carry no cancellation.
        const double v = reach_ - std::abs(u);
        if (v <= 0.0) return 0.0;
        if (hat_) return v / (a_ * a_);
        const auto cube = [](double t) { return t > 0.0 ? t * t * t : 0.0; };
        const double s = cube(v) - 2.0 * cube(v - a_) - 2.0 * cube(v - b_) + cube(v - 2.0 * a_) + cube(v - 2.0 * b_);
        return std::max(0.0, s * inv_norm_);
    }

private:
    bool hat_ = false;
    double a_ = 1.0;
    double b_ = 0.0;
    double reach_ = 1.0;
    double inv_norm_ = 0.0;
};

struct Direction {
    double cos = 1.0;
    double sin = 0.0;
    PixelFootprint footprint;
};

inline Direction make_direction(double degrees) {
    Direction d;
    const double turns = degrees / 90.0;
    if (turns == std::floor(turns)) {
        // Exact values on the axes keep 0/90 projections free of rounding drift.
        static constexpr std::array<std::array<double, 2>, 4> axis{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
        const auto q = static_cast<std::size_t>(((static_cast<long long>(turns) % 4) + 4) % 4);
        d.cos = axis[q][0];
        d.sin = axis[q][1];
    } else {
        const double rad = degrees * std::numbers::pi / 180.0;
        d.cos = std::cos(rad);
        d.sin = std::sin(rad);
    }
    d.footprint = PixelFootprint(std::abs(d.cos), std::abs(d.sin));
    return d;
}

} // namespace detail

/// Forward projector for a fixed angle set.
///
/// Each pixel (centre at (x, y) relative to the window centre) lands at
/// rho = x cos(theta) + y sin(theta) on a detector of unit-spaced bins centred
/// on rho = 0. Its intensity is spread over the bins within reach by sampling
/// the pixel footprint, and the weights are renormalised to sum to one, so every
/// projection conserves the window mass exactly and the transform stays linear.
/// Accepts signed intensities; radon_project() is the validating entry point.
class RadonProjector {
public:
    explicit RadonProjector(const AngleSet& angles) : angles_(angles) {
        directions_.reserve(angles.size());
        for (std::size_t j = 0; j < angles.size(); ++j) directions_.push_back(detail::make_direction(angles.degrees(j)));
    }

    const AngleSet& angles() const noexcept { return angles_; }

    ProjectionSet project(std::span<const double> pixels, std::size_t side) const {
        ProjectionSet out;
        project_into(pixels, side, out);
        return out;
    }

    void project_into(std::span<const double> pixels, std::size_t side, ProjectionSet& out) const {
        if (side == 0) throw Error("radon_project: window is empty");
        if (pixels.size() != side * side) throw Error("radon_project: window is not square");
        const std::size_t L = detector_length(side);
        out.window_size = side;
        out.detector_length = L;
        out.angle_count = directions_.size();
        out.values.assign(L * directions_.size(), 0.0);

        const double centre = (static_cast<double>(side) - 1.0) / 2.0;
        const double offset = (static_cast<double>(L) - 1.0) / 2.0;
        const auto last = static_cast<long long>(L) - 1;

        for (std::size_t j = 0; j < directions_.size(); ++j) {
            const auto& dir = directions_[j];
            const double reach = dir.footprint.reach();
            double* bins = out.values.data() + j * L;
            for (std::size_t y = 0; y < side; ++y) {
                const double row_rho = (static_cast<double>(y) - centre) * dir.sin + offset;
                const double* row = pixels.data() + y * side;
                for (std::size_t x = 0; x < side; ++x) {
                    const double f = row[x];
                    if (f == 0.0) continue;
                    const double r = (static_cast<double>(x) - centre) * dir.cos + row_rho;
                    const auto lo = std::max(0LL, static_cast<long long>(std::ceil(r - reach)));
                    const auto hi = std::min(last, static_cast<long long>(std::floor(r + reach)));
                    std::array<double, 4> w{};
                    double total = 0.0;
                    for (long long i = lo; i <= hi; ++i) {
                        const double wi = dir.footprint(static_cast<double>(i) - r);
                        w[static_cast<std::size_t>(i - lo)] = wi;
                        total += wi;
                    }
                    const double scale = f / total;
                    for (long long i = lo; i <= hi; ++i) bins[i] += w[static_cast<std::size_t>(i - lo)] * scale;
                }
            }
        }
    }

private:
    AngleSet angles_;
    std::vector<detail::Direction> directions_;
};

/// Radon projections of a square grayscale window at every angle of the set.
inline ProjectionSet radon_project(const GrayImage& window, const AngleSet& angles) {
    if (window.empty()) throw Error("radon_project: window is empty");
    if (!window.square())
        throw Error("radon_project: window must be square, got " + std::to_string(window.width()) + "x" +
                    std::to_string(window.height()));
    window.validate();
    return RadonProjector(angles).project(window.pixels(), window.width());
}

/// 180-angle (1 degree) sinogram of a square image, for diagnostics.
inline ProjectionSet sinogram(const GrayImage& image) { return radon_project(image, AngleSet(180)); }

} // namespace lrd
