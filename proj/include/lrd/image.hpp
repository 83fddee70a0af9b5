#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lrd/error.hpp"

namespace lrd {

/// Grayscale intensity matrix stored row-major. Intensities are expected to be
/// finite and non-negative; validate() enforces that where it matters.
class GrayImage {
public:
    GrayImage() = default;

    GrayImage(std::size_t width, std::size_t height, double fill = 0.0)
        : width_(width), height_(height), pixels_(width * height, fill) {
        if (width == 0 || height == 0)
            throw Error("GrayImage: width and height must be >= 1");
    }

    GrayImage(std::size_t width, std::size_t height, std::vector<double> pixels)
        : width_(width), height_(height), pixels_(std::move(pixels)) {
        if (width == 0 || height == 0)
            throw Error("GrayImage: width and height must be >= 1");
        if (pixels_.size() != width * height)
            throw Error("GrayImage: expected " + std::to_string(width * height) + " pixels, got " +
                        std::to_string(pixels_.size()));
    }

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }
    bool empty() const noexcept { return pixels_.empty(); }
    bool square() const noexcept { return width_ == height_; }

    double operator()(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
    double& operator()(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }

    std::span<const double> pixels() const noexcept { return pixels_; }
    std::span<double> pixels() noexcept { return pixels_; }
    std::span<const double> row(std::size_t y) const { return {pixels_.data() + y * width_, width_}; }

    double mass() const noexcept {
        double s = 0.0;
        for (double v : pixels_) s += v;
        return s;
    }

    // Rejects empty images and negative or non-finite intensities.
    void validate() const {
        if (empty()) throw Error("GrayImage: image is empty");
        for (std::size_t i = 0; i < pixels_.size(); ++i) {
            const double v = pixels_[i];
            if (!std::isfinite(v) || v < 0.0)
                throw Error("GrayImage: pixel " + std::to_string(i) + " is negative or not finite");
        }
    }

    GrayImage crop(std::size_t x, std::size_t y, std::size_t w, std::size_t h) const {
        if (x + w > width_ || y + h > height_ || w == 0 || h == 0)
            throw Error("GrayImage::crop: rectangle outside image");
        GrayImage out(w, h);
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) out(c, r) = (*this)(x + c, y + r);
        return out;
    }

    GrayImage transposed() const {
        GrayImage out(height_, width_);
        for (std::size_t r = 0; r < height_; ++r)
            for (std::size_t c = 0; c < width_; ++c) out(r, c) = (*this)(c, r);
        return out;
    }

    GrayImage scaled(double factor) const {
        GrayImage out = *this;
        for (double& v : out.pixels_) v *= factor;
        return out;
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> pixels_;
};

} // namespace lrd
