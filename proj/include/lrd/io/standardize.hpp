#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "lrd/error.hpp"
#include "lrd/image.hpp"

namespace lrd {

enum class ResizeMode {
    ScaleThenPad,  // aspect-preserving bilinear scale of the longer side, then zero padding
    PadOnly,       // centre crop or zero pad without resampling
};

/// Bilinear resampling with pixel-centre alignment and clamped borders.
inline GrayImage resize_bilinear(const GrayImage& src, std::size_t width, std::size_t height) {
    if (width == src.width() && height == src.height()) return src;
    GrayImage out(width, height);
    const double sx = static_cast<double>(src.width()) / static_cast<double>(width);
    const double sy = static_cast<double>(src.height()) / static_cast<double>(height);
    const auto max_x = static_cast<double>(src.width() - 1);
    const auto max_y = static_cast<double>(src.height() - 1);
    for (std::size_t y = 0; y < height; ++y) {
        const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
        const auto y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, src.height() - 1);
        const double ty = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < width; ++x) {
            const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
            const auto x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, src.width() - 1);
            const double tx = fx - static_cast<double>(x0);
            const double top = src(x0, y0) * (1.0 - tx) + src(x1, y0) * tx;
            const double bottom = src(x0, y1) * (1.0 - tx) + src(x1, y1) * tx;
            out(x, y) = top * (1.0 - ty) + bottom * ty;
        }
    }
    return out;
}

/// Brings any image onto the side x side canvas used for extraction. The
/// content is centred; everything outside it is exactly zero.
inline GrayImage standardize(const GrayImage& image, std::size_t side = 256, ResizeMode mode = ResizeMode::ScaleThenPad) {
    if (side < 16) throw Error("standardize: side must be >= 16");
    if (image.empty()) throw Error("standardize: image is empty");
    if (image.width() == side && image.height() == side) return image;

    if (mode == ResizeMode::ScaleThenPad) {
        const double longer = static_cast<double>(std::max(image.width(), image.height()));
        const double scale = static_cast<double>(side) / longer;
        const auto w = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(image.width() * scale)), 1, side);
        const auto h = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(image.height() * scale)), 1, side);
        const GrayImage scaled = resize_bilinear(image, w, h);
        GrayImage out(side, side, 0.0);
        const std::size_t ox = (side - w) / 2;
        const std::size_t oy = (side - h) / 2;
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) out(ox + x, oy + y) = scaled(x, y);
        return out;
    }

    // Pad-only: overlapping centred region is copied verbatim.
    GrayImage out(side, side, 0.0);
    const std::size_t w = std::min(image.width(), side);
    const std::size_t h = std::min(image.height(), side);
    const std::size_t src_x = (image.width() - w) / 2;
    const std::size_t src_y = (image.height() - h) / 2;
    const std::size_t dst_x = (side - w) / 2;
    const std::size_t dst_y = (side - h) / 2;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) out(dst_x + x, dst_y + y) = image(src_x + x, src_y + y);
    return out;
}

} // namespace lrd
