#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "lrd/error.hpp"
#include "lrd/image.hpp"

namespace lrd {

struct Window {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t width = 0;
    std::size_t height = 0;

    friend bool operator==(const Window&, const Window&) = default;
};

struct BlockGrid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    double overlap = 0.0;
    std::vector<Window> windows;  // row-major

    const Window& at(std::size_t row, std::size_t col) const { return windows[row * cols + col]; }
};

namespace detail {

struct Span1D {
    std::size_t start;
    std::size_t length;
};

// Blocks start every floor(extent / n) pixels. With overlap o each block is
// widened to stride / (1 - o) and clipped; the last block always runs to the
// image edge so remainder pixels are never dropped.
inline std::vector<Span1D> split_axis(std::size_t extent, std::size_t n, double overlap, const char* axis) {
    const std::size_t stride = extent / n;
    if (stride < 1)
        throw Error(std::string("block_grid: ") + std::to_string(n) + " blocks do not fit in " + std::to_string(extent) +
                    " pixels along " + axis);
    std::size_t size = stride;
    if (overlap > 0.0)
        size = static_cast<std::size_t>(std::llround(static_cast<double>(stride) / (1.0 - overlap)));
    std::vector<Span1D> spans(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t start = i * stride;
        const std::size_t room = extent - start;
        spans[i] = {start, i + 1 == n ? room : std::min(size, room)};
    }
    return spans;
}

} // namespace detail

inline BlockGrid block_grid(std::size_t width, std::size_t height, std::size_t n_rows, std::size_t n_cols,
                            double overlap = 0.0) {
    if (n_rows < 1 || n_cols < 1) throw Error("block_grid: need at least one block per axis");
    if (!(overlap >= 0.0 && overlap <= 0.9)) throw Error("block_grid: overlap must lie in [0, 0.9]");
    const auto xs = detail::split_axis(width, n_cols, overlap, "x");
    const auto ys = detail::split_axis(height, n_rows, overlap, "y");
    BlockGrid grid{n_rows, n_cols, overlap, {}};
    grid.windows.reserve(n_rows * n_cols);
    for (const auto& ry : ys)
        for (const auto& rx : xs) grid.windows.push_back({rx.start, ry.start, rx.length, ry.length});
    return grid;
}

inline BlockGrid block_grid(const GrayImage& image, std::size_t n_rows, std::size_t n_cols, double overlap = 0.0) {
    return block_grid(image.width(), image.height(), n_rows, n_cols, overlap);
}

} // namespace lrd
