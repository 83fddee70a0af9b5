#pragma once

#include <random>
#include <utility>

#include "lrd/image.hpp"

namespace fixtures {

// Two 256x256 images with identical row sums and column sums: the same
// random texture sits on the diagonal blocks (0,0),(1,1) of a 5x5 grid in the
// first image and on the anti-diagonal blocks (0,1),(1,0) in the second.
// Integer intensities keep every axis-aligned projection exact.
inline std::pair<lrd::GrayImage, lrd::GrayImage> swapped_block_pair(std::mt19937_64& rng) {
    constexpr std::size_t side = 256, block = 51, inset = 5, patch = 40;
    std::uniform_int_distribution<int> u(0, 200);
    lrd::GrayImage texture(patch, patch);
    for (double& v : texture.pixels()) v = u(rng);

    lrd::GrayImage a(side, side, 50.0), b(side, side, 50.0);
    const auto stamp = [&](lrd::GrayImage& img, std::size_t br, std::size_t bc) {
        for (std::size_t y = 0; y < patch; ++y)
            for (std::size_t x = 0; x < patch; ++x) img(bc * block + inset + x, br * block + inset + y) = texture(x, y);
    };
    stamp(a, 0, 0);
    stamp(a, 1, 1);
    stamp(b, 0, 1);
    stamp(b, 1, 0);
    return {a, b};
}

} // namespace fixtures
