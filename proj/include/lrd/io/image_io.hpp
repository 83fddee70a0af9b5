#pragma once

#include <algorithm>
#include <filesystem>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "lrd/error.hpp"
#include "lrd/image.hpp"

namespace lrd {

/// Decodes PNG, PGM, BMP or JPEG into [0, 255] grayscale. Colour inputs are
/// converted with the Rec. 601 luma weights; 16-bit inputs are rescaled.
inline GrayImage load_image(const std::filesystem::path& path) {
    cv::Mat raw;
    try {
        raw = cv::imread(path.string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_ANYCOLOR);
    } catch (const cv::Exception& e) {
        throw Error("cannot decode image '" + path.string() + "': " + e.what());
    }
    if (raw.empty()) throw Error("cannot read or decode image '" + path.string() + "'");

    double scale = 1.0;
    if (raw.depth() == CV_16U) scale = 255.0 / 65535.0;
    cv::Mat f;
    raw.convertTo(f, CV_32F, scale);
    cv::Mat gray;
    switch (f.channels()) {
    case 1: gray = f; break;
    case 3: cv::cvtColor(f, gray, cv::COLOR_BGR2GRAY); break;
    case 4: cv::cvtColor(f, gray, cv::COLOR_BGRA2GRAY); break;
    default: throw Error("unsupported channel count in '" + path.string() + "'");
    }

    GrayImage out(static_cast<std::size_t>(gray.cols), static_cast<std::size_t>(gray.rows));
    for (int y = 0; y < gray.rows; ++y) {
        const float* row = gray.ptr<float>(y);
        for (int x = 0; x < gray.cols; ++x)
            out(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = std::max(0.0, static_cast<double>(row[x]));
    }
    return out;
}

/// Writes an image as 8-bit grayscale; values are clamped to [0, 255].
inline void save_image(const std::filesystem::path& path, const GrayImage& image) {
    cv::Mat m(static_cast<int>(image.height()), static_cast<int>(image.width()), CV_8U);
    for (std::size_t y = 0; y < image.height(); ++y)
        for (std::size_t x = 0; x < image.width(); ++x)
            m.at<unsigned char>(static_cast<int>(y), static_cast<int>(x)) =
                cv::saturate_cast<unsigned char>(image(x, y));
    if (!cv::imwrite(path.string(), m)) throw Error("cannot write image '" + path.string() + "'");
}

} // namespace lrd
