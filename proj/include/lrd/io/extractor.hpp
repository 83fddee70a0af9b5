#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "lrd/descriptor.hpp"
#include "lrd/digest.hpp"
#include "lrd/error.hpp"
#include "lrd/io/descriptor_file.hpp"
#include "lrd/io/image_io.hpp"
#include "lrd/io/manifest.hpp"
#include "lrd/io/standardize.hpp"
#include "lrd/parallel.hpp"

namespace lrd {

enum class Method { Lrd, Gr };

/// Everything that determines a descriptor: method, its parameters and the
/// standardisation applied beforehand. Its canonical text is what descriptor
/// files carry and what the params digest is computed from.
struct ExtractorConfig {
    Method method = Method::Lrd;
    LrdParams lrd = LrdParams::irma();
    GrParams gr;
    std::size_t side = 256;
    ResizeMode resize = ResizeMode::ScaleThenPad;

    std::size_t length() const {
        if (method == Method::Lrd) return lrd.length();
        if (gr.target_length) return gr.target_length;
        return gr.angles * detector_length(side);
    }

    std::string canonical() const {
        std::string s = method == Method::Lrd ? lrd.canonical() : gr.canonical();
        s += ";side=" + std::to_string(side) + (resize == ResizeMode::PadOnly ? ";resize=pad" : ";resize=scale");
        return s;
    }

    std::uint64_t digest() const { return fnv1a64(canonical()); }

    static ExtractorConfig parse(std::string_view text);
};

inline ExtractorConfig ExtractorConfig::parse(std::string_view text) {
    std::map<std::string, std::string, std::less<>> kv;
    std::string head;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(';', start), text.size());
        const auto item = text.substr(start, end - start);
        if (head.empty() && start == 0) {
            head = std::string(item);
        } else if (!item.empty()) {
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) throw Error("config text: malformed item '" + std::string(item) + "'");
            kv[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
        }
        start = end + 1;
    }
    const auto get = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw Error(std::string("config text: missing '") + key + "'");
        return it->second;
    };
    const auto count = [&](const char* key) { return static_cast<std::size_t>(std::stoull(get(key))); };

    ExtractorConfig c;
    try {
        if (head == "lrd") {
            c.method = Method::Lrd;
            const auto& grid = get("grid");
            const auto x = grid.find('x');
            if (x == std::string::npos) throw Error("config text: bad grid '" + grid + "'");
            c.lrd.rows = std::stoull(grid.substr(0, x));
            c.lrd.cols = std::stoull(grid.substr(x + 1));
            c.lrd.overlap = std::stod(get("overlap"));
            c.lrd.angles = count("angles");
            c.lrd.bins = count("bins");
            c.lrd.pairing = parse_pairing_kind(get("pairing"));
            c.lrd.custom_pairs.clear();
            if (c.lrd.pairing == PairingKind::Custom) {
                std::string_view pairs = get("pairs");
                while (!pairs.empty()) {
                    const auto comma = std::min(pairs.find(','), pairs.size());
                    const auto item = pairs.substr(0, comma);
                    const auto colon = item.find(':');
                    if (colon == std::string_view::npos) throw Error("config text: bad pair");
                    c.lrd.custom_pairs.push_back({std::stoull(std::string(item.substr(0, colon))),
                                                  std::stoull(std::string(item.substr(colon + 1)))});
                    pairs.remove_prefix(std::min(comma + 1, pairs.size()));
                }
            }
            const auto& norm = get("normalize");
            if (norm != "l1" && norm != "none") throw Error("config text: bad normalize '" + norm + "'");
            c.lrd.normalize = norm == "l1" ? Normalization::L1 : Normalization::None;
            c.lrd.validate();
        } else if (head == "gr") {
            c.method = Method::Gr;
            c.gr.angles = count("angles");
            c.gr.target_length = count("length");
            c.gr.validate();
        } else {
            throw Error("config text: unknown method '" + head + "'");
        }
        c.side = count("side");
        const auto& resize = get("resize");
        if (resize != "scale" && resize != "pad") throw Error("config text: bad resize '" + resize + "'");
        c.resize = resize == "pad" ? ResizeMode::PadOnly : ResizeMode::ScaleThenPad;
    } catch (const std::logic_error&) {
        throw Error("config text: malformed number in '" + std::string(text) + "'");
    }
    return c;
}

/// Standardises a raw image and computes its descriptor under one configuration.
class Extractor {
public:
    explicit Extractor(ExtractorConfig config) : config_(std::move(config)), digest_(config_.digest()) {
        if (config_.method == Method::Lrd)
            lrd_.emplace(config_.lrd);
        else
            config_.gr.validate();
    }

    const ExtractorConfig& config() const noexcept { return config_; }
    std::uint64_t digest() const noexcept { return digest_; }

    Descriptor from_standardized(const GrayImage& image, std::string source_id = {}) const {
        Descriptor d = lrd_ ? (*lrd_)(image) : global_radon_descriptor(image, config_.gr);
        d.params_digest = digest_;
        d.source_id = std::move(source_id);
        return d;
    }

    Descriptor operator()(const GrayImage& raw, std::string source_id = {}) const {
        return from_standardized(standardize(raw, config_.side, config_.resize), std::move(source_id));
    }

private:
    ExtractorConfig config_;
    std::uint64_t digest_;
    std::optional<LrdExtractor> lrd_;
};

/// Describes every manifest image on a worker pool. Output order follows the
/// manifest regardless of scheduling.
inline DescriptorSet describe_manifest(const DatasetManifest& manifest, const Extractor& extractor,
                                       Metric metric_hint = Metric::L1, std::size_t workers = worker_count()) {
    DescriptorSet set;
    set.length = extractor.config().length();
    set.params_digest = extractor.digest();
    set.metric_hint = metric_hint;
    set.params = extractor.config().canonical();
    set.items.resize(manifest.records.size());
    parallel_for(
        manifest.records.size(),
        [&](std::size_t i) {
            const auto& r = manifest.records[i];
            set.items[i] = {extractor(load_image(r.path), r.id), r.label};
        },
        workers);
    return set;
}

} // namespace lrd
