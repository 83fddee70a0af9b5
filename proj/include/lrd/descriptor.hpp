#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrd/block_grid.hpp"
#include "lrd/digest.hpp"
#include "lrd/error.hpp"
#include "lrd/image.hpp"
#include "lrd/radon.hpp"

namespace lrd {

// ---------------------------------------------------------------------------
// Pairing

enum class PairingKind { Orthogonal, Characteristic, Custom };

inline std::string_view to_string(PairingKind kind) {
    switch (kind) {
    case PairingKind::Orthogonal: return "orthogonal";
    case PairingKind::Characteristic: return "characteristic";
    case PairingKind::Custom: return "custom";
    }
    return "?";
}

inline PairingKind parse_pairing_kind(std::string_view text) {
    if (text == "orthogonal") return PairingKind::Orthogonal;
    if (text == "characteristic") return PairingKind::Characteristic;
    if (text == "custom") return PairingKind::Custom;
    throw Error("unknown pairing scheme '" + std::string(text) + "' (expected orthogonal|characteristic|custom)");
}

/// Indices into an AngleSet. The first member is the arctangent numerator.
struct AnglePair {
    std::size_t first = 0;
    std::size_t second = 0;

    friend bool operator==(const AnglePair&, const AnglePair&) = default;
    friend auto operator<=>(const AnglePair&, const AnglePair&) = default;
};

struct PairingScheme {
    PairingKind kind = PairingKind::Characteristic;
    std::vector<AnglePair> pairs;
};

inline PairingScheme custom_pairing(const AngleSet& angles, std::vector<AnglePair> pairs) {
    if (pairs.empty()) throw Error("custom pairing: no pairs given");
    for (const auto& p : pairs) {
        if (p.first >= angles.size() || p.second >= angles.size())
            throw Error("custom pairing: angle index out of range");
        if (p.first == p.second) throw Error("custom pairing: a projection cannot be paired with itself");
    }
    return {PairingKind::Custom, std::move(pairs)};
}

/// Orthogonal: (theta, theta + 90) for every theta below 90 degrees.
/// Characteristic: every angle in (0, 90) paired with 0 degrees, every angle
/// in (90, 180) paired with 90 degrees.
inline PairingScheme pair_angles(const AngleSet& angles, PairingKind kind) {
    const std::size_t n = angles.size();
    PairingScheme scheme{kind, {}};
    switch (kind) {
    case PairingKind::Orthogonal:
        for (std::size_t j = 0; j < n / 2; ++j) scheme.pairs.push_back({j, j + n / 2});
        break;
    case PairingKind::Characteristic: {
        const auto zero = angles.index_of(0.0);
        const auto right = angles.index_of(90.0);
        if (!zero || !right) throw Error("characteristic pairing needs 0 and 90 degrees in the angle set");
        for (std::size_t j = *zero + 1; j < *right; ++j) scheme.pairs.push_back({*zero, j});
        for (std::size_t j = *right + 1; j < n; ++j) scheme.pairs.push_back({*right, j});
        if (scheme.pairs.empty()) throw Error("characteristic pairing needs at least 4 angles");
        break;
    }
    case PairingKind::Custom:
        throw Error("pair_angles: custom pairings are built with custom_pairing()");
    }
    return scheme;
}

// ---------------------------------------------------------------------------
// Parameters

enum class Normalization { None, L1 };

struct LrdParams {
    std::size_t rows = 5;
    std::size_t cols = 5;
    double overlap = 0.0;
    std::size_t angles = 18;
    std::size_t bins = 12;
    PairingKind pairing = PairingKind::Characteristic;
    std::vector<AnglePair> custom_pairs;  // used when pairing == Custom
    Normalization normalize = Normalization::L1;

    std::size_t length() const noexcept { return rows * cols * bins; }

    void validate() const {
        if (rows < 1 || cols < 1) throw Error("LrdParams: grid needs at least 1x1 blocks");
        if (bins < 2) throw Error("LrdParams: need at least 2 bins");
        if (angles < 2 || angles % 2 != 0) throw Error("LrdParams: angle count must be even and >= 2");
        if (!(overlap >= 0.0 && overlap <= 0.9)) throw Error("LrdParams: overlap must lie in [0, 0.9]");
        (void)scheme();
    }

    PairingScheme scheme() const {
        const AngleSet set(angles);
        if (pairing == PairingKind::Custom) return custom_pairing(set, custom_pairs);
        return pair_angles(set, pairing);
    }

    std::string canonical() const {
        char overlap_text[32];
        std::snprintf(overlap_text, sizeof overlap_text, "%.6g", overlap);
        std::string s = "lrd;grid=" + std::to_string(rows) + "x" + std::to_string(cols) + ";overlap=" + overlap_text +
                        ";angles=" + std::to_string(angles) + ";bins=" + std::to_string(bins) +
                        ";pairing=" + std::string(to_string(pairing));
        if (pairing == PairingKind::Custom) {
            s += ";pairs=";
            for (std::size_t i = 0; i < custom_pairs.size(); ++i) {
                if (i) s += ',';
                s += std::to_string(custom_pairs[i].first) + ":" + std::to_string(custom_pairs[i].second);
            }
        }
        s += normalize == Normalization::L1 ? ";normalize=l1" : ";normalize=none";
        return s;
    }

    std::uint64_t digest() const { return fnv1a64(canonical()); }

    // 5x5 blocks, 12 bins: the x-ray setting.
    static LrdParams irma() { return {5, 5, 0.0, 18, 12, PairingKind::Characteristic, {}, Normalization::L1}; }
    // 3x3 blocks, 22 bins: the natural-image setting.
    static LrdParams holidays() { return {3, 3, 0.0, 18, 22, PairingKind::Characteristic, {}, Normalization::L1}; }

    static LrdParams preset(std::string_view name) {
        if (name == "irma") return irma();
        if (name == "holidays") return holidays();
        throw Error("unknown preset '" + std::string(name) + "' (expected irma|holidays)");
    }
};

struct Descriptor {
    std::vector<double> values;
    std::uint64_t params_digest = 0;
    std::string source_id;

    friend bool operator==(const Descriptor&, const Descriptor&) = default;
};

// ---------------------------------------------------------------------------
// Derivatives and pair histograms

/// First differences along rho for every projection: L - 1 entries per angle.
struct Derivatives {
    std::size_t length = 0;
    std::size_t angle_count = 0;
    std::vector<double> values;

    std::span<const double> column(std::size_t j) const { return {values.data() + j * length, length}; }
};

inline void derivatives_into(const ProjectionSet& proj, Derivatives& out) {
    if (proj.detector_length < 2) throw Error("derivatives: projections need at least 2 bins");
    out.length = proj.detector_length - 1;
    out.angle_count = proj.angle_count;
    out.values.resize(out.length * out.angle_count);
    for (std::size_t j = 0; j < proj.angle_count; ++j) {
        const auto p = proj.projection(j);
        double* d = out.values.data() + j * out.length;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) d[i] = p[i + 1] - p[i];
    }
}

inline Derivatives derivatives(const ProjectionSet& proj) {
    Derivatives out;
    derivatives_into(proj, out);
    return out;
}

struct DerivativePair {
    std::span<const double> first;
    std::span<const double> second;
};

/// Bin of an angle in [-pi, pi] split uniformly into `bins` left-closed bins;
/// +pi falls in the last bin.
inline std::size_t angle_bin(double angle, std::size_t bins) {
    const double t = (angle + std::numbers::pi) / (2.0 * std::numbers::pi) * static_cast<double>(bins);
    if (!(t > 0.0)) return 0;
    const auto b = static_cast<std::size_t>(t);
    return std::min(b, bins - 1);
}

/// Adds |d1 + d2| at the bin of atan2(d1, d2) for every element of the pair.
inline void accumulate_pair_histogram(DerivativePair pair, std::span<double> hist) {
    if (pair.first.size() != pair.second.size()) throw Error("pair_histogram: derivative lengths differ");
    const std::size_t bins = hist.size();
    for (std::size_t i = 0; i < pair.first.size(); ++i) {
        const double a = pair.first[i];
        const double b = pair.second[i];
        const double weight = std::abs(a + b);
        if (weight == 0.0) continue;
        hist[angle_bin(std::atan2(a, b), bins)] += weight;
    }
}

inline std::vector<double> pair_histogram(DerivativePair pair, std::size_t bins) {
    if (bins < 2) throw Error("pair_histogram: need at least 2 bins");
    std::vector<double> hist(bins, 0.0);
    accumulate_pair_histogram(pair, hist);
    return hist;
}

// ---------------------------------------------------------------------------
// Local Radon descriptor

/// Reusable LRD extractor for one parameter set.
///
/// Per block: subtract the block mean, zero-pad to a square, project at all
/// angles, difference along rho, then fold every configured angle pair into
/// one b-bin histogram. Blocks are concatenated in row-major order.
class LrdExtractor {
public:
    explicit LrdExtractor(LrdParams params)
        : params_(std::move(params)), projector_(AngleSet(params_.angles)) {
        params_.validate();
        pairs_ = params_.scheme().pairs;
        digest_ = params_.digest();
    }

    const LrdParams& params() const noexcept { return params_; }
    std::size_t length() const noexcept { return params_.length(); }

    Descriptor operator()(const GrayImage& image, std::string source_id = {}) const {
        image.validate();
        const BlockGrid grid = block_grid(image, params_.rows, params_.cols, params_.overlap);
        Descriptor out{std::vector<double>(length(), 0.0), digest_, std::move(source_id)};

        std::vector<double> square;
        ProjectionSet proj;
        Derivatives deriv;
        for (std::size_t k = 0; k < grid.windows.size(); ++k) {
            const Window& win = grid.windows[k];
            const std::size_t side = std::max(win.width, win.height);
            square.assign(side * side, 0.0);

            double mean = 0.0;
            std::size_t count = 0;
            for (std::size_t y = 0; y < win.height; ++y)
                for (std::size_t x = 0; x < win.width; ++x) mean += (image(win.x + x, win.y + y) - mean) / static_cast<double>(++count);

            const std::size_t ox = (side - win.width) / 2;
            const std::size_t oy = (side - win.height) / 2;
            for (std::size_t y = 0; y < win.height; ++y)
                for (std::size_t x = 0; x < win.width; ++x)
                    square[(oy + y) * side + ox + x] = image(win.x + x, win.y + y) - mean;

            projector_.project_into(square, side, proj);
            derivatives_into(proj, deriv);

            std::span<double> hist(out.values.data() + k * params_.bins, params_.bins);
            for (const auto& p : pairs_) accumulate_pair_histogram({deriv.column(p.first), deriv.column(p.second)}, hist);

            if (params_.normalize == Normalization::L1) {
                double mass = 0.0;
                for (double v : hist) mass += v;
                if (mass > 0.0)
                    for (double& v : hist) v /= mass;
            }
        }
        return out;
    }

private:
    LrdParams params_;
    RadonProjector projector_;
    std::vector<AnglePair> pairs_;
    std::uint64_t digest_ = 0;
};

inline Descriptor lrd_descriptor(const GrayImage& image, const LrdParams& params) {
    return LrdExtractor(params)(image);
}

// ---------------------------------------------------------------------------
// Global Radon baseline

struct GrParams {
    std::size_t angles = 4;
    std::size_t target_length = 0;  // 0 keeps every detector bin

    void validate() const {
        if (angles < 2 || angles % 2 != 0) throw Error("GrParams: angle count must be even and >= 2");
    }

    std::string canonical() const {
        return "gr;angles=" + std::to_string(angles) + ";length=" + std::to_string(target_length);
    }
    std::uint64_t digest() const { return fnv1a64(canonical()); }
};

/// Mass-preserving area resampling of a profile onto `target` bins.
inline std::vector<double> resample_profile(std::span<const double> src, std::size_t target) {
    if (target == 0) throw Error("resample_profile: target length must be positive");
    std::vector<double> out(target, 0.0);
    const double n = static_cast<double>(src.size());
    const double step = n / static_cast<double>(target);
    for (std::size_t k = 0; k < target; ++k) {
        const double lo = static_cast<double>(k) * step;
        const double hi = lo + step;
        auto i = static_cast<std::size_t>(lo);
        for (; i < src.size() && static_cast<double>(i) < hi; ++i) {
            const double covered = std::min(hi, static_cast<double>(i + 1)) - std::max(lo, static_cast<double>(i));
            if (covered > 0.0) out[k] += src[i] * covered;
        }
    }
    return out;
}

/// Whole-image projections at `params.angles` equidistant angles, concatenated
/// angle by angle. With a target length the concatenation is resampled to it.
inline Descriptor global_radon_descriptor(const GrayImage& image, const GrParams& params) {
    params.validate();
    if (!image.square()) throw Error("global_radon_descriptor: image must be square (standardize it first)");
    const ProjectionSet proj = radon_project(image, AngleSet(params.angles));
    Descriptor out{proj.values, params.digest(), {}};
    if (params.target_length != 0) {
        if (params.target_length > out.values.size())
            throw Error("global_radon_descriptor: target length exceeds the raw projection length");
        out.values = resample_profile(out.values, params.target_length);
    }
    return out;
}

inline Descriptor global_radon_descriptor(const GrayImage& image, std::size_t n_angles) {
    return global_radon_descriptor(image, GrParams{n_angles, 0});
}

} // namespace lrd
