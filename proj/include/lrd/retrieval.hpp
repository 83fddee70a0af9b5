#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lrd/descriptor.hpp"
#include "lrd/error.hpp"

namespace lrd {

enum class Metric { L1, L2, ChiSquare, Cosine };

inline std::string_view to_string(Metric m) {
    switch (m) {
    case Metric::L1: return "l1";
    case Metric::L2: return "l2";
    case Metric::ChiSquare: return "chi2";
    case Metric::Cosine: return "cosine";
    }
    return "?";
}

inline Metric parse_metric(std::string_view name) {
    if (name == "l1") return Metric::L1;
    if (name == "l2") return Metric::L2;
    if (name == "chi2" || name == "chi-square" || name == "chisquare") return Metric::ChiSquare;
    if (name == "cosine") return Metric::Cosine;
    throw Error("unknown metric '" + std::string(name) + "' (expected l1|l2|chi2|cosine)");
}

inline double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (a.size() != b.size())
        throw Error("distance: length mismatch (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    double acc = 0.0;
    switch (metric) {
    case Metric::L1:
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc;
    case Metric::L2:
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
        return std::sqrt(acc);
    case Metric::ChiSquare:
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            acc += d * d / (a[i] + b[i] + 1e-12);
        }
        return acc;
    case Metric::Cosine: {
        if (std::equal(a.begin(), a.end(), b.begin())) return 0.0;  // exact, where the quotient may round below 1
        double na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            acc += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        if (na == 0.0 && nb == 0.0) return 0.0;
        if (na == 0.0 || nb == 0.0) return 1.0;
        return std::clamp(1.0 - acc / (std::sqrt(na) * std::sqrt(nb)), 0.0, 2.0);
    }
    }
    throw Error("distance: unknown metric");
}

inline double distance(const Descriptor& a, const Descriptor& b, Metric metric) {
    return distance(a.values, b.values, metric);
}

struct LabeledDescriptor {
    Descriptor descriptor;
    std::string label;
};

struct Neighbor {
    std::string source_id;
    std::string label;
    double distance = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct QueryResult {
    std::size_t k = 0;
    std::vector<Neighbor> neighbors;

    friend bool operator==(const QueryResult&, const QueryResult&) = default;
};

/// Immutable exact-search index over equal-length descriptors of one configuration.
class DescriptorIndex {
public:
    DescriptorIndex(std::vector<LabeledDescriptor> entries, Metric metric) : entries_(std::move(entries)), metric_(metric) {
        if (entries_.empty()) throw Error("build_index: no descriptors");
        length_ = entries_.front().descriptor.values.size();
        digest_ = entries_.front().descriptor.params_digest;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& e = entries_[i];
            const auto& d = e.descriptor;
            if (d.values.size() != length_)
                throw Error("build_index: descriptor '" + d.source_id + "' has length " + std::to_string(d.values.size()) +
                            ", expected " + std::to_string(length_));
            if (d.params_digest != digest_)
                throw Error("build_index: descriptor '" + d.source_id + "' was produced by a different configuration");
            if (!ids_.emplace(d.source_id, i).second) throw Error("build_index: duplicate source id '" + d.source_id + "'");
        }
    }

    std::size_t size() const noexcept { return entries_.size(); }
    std::size_t length() const noexcept { return length_; }
    std::uint64_t params_digest() const noexcept { return digest_; }
    Metric metric() const noexcept { return metric_; }
    const std::vector<LabeledDescriptor>& entries() const noexcept { return entries_; }

    const LabeledDescriptor* find(std::string_view id) const {
        const auto it = ids_.find(std::string(id));
        return it == ids_.end() ? nullptr : &entries_[it->second];
    }

private:
    std::vector<LabeledDescriptor> entries_;
    std::unordered_map<std::string, std::size_t> ids_;
    Metric metric_;
    std::size_t length_ = 0;
    std::uint64_t digest_ = 0;
};

inline DescriptorIndex build_index(std::vector<LabeledDescriptor> entries, Metric metric = Metric::L1) {
    return DescriptorIndex(std::move(entries), metric);
}

/// Exact k nearest neighbours by full scan. Equal distances rank by ascending source id.
inline QueryResult knn_query(const DescriptorIndex& index, std::span<const double> query, std::size_t k) {
    if (query.size() != index.length())
        throw Error("knn_query: query length " + std::to_string(query.size()) + " does not match index length " +
                    std::to_string(index.length()));
    struct Scored {
        double distance;
        const LabeledDescriptor* entry;
    };
    std::vector<Scored> scored;
    scored.reserve(index.size());
    for (const auto& e : index.entries()) scored.push_back({distance(query, e.descriptor.values, index.metric()), &e});

    const auto before = [](const Scored& a, const Scored& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.entry->descriptor.source_id < b.entry->descriptor.source_id;
    };
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), before);

    QueryResult result{k, {}};
    result.neighbors.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        result.neighbors.push_back({scored[i].entry->descriptor.source_id, scored[i].entry->label, scored[i].distance});
    return result;
}

inline QueryResult knn_query(const DescriptorIndex& index, const Descriptor& query, std::size_t k) {
    if (query.params_digest != 0 && query.params_digest != index.params_digest())
        throw Error("knn_query: query descriptor was produced by a different configuration than the index");
    return knn_query(index, std::span<const double>(query.values), k);
}

} // namespace lrd
