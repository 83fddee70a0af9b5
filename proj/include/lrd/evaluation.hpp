#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lrd/error.hpp"
#include "lrd/parallel.hpp"
#include "lrd/retrieval.hpp"

namespace lrd {

// ---------------------------------------------------------------------------
// IRMA codes

inline constexpr std::array<std::size_t, 4> kIrmaAxisLengths{4, 3, 3, 3};
inline constexpr std::array<std::size_t, 4> kIrmaAxisOffsets{0, 4, 7, 10};
inline constexpr std::size_t kIrmaCodeLength = 13;

/// 13-character code over the technical, directional, anatomical and biological axes.
struct IrmaCode {
    std::string chars;

    std::string_view axis(std::size_t k) const {
        return std::string_view(chars).substr(kIrmaAxisOffsets[k], kIrmaAxisLengths[k]);
    }

    std::string formatted() const {
        return std::string(axis(0)) + "-" + std::string(axis(1)) + "-" + std::string(axis(2)) + "-" + std::string(axis(3));
    }

    friend bool operator==(const IrmaCode&, const IrmaCode&) = default;
};

/// Accepts "TTTT-DDD-AAA-BBB" or the bare 13 characters. Separators may only
/// sit on axis boundaries.
inline IrmaCode parse_irma_code(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

    IrmaCode code;
    for (std::size_t pos = 0; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c == '-') {
            const std::size_t n = code.chars.size();
            if (n != 4 && n != 7 && n != 10)
                throw Error("IRMA code '" + std::string(text) + "': separator at position " + std::to_string(pos + 1) +
                            " is not on an axis boundary");
            continue;
        }
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '*')
            throw Error("IRMA code '" + std::string(text) + "': illegal character '" + std::string(1, c) + "' at position " +
                        std::to_string(pos + 1));
        code.chars.push_back(c);
    }
    if (code.chars.size() != kIrmaCodeLength)
        throw Error("IRMA code '" + std::string(text) + "': expected 13 characters, got " +
                    std::to_string(code.chars.size()));
    return code;
}

/// Branching factor per code position. The official scheme takes these from
/// the IRMA code tree; without it every position defaults to 10.
struct IrmaBranching {
    std::array<double, kIrmaCodeLength> factors;

    IrmaBranching() { factors.fill(10.0); }
    explicit IrmaBranching(double uniform) { factors.fill(uniform); }
};

/// Hierarchical error of one axis, normalised to [0, 1]. Position i (1-based)
/// weighs 1 / (b_i * i); a mismatch makes that and every later position wrong,
/// a wildcard on either side counts half.
inline double irma_axis_error(std::string_view truth, std::string_view predicted, std::span<const double> branching) {
    double error = 0.0;
    double worst = 0.0;
    bool wrong = false;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double weight = 1.0 / (branching[i] * static_cast<double>(i + 1));
        worst += weight;
        double delta = 0.0;
        if (wrong) {
            delta = 1.0;
        } else if (truth[i] == predicted[i]) {
            delta = 0.0;
        } else if (truth[i] == '*' || predicted[i] == '*') {
            delta = 0.5;
        } else {
            wrong = true;
            delta = 1.0;
        }
        error += weight * delta;
    }
    return error / worst;
}

/// Mean of the four normalised axis errors; 0 for a perfect match, 1 when every axis is wrong from its first position.
inline double irma_error(const IrmaCode& truth, const IrmaCode& predicted, const IrmaBranching& branching = {}) {
    double total = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const std::span<const double> b(branching.factors.data() + kIrmaAxisOffsets[k], kIrmaAxisLengths[k]);
        total += irma_axis_error(truth.axis(k), predicted.axis(k), b);
    }
    return total / 4.0;
}

// ---------------------------------------------------------------------------
// Reports

enum class Protocol { Irma, Holidays };

inline std::string_view to_string(Protocol p) { return p == Protocol::Irma ? "irma" : "holidays"; }

inline Protocol parse_protocol(std::string_view text) {
    if (text == "irma") return Protocol::Irma;
    if (text == "holidays") return Protocol::Holidays;
    throw Error("unknown protocol '" + std::string(text) + "' (expected irma|holidays)");
}

struct QueryOutcome {
    std::string query_id;
    std::string query_label;
    std::string match_id;
    std::string match_label;
    double distance = 0.0;
    double error = 0.0;  // IRMA protocol
    bool hit = false;    // Holidays protocol
};

struct EvalReport {
    Protocol protocol = Protocol::Irma;
    Metric metric = Metric::L1;
    std::size_t descriptor_length = 0;
    std::size_t index_size = 0;
    std::vector<QueryOutcome> per_query;
    double total_error = 0.0;
    double accuracy = 0.0;
    std::size_t hits = 0;
    double true_retrieval_rate = 0.0;
    double wall_seconds = 0.0;  // kept out of the JSON payload
};

namespace detail {

inline std::vector<QueryOutcome> first_matches(const DescriptorIndex& index, std::span<const LabeledDescriptor> queries,
                                               std::size_t workers) {
    std::vector<QueryOutcome> out(queries.size());
    parallel_for(queries.size(), [&](std::size_t q) {
        const auto& query = queries[q];
        const QueryResult r = knn_query(index, query.descriptor, 1);
        out[q] = {query.descriptor.source_id, query.label, r.neighbors[0].source_id, r.neighbors[0].label,
                  r.neighbors[0].distance, 0.0, false};
    }, workers);
    return out;
}

} // namespace detail

/// First-match retrieval scored with the hierarchical IRMA error.
inline EvalReport evaluate_irma(const DescriptorIndex& index, std::span<const LabeledDescriptor> queries,
                                const IrmaBranching& branching = {}, std::size_t workers = worker_count()) {
    for (const auto& q : queries)
        if (q.label.empty()) throw Error("evaluate_irma: query '" + q.descriptor.source_id + "' has no IRMA code");
    EvalReport report{Protocol::Irma, index.metric(), index.length(), index.size(), {}, 0.0, 0.0, 0, 0.0, 0.0};
    report.per_query = detail::first_matches(index, queries, workers);
    for (auto& o : report.per_query) {
        o.error = irma_error(parse_irma_code(o.query_label), parse_irma_code(o.match_label), branching);
        report.total_error += o.error;
    }
    report.accuracy = queries.empty() ? 0.0 : 1.0 - report.total_error / static_cast<double>(queries.size());
    return report;
}

/// First-match retrieval scored as a hit when the match shares the query's category.
/// Query images must not be part of the index.
inline EvalReport evaluate_holidays(const DescriptorIndex& index, std::span<const LabeledDescriptor> queries,
                                    std::size_t workers = worker_count()) {
    for (const auto& q : queries) {
        if (q.label.empty()) throw Error("evaluate_holidays: query '" + q.descriptor.source_id + "' has no category");
        if (index.find(q.descriptor.source_id))
            throw Error("evaluate_holidays: query '" + q.descriptor.source_id + "' is also in the index");
    }
    EvalReport report{Protocol::Holidays, index.metric(), index.length(), index.size(), {}, 0.0, 0.0, 0, 0.0, 0.0};
    report.per_query = detail::first_matches(index, queries, workers);
    for (auto& o : report.per_query) {
        o.hit = o.query_label == o.match_label;
        report.hits += o.hit ? 1 : 0;
    }
    report.true_retrieval_rate =
        queries.empty() ? 0.0 : static_cast<double>(report.hits) / static_cast<double>(queries.size());
    return report;
}

inline nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json j;
    j["protocol"] = to_string(r.protocol);
    j["metric"] = to_string(r.metric);
    j["descriptor_length"] = r.descriptor_length;
    j["index_size"] = r.index_size;
    j["query_count"] = r.per_query.size();
    if (r.protocol == Protocol::Irma) {
        j["total_error"] = r.total_error;
        j["accuracy"] = r.accuracy;
    } else {
        j["hits"] = r.hits;
        j["true_retrieval_rate"] = r.true_retrieval_rate;
    }
    auto& rows = j["per_query"] = nlohmann::json::array();
    for (const auto& o : r.per_query) {
        nlohmann::json row{{"query_id", o.query_id}, {"match_id", o.match_id}, {"distance", o.distance}};
        if (r.protocol == Protocol::Irma)
            row["error"] = o.error;
        else
            row["hit"] = o.hit;
        rows.push_back(std::move(row));
    }
    return j;
}

inline void write_csv(std::ostream& os, const EvalReport& r) {
    os << (r.protocol == Protocol::Irma ? "query_id,match_id,error,distance\n" : "query_id,match_id,hit,distance\n");
    char buf[64];
    for (const auto& o : r.per_query) {
        os << o.query_id << ',' << o.match_id << ',';
        if (r.protocol == Protocol::Irma) {
            std::snprintf(buf, sizeof buf, "%.17g", o.error);
            os << buf;
        } else {
            os << (o.hit ? 1 : 0);
        }
        std::snprintf(buf, sizeof buf, ",%.17g\n", o.distance);
        os << buf;
    }
}

inline void write_summary(std::ostream& os, const EvalReport& r) {
    char score[64];
    if (r.protocol == Protocol::Irma)
        std::snprintf(score, sizeof score, "%.2f (%.2f%%)", r.total_error, 100.0 * r.accuracy);
    else
        std::snprintf(score, sizeof score, "%.2f%%", 100.0 * r.true_retrieval_rate);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-10s %-24s %-8s %s\n%-10s %-24s %-8zu %.3fs\n", "protocol",
                  r.protocol == Protocol::Irma ? "error (accuracy)" : "true", "length", "time",
                  std::string(to_string(r.protocol)).c_str(), score, r.descriptor_length, r.wall_seconds);
    os << buf;
    os << "queries: " << r.per_query.size() << "  index: " << r.index_size << "  metric: " << to_string(r.metric) << '\n';
}

} // namespace lrd
