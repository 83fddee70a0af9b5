#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "lrd/error.hpp"
#include "lrd/evaluation.hpp"

namespace lrd {

enum class DatasetKind { Generic, Irma, Holidays };

inline std::string_view to_string(DatasetKind k) {
    switch (k) {
    case DatasetKind::Generic: return "generic";
    case DatasetKind::Irma: return "irma";
    case DatasetKind::Holidays: return "holidays";
    }
    return "?";
}

inline DatasetKind parse_dataset_kind(std::string_view s) {
    if (s == "generic") return DatasetKind::Generic;
    if (s == "irma") return DatasetKind::Irma;
    if (s == "holidays") return DatasetKind::Holidays;
    throw Error("unknown dataset kind '" + std::string(s) + "' (expected generic|irma|holidays)");
}

struct ManifestRecord {
    std::string path;
    std::string id;
    std::string label;

    friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
    DatasetKind kind = DatasetKind::Generic;
    std::vector<ManifestRecord> records;

    friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

namespace detail {

// RFC 4180 style: fields with a comma, quote, CR/LF or edge whitespace are quoted.
inline std::string csv_field(const std::string& s) {
    const bool quote = s.find_first_of(",\"\r\n") != std::string::npos ||
                       (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                                       std::isspace(static_cast<unsigned char>(s.back()))));
    if (!quote) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

// Reads one logical CSV row; returns false at end of input.
inline bool read_csv_row(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    char c;
    while (in.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            ++line_no;
            fields.push_back(std::move(field));
            return true;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (in_quotes) throw Error("manifest: unterminated quoted field near line " + std::to_string(line_no));
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

} // namespace detail

inline void validate_manifest(const DatasetManifest& m) {
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        const auto& r = m.records[i];
        const std::string where = "manifest record " + std::to_string(i + 1);
        if (r.path.empty()) throw Error(where + ": empty path");
        if (r.id.empty()) throw Error(where + ": empty id");
        if (!ids.insert(r.id).second) throw Error(where + ": duplicate id '" + r.id + "'");
        if (m.kind == DatasetKind::Irma) (void)parse_irma_code(r.label);
        if (m.kind == DatasetKind::Holidays && r.label.empty()) throw Error(where + ": missing category label");
    }
}

inline DatasetManifest parse_manifest(std::istream& in, DatasetKind kind = DatasetKind::Generic) {
    DatasetManifest m{kind, {}};
    std::vector<std::string> fields;
    std::size_t line = 1;
    if (!detail::read_csv_row(in, fields, line) || fields != std::vector<std::string>{"path", "id", "label"})
        throw Error("manifest: header must be 'path,id,label'");
    for (;;) {
        const std::size_t row_line = line;
        if (!detail::read_csv_row(in, fields, line)) break;
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != 3)
            throw Error("manifest line " + std::to_string(row_line) + ": expected 3 fields, got " +
                        std::to_string(fields.size()));
        m.records.push_back({fields[0], fields[1], fields[2]});
    }
    validate_manifest(m);
    return m;
}

inline std::string emit_manifest(const DatasetManifest& m) {
    std::string out = "path,id,label\n";
    for (const auto& r : m.records)
        out += detail::csv_field(r.path) + "," + detail::csv_field(r.id) + "," + detail::csv_field(r.label) + "\n";
    return out;
}

/// Reads a manifest file; relative image paths are resolved against the manifest's directory.
inline DatasetManifest read_manifest(const std::filesystem::path& path, DatasetKind kind = DatasetKind::Generic) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open manifest '" + path.string() + "'");
    DatasetManifest m;
    try {
        m = parse_manifest(in, kind);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    for (auto& r : m.records) {
        const std::filesystem::path p(r.path);
        if (p.is_relative() && !base.empty()) r.path = (base / p).string();
    }
    return m;
}

inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << emit_manifest(m);
}

/// Splits a Holidays-style manifest: the first record of every category is a
/// query, everything else forms the database.
struct QuerySplit {
    std::vector<std::size_t> queries;
    std::vector<std::size_t> database;
};

inline QuerySplit split_first_per_label(const std::vector<std::string>& labels) {
    QuerySplit split;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (seen.insert(labels[i]).second ? split.queries : split.database).push_back(i);
    return split;
}

namespace detail {

inline bool is_image_extension(std::string ext) {
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".pgm" || ext == ".bmp";
}

inline bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

} // namespace detail

/// Holidays naming: images are numbered (e.g. 100000.jpg, 100001.jpg) and the
/// category is the image number divided by 100.
inline DatasetManifest holidays_manifest(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error("'" + dir.string() + "' is not a directory");
    std::vector<std::pair<unsigned long long, std::filesystem::path>> images;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto& p = entry.path();
        const std::string stem = p.stem().string();
        if (!detail::is_image_extension(p.extension().string()) || !detail::all_digits(stem)) continue;
        images.emplace_back(std::stoull(stem), p);
    }
    std::sort(images.begin(), images.end());
    DatasetManifest m{DatasetKind::Holidays, {}};
    for (const auto& [number, p] : images)
        m.records.push_back({std::filesystem::absolute(p).string(), p.stem().string(), std::to_string(number / 100)});
    validate_manifest(m);
    return m;
}

/// IRMA: an explicit list of "image_id;code" (or comma separated) lines, with
/// images looked up as <images_dir>/<image_id>.{png,jpg,pgm,bmp,tif}.
inline DatasetManifest irma_manifest(const std::filesystem::path& code_list, const std::filesystem::path& images_dir) {
    std::ifstream in(code_list);
    if (!in) throw Error("cannot open IRMA code list '" + code_list.string() + "'");
    DatasetManifest m{DatasetKind::Irma, {}};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto sep = line.find_first_of(";,\t");
        if (sep == std::string::npos)
            throw Error(code_list.string() + ":" + std::to_string(line_no) + ": expected 'image_id;code'");
        const std::string id = line.substr(0, sep);
        const std::string code = line.substr(sep + 1);
        if (!detail::all_digits(id) && line_no == 1) continue;  // header row
        std::filesystem::path found;
        for (const char* ext : {".png", ".jpg", ".pgm", ".bmp", ".tif"}) {
            const auto candidate = images_dir / (id + ext);
            if (std::filesystem::exists(candidate)) {
                found = candidate;
                break;
            }
        }
        if (found.empty()) throw Error("no image file for IRMA id '" + id + "' in '" + images_dir.string() + "'");
        m.records.push_back({std::filesystem::absolute(found).string(), id, parse_irma_code(code).formatted()});
    }
    validate_manifest(m);
    return m;
}

} // namespace lrd
