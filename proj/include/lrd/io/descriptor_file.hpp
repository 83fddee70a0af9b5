#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "lrd/digest.hpp"
#include "lrd/error.hpp"
#include "lrd/retrieval.hpp"

namespace lrd {

// Binary descriptor file, all integers and floats little-endian:
//
//   0  char[4]  "LRDF"
//   4  u32      format version (1)
//   8  u32      descriptor length
//  12  u32      record count
//  16  u64      params digest
//  24  u32      metric hint (0 l1, 1 l2, 2 chi2, 3 cosine)
//  28  u32      reserved, 0
//  32  f32[count * length]  payload, record-major
//  then per record: u32 id size, id bytes, u32 label size, label bytes
//  then u32 params size, canonical params text
inline constexpr std::uint32_t kDescriptorFileVersion = 1;
inline constexpr std::size_t kDescriptorHeaderSize = 32;

struct DescriptorSet {
    std::size_t length = 0;
    std::uint64_t params_digest = 0;
    Metric metric_hint = Metric::L1;
    std::string params;  // canonical configuration text; digest == fnv1a64(params) when set
    std::vector<LabeledDescriptor> items;
};

namespace detail {

class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void text(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes.insert(bytes.end(), s.begin(), s.end());
    }
    std::vector<char> bytes;
};

class ByteReader {
public:
    ByteReader(const std::vector<char>& data, std::string origin) : data_(data), origin_(std::move(origin)) {}

    void need(std::size_t n, const char* what) const {
        if (pos_ + n > data_.size()) throw Error("descriptor file '" + origin_ + "' is truncated (" + what + ")");
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        const std::uint64_t lo = u32(what);
        const std::uint64_t hi = u32(what);
        return lo | (hi << 32);
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    std::string text(const char* what) {
        const std::uint32_t n = u32(what);
        need(n, what);
        std::string s(data_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    std::string raw(std::size_t n, const char* what) {
        need(n, what);
        std::string s(data_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const noexcept { return pos_ == data_.size(); }

private:
    const std::vector<char>& data_;
    std::string origin_;
    std::size_t pos_ = 0;
};

inline std::uint32_t metric_code(Metric m) { return static_cast<std::uint32_t>(m); }

inline Metric metric_from_code(std::uint32_t code) {
    if (code > 3) throw Error("descriptor file: unknown metric hint " + std::to_string(code));
    return static_cast<Metric>(code);
}

} // namespace detail

/// Rounds values to the precision descriptor files store, so freshly computed
/// queries compare against stored entries on equal terms.
inline void round_to_storage(Descriptor& d) {
    for (double& v : d.values) v = static_cast<float>(v);
}

inline std::vector<char> encode_descriptors(const DescriptorSet& set) {
    detail::ByteWriter w;
    w.bytes.insert(w.bytes.end(), {'L', 'R', 'D', 'F'});
    w.u32(kDescriptorFileVersion);
    w.u32(static_cast<std::uint32_t>(set.length));
    w.u32(static_cast<std::uint32_t>(set.items.size()));
    w.u64(set.params_digest);
    w.u32(detail::metric_code(set.metric_hint));
    w.u32(0);
    for (const auto& item : set.items) {
        if (item.descriptor.values.size() != set.length)
            throw Error("save_descriptors: '" + item.descriptor.source_id + "' has length " +
                        std::to_string(item.descriptor.values.size()) + ", expected " + std::to_string(set.length));
        if (item.descriptor.params_digest != set.params_digest)
            throw Error("save_descriptors: '" + item.descriptor.source_id + "' was produced by a different configuration");
        for (double v : item.descriptor.values) w.f32(static_cast<float>(v));
    }
    for (const auto& item : set.items) {
        w.text(item.descriptor.source_id);
        w.text(item.label);
    }
    w.text(set.params);
    return std::move(w.bytes);
}

inline DescriptorSet decode_descriptors(const std::vector<char>& bytes, const std::string& origin = "<memory>") {
    detail::ByteReader r(bytes, origin);
    if (r.raw(4, "magic") != "LRDF") throw Error("'" + origin + "' is not a descriptor file (bad magic)");
    const std::uint32_t version = r.u32("version");
    if (version != kDescriptorFileVersion)
        throw Error("'" + origin + "': unsupported descriptor file version " + std::to_string(version));
    DescriptorSet set;
    set.length = r.u32("length");
    const std::uint32_t count = r.u32("count");
    set.params_digest = r.u64("digest");
    set.metric_hint = detail::metric_from_code(r.u32("metric"));
    (void)r.u32("reserved");
    r.need(static_cast<std::size_t>(count) * set.length * 4, "payload");

    set.items.resize(count);
    for (auto& item : set.items) {
        item.descriptor.params_digest = set.params_digest;
        item.descriptor.values.resize(set.length);
        for (double& v : item.descriptor.values) v = r.f32("payload");
    }
    for (auto& item : set.items) {
        item.descriptor.source_id = r.text("record id");
        item.label = r.text("record label");
    }
    set.params = r.text("params");
    if (!r.done()) throw Error("'" + origin + "': trailing bytes after descriptor file trailer");
    if (!set.params.empty() && fnv1a64(set.params) != set.params_digest)
        throw Error("'" + origin + "': params digest does not match the stored configuration");
    return set;
}

inline void save_descriptors(const std::filesystem::path& path, const DescriptorSet& set) {
    const auto bytes = encode_descriptors(set);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

inline DescriptorSet load_descriptors(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open descriptor file '" + path.string() + "'");
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_descriptors(bytes, path.string());
}

} // namespace lrd
