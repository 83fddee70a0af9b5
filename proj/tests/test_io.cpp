#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <opencv2/imgcodecs.hpp>

#include "lrd/io/extractor.hpp"
#include "test_util.hpp"

using namespace lrd;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("lrd_io_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

void write_bytes(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
}

GrayImage integer_image(std::mt19937_64& rng, std::size_t w, std::size_t h) {
    std::uniform_int_distribution<int> u(0, 255);
    GrayImage img(w, h);
    for (auto& v : img.pixels()) v = u(rng);
    return img;
}

DescriptorSet sample_set(std::mt19937_64& rng, std::size_t count, std::size_t length) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DescriptorSet set;
    set.length = length;
    set.params = "lrd;grid=5x5;overlap=0;angles=18;bins=12;pairing=characteristic;normalize=l1;side=256;resize=scale";
    set.params_digest = fnv1a64(set.params);
    set.metric_hint = Metric::ChiSquare;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> v(length);
        for (auto& x : v) x = static_cast<float>(u(rng));
        set.items.push_back({{std::move(v), set.params_digest, "img_" + std::to_string(i)}, "label " + std::to_string(i % 3)});
    }
    return set;
}

} // namespace

TEST(standardize, leaves_canvas_sized_images_alone) {
    std::mt19937_64 rng(51);
    const auto img = integer_image(rng, 256, 256);
    EXPECT_EQ(standardize(img), img);
    EXPECT_EQ(standardize(img, 256, ResizeMode::PadOnly), img);
}

TEST(standardize, wide_image_is_scaled_and_padded) {
    GrayImage img(512, 256, 100.0);
    const auto out = standardize(img);
    ASSERT_EQ(out.width(), 256u);
    ASSERT_EQ(out.height(), 256u);
    // Content occupies rows 64..191; the bands above and below are exactly zero.
    for (std::size_t x = 0; x < 256; ++x) {
        EXPECT_EQ(out(x, 0), 0.0);
        EXPECT_EQ(out(x, 63), 0.0);
        EXPECT_NEAR(out(x, 64), 100.0, 1e-9);
        EXPECT_NEAR(out(x, 191), 100.0, 1e-9);
        EXPECT_EQ(out(x, 192), 0.0);
        EXPECT_EQ(out(x, 255), 0.0);
    }
}

TEST(standardize, small_image_is_upscaled) {
    GrayImage img(100, 100, 7.0);
    const auto out = standardize(img);
    ASSERT_EQ(out.width(), 256u);
    for (double v : out.pixels()) EXPECT_NEAR(v, 7.0, 1e-9);
}

TEST(standardize, zero_image_stays_zero) {
    const auto out = standardize(GrayImage(300, 120, 0.0));
    EXPECT_EQ(out.mass(), 0.0);
}

TEST(standardize, pad_only_crops_and_pads_around_the_centre) {
    std::mt19937_64 rng(52);
    const auto img = integer_image(rng, 300, 100);
    const auto out = standardize(img, 256, ResizeMode::PadOnly);
    ASSERT_EQ(out.width(), 256u);
    // Width is cropped by 22 on each side, height padded by 78.
    EXPECT_EQ(out(0, 78), img(22, 0));
    EXPECT_EQ(out(255, 177), img(277, 99));
    EXPECT_EQ(out(10, 77), 0.0);
    EXPECT_EQ(out(10, 178), 0.0);
}

TEST(standardize, rejects_tiny_canvas) {
    EXPECT_THROW(standardize(GrayImage(20, 20, 1.0), 8), Error);
}

TEST(image_io, pgm_round_trip_is_exact) {
    TempDir dir;
    std::mt19937_64 rng(53);
    const auto img = integer_image(rng, 37, 21);
    save_image(dir / "a.pgm", img);
    EXPECT_EQ(load_image(dir / "a.pgm"), img);
    save_image(dir / "a.png", img);
    EXPECT_EQ(load_image(dir / "a.png"), img);
}

TEST(image_io, colour_png_uses_luma) {
    TempDir dir;
    cv::Mat bgr(4, 4, CV_8UC3, cv::Scalar(0, 0, 0));
    bgr.at<cv::Vec3b>(1, 2) = cv::Vec3b(255, 0, 0);  // blue
    bgr.at<cv::Vec3b>(2, 1) = cv::Vec3b(0, 0, 255);  // red
    bgr.at<cv::Vec3b>(3, 3) = cv::Vec3b(0, 255, 0);  // green
    ASSERT_TRUE(cv::imwrite((dir / "c.png").string(), bgr));
    const auto img = load_image(dir / "c.png");
    EXPECT_NEAR(img(2, 1), 0.114 * 255, 0.5);
    EXPECT_NEAR(img(1, 2), 0.299 * 255, 0.5);
    EXPECT_NEAR(img(3, 3), 0.587 * 255, 0.5);
    EXPECT_EQ(img(0, 0), 0.0);
}

TEST(image_io, corrupt_or_missing_files_fail_with_the_path) {
    TempDir dir;
    write_bytes(dir / "bad.png", "\x89PNG\r\n\x1a\nnot really a png");
    try {
        load_image(dir / "bad.png");
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("bad.png"), std::string::npos);
    }
    EXPECT_THROW(load_image(dir / "missing.png"), Error);
}

TEST(descriptor_file, round_trip_is_bitwise) {
    TempDir dir;
    std::mt19937_64 rng(54);
    const auto set = sample_set(rng, 25, 300);
    save_descriptors(dir / "d.lrdf", set);
    const auto back = load_descriptors(dir / "d.lrdf");
    EXPECT_EQ(back.length, set.length);
    EXPECT_EQ(back.params_digest, set.params_digest);
    EXPECT_EQ(back.metric_hint, set.metric_hint);
    EXPECT_EQ(back.params, set.params);
    ASSERT_EQ(back.items.size(), set.items.size());
    for (std::size_t i = 0; i < set.items.size(); ++i) {
        EXPECT_EQ(back.items[i].descriptor, set.items[i].descriptor);
        EXPECT_EQ(back.items[i].label, set.items[i].label);
    }
}

TEST(descriptor_file, size_follows_layout) {
    std::mt19937_64 rng(55);
    const auto set = sample_set(rng, 10, 198);
    std::size_t trailer = 4 + set.params.size();
    for (const auto& it : set.items) trailer += 8 + it.descriptor.source_id.size() + it.label.size();
    EXPECT_EQ(encode_descriptors(set).size(), kDescriptorHeaderSize + 10 * 198 * 4 + trailer);
}

TEST(descriptor_file, rejects_damaged_input) {
    std::mt19937_64 rng(56);
    const auto bytes = encode_descriptors(sample_set(rng, 3, 12));

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(decode_descriptors(bad_magic), Error);

    auto bad_version = bytes;
    bad_version[4] = 2;
    EXPECT_THROW(decode_descriptors(bad_version), Error);

    for (std::size_t cut : {std::size_t{10}, kDescriptorHeaderSize + 5, bytes.size() - 1}) {
        const std::vector<char> truncated(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        EXPECT_THROW(decode_descriptors(truncated), Error) << cut;
    }

    auto trailing = bytes;
    trailing.push_back(0);
    EXPECT_THROW(decode_descriptors(trailing), Error);

    auto bad_digest = bytes;
    bad_digest[16] ^= 1;
    EXPECT_THROW(decode_descriptors(bad_digest), Error);
}

TEST(descriptor_file, refuses_to_mix_configurations) {
    std::mt19937_64 rng(57);
    auto set = sample_set(rng, 3, 12);
    set.items[1].descriptor.params_digest ^= 1;
    EXPECT_THROW(encode_descriptors(set), Error);
    set = sample_set(rng, 3, 12);
    set.items[2].descriptor.values.pop_back();
    EXPECT_THROW(encode_descriptors(set), Error);
}

TEST(manifest, round_trip_fuzz) {
    std::mt19937_64 rng(58);
    const std::string alphabet = "abcXYZ019 ,\"._-/";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(1, 12);
    auto word = [&] {
        std::string s;
        for (std::size_t n = len(rng); n > 0; --n) s += alphabet[pick(rng)];
        return s;
    };
    for (int t = 0; t < 100; ++t) {
        DatasetManifest m{DatasetKind::Generic, {}};
        for (int i = 0; i < 20; ++i) m.records.push_back({word(), "id" + std::to_string(i) + word(), word()});
        std::istringstream in(emit_manifest(m));
        EXPECT_EQ(parse_manifest(in).records, m.records);
    }
}

TEST(manifest, rejects_bad_input) {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_manifest(in);
    };
    EXPECT_THROW(parse("file,id,label\na.png,a,1\n"), Error);
    EXPECT_THROW(parse("path,id,label\na.png,a,1\nb.png,a,2\n"), Error);
    EXPECT_THROW(parse("path,id,label\na.png,,1\n"), Error);
    EXPECT_THROW(parse("path,id,label\na.png,a\n"), Error);
    EXPECT_THROW(parse("path,id,label\n\"a.png,a,1\n"), Error);
    EXPECT_EQ(parse("path,id,label\r\na.png,a,1\r\n").records.size(), 1u);
}

TEST(manifest, relative_paths_resolve_against_the_manifest) {
    TempDir dir;
    fs::create_directories(dir / "sub");
    write_bytes(dir / "sub" / "m.csv", "path,id,label\nimg/a.png,a,1\n/abs/b.png,b,2\n");
    const auto m = read_manifest(dir / "sub" / "m.csv");
    EXPECT_EQ(fs::path(m.records[0].path), dir / "sub" / "img" / "a.png");
    EXPECT_EQ(m.records[1].path, "/abs/b.png");
}

TEST(manifest, first_record_per_label_is_a_query) {
    const auto split = split_first_per_label({"1", "1", "2", "1", "3", "2"});
    EXPECT_EQ(split.queries, (std::vector<std::size_t>{0, 2, 4}));
    EXPECT_EQ(split.database, (std::vector<std::size_t>{1, 3, 5}));
}

TEST(manifest, holidays_directory_listing) {
    TempDir dir;
    for (const char* name : {"100000.jpg", "100001.jpg", "100100.jpg", "100101.JPG", "notes.txt", "cover.jpg"})
        write_bytes(dir / name, "x");
    const auto m = holidays_manifest(dir.path());
    ASSERT_EQ(m.records.size(), 4u);
    EXPECT_EQ(m.records[0].id, "100000");
    EXPECT_EQ(m.records[0].label, "1000");
    EXPECT_EQ(m.records[2].label, "1001");
    EXPECT_EQ(m.records[3].id, "100101");
}

TEST(manifest, irma_code_list) {
    TempDir dir;
    fs::create_directories(dir / "img");
    write_bytes(dir / "img" / "11.png", "x");
    write_bytes(dir / "img" / "12.png", "x");
    write_bytes(dir / "codes.csv", "image_id;irma_code\n11;1121-127-700-500\n12;1121-120-200-700\n");
    const auto m = irma_manifest(dir / "codes.csv", dir / "img");
    ASSERT_EQ(m.records.size(), 2u);
    EXPECT_EQ(m.records[1].id, "12");
    EXPECT_EQ(m.records[1].label, "1121-120-200-700");

    write_bytes(dir / "codes2.csv", "13;1121-127-700-500\n");
    EXPECT_THROW(irma_manifest(dir / "codes2.csv", dir / "img"), Error);
    write_bytes(dir / "codes3.csv", "11;1121-127-7#0-500\n");
    EXPECT_THROW(irma_manifest(dir / "codes3.csv", dir / "img"), Error);
}

TEST(extractor_config, canonical_text_round_trips) {
    ExtractorConfig a;
    EXPECT_EQ(ExtractorConfig::parse(a.canonical()).canonical(), a.canonical());
    EXPECT_EQ(a.length(), 300u);

    ExtractorConfig b;
    b.lrd = LrdParams::holidays();
    b.lrd.overlap = 0.25;
    b.lrd.pairing = PairingKind::Orthogonal;
    b.resize = ResizeMode::PadOnly;
    b.side = 128;
    EXPECT_EQ(ExtractorConfig::parse(b.canonical()).digest(), b.digest());
    EXPECT_NE(a.digest(), b.digest());

    ExtractorConfig g;
    g.method = Method::Gr;
    g.gr.angles = 6;
    g.gr.target_length = 64;
    EXPECT_EQ(ExtractorConfig::parse(g.canonical()).canonical(), g.canonical());
    EXPECT_EQ(g.length(), 64u);

    EXPECT_THROW(ExtractorConfig::parse("sift;side=256"), Error);
    EXPECT_THROW(ExtractorConfig::parse("lrd;grid=5;overlap=0"), Error);
}

TEST(extractor, describes_a_manifest_in_order) {
    TempDir dir;
    std::mt19937_64 rng(59);
    DatasetManifest m{DatasetKind::Generic, {}};
    for (int i = 0; i < 6; ++i) {
        const auto p = dir / ("i" + std::to_string(i) + ".pgm");
        save_image(p, integer_image(rng, 40 + 10 * i, 50));
        m.records.push_back({p.string(), "i" + std::to_string(i), std::to_string(i % 2)});
    }
    ExtractorConfig cfg;
    cfg.side = 64;
    const Extractor ex(cfg);
    const auto one = describe_manifest(m, ex, Metric::L1, 1);
    const auto many = describe_manifest(m, ex, Metric::L1, 4);
    ASSERT_EQ(one.items.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) {
        EXPECT_EQ(one.items[i].descriptor.source_id, m.records[i].id);
        EXPECT_EQ(one.items[i].descriptor, many.items[i].descriptor);
        EXPECT_EQ(one.items[i].descriptor, ex(load_image(m.records[i].path), m.records[i].id));
    }
    EXPECT_EQ(one.params, cfg.canonical());

    m.records.push_back({(dir / "missing.pgm").string(), "gone", "0"});
    EXPECT_THROW(describe_manifest(m, ex, Metric::L1, 2), Error);
}
