// lrd: batch descriptor extraction, retrieval and evaluation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrd/io/descriptor_file.hpp"
#include "lrd/io/extractor.hpp"
#include "lrd/io/image_io.hpp"
#include "lrd/io/manifest.hpp"
#include "lrd/io/standardize.hpp"
#include "lrd/lrd.hpp"

namespace fs = std::filesystem;
using namespace lrd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::pair<std::size_t, std::size_t> parse_grid(const std::string& text) {
    const auto x = text.find_first_of("xX");
    try {
        if (x == std::string::npos) {
            const auto n = std::stoull(text);
            return {n, n};
        }
        return {std::stoull(text.substr(0, x)), std::stoull(text.substr(x + 1))};
    } catch (const std::logic_error&) {
        throw Error("bad grid '" + text + "' (expected RxC, e.g. 5x5)");
    }
}

std::vector<std::size_t> parse_list(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            const auto dash = item.find('-');
            if (dash != std::string::npos && dash > 0) {
                const auto lo = std::stoull(item.substr(0, dash));
                const auto hi = std::stoull(item.substr(dash + 1));
                for (auto v = lo; v <= hi; ++v) out.push_back(v);
            } else {
                out.push_back(std::stoull(item));
            }
        } catch (const std::logic_error&) {
            throw Error(std::string("bad ") + what + " list '" + text + "'");
        }
    }
    if (out.empty()) throw Error(std::string("empty ") + what + " list");
    return out;
}

// Extraction flags shared by describe and sweep.
struct ExtractFlags {
    std::string preset = "irma";
    std::string grid;
    std::size_t bins = 0;
    std::size_t angles = 0;
    std::string pairing;
    std::optional<double> overlap;
    std::string method = "lrd";
    std::size_t gr_angles = 4;
    std::size_t gr_length = 0;
    bool no_normalize = false;
    std::size_t side = 256;
    bool pad_only = false;

    void attach(CLI::App* app) {
        app->add_option("--preset", preset, "Parameter preset: irma (5x5, 12 bins) or holidays (3x3, 22 bins)")
            ->check(CLI::IsMember({"irma", "holidays"}));
        app->add_option("--grid", grid, "Blocks per column x blocks per row, e.g. 5x5");
        app->add_option("--bins", bins, "Histogram bins per block");
        app->add_option("--angles", angles, "Number of projection angles (even)");
        app->add_option("--pairing", pairing, "Projection pairing")->check(CLI::IsMember({"orthogonal", "characteristic"}));
        app->add_option("--overlap", overlap, "Block overlap fraction in [0, 0.9]");
        app->add_option("--method", method, "Descriptor: lrd or gr (global Radon)")->check(CLI::IsMember({"lrd", "gr"}));
        app->add_option("--gr-angles", gr_angles, "Global Radon: number of angles");
        app->add_option("--gr-length", gr_length, "Global Radon: resample to this length (0 keeps all bins)");
        app->add_flag("--no-normalize", no_normalize, "Disable per-block L1 normalisation");
        app->add_option("--side", side, "Standardised image side in pixels");
        app->add_flag("--pad-only", pad_only, "Standardise by centre crop / zero padding without scaling");
    }

    ExtractorConfig config() const {
        ExtractorConfig c;
        c.method = method == "gr" ? Method::Gr : Method::Lrd;
        c.lrd = LrdParams::preset(preset);
        if (!grid.empty()) std::tie(c.lrd.rows, c.lrd.cols) = parse_grid(grid);
        if (bins) c.lrd.bins = bins;
        if (angles) c.lrd.angles = angles;
        if (!pairing.empty()) c.lrd.pairing = parse_pairing_kind(pairing);
        if (overlap) c.lrd.overlap = *overlap;
        if (no_normalize) c.lrd.normalize = Normalization::None;
        c.gr = {gr_angles, gr_length};
        c.side = side;
        c.resize = pad_only ? ResizeMode::PadOnly : ResizeMode::ScaleThenPad;
        if (c.method == Method::Lrd)
            c.lrd.validate();
        else
            c.gr.validate();
        return c;
    }
};

std::size_t resolve_workers(std::size_t flag) { return flag ? flag : worker_count(); }

std::vector<LabeledDescriptor> describe_records(const DatasetManifest& m, const Extractor& ex, std::size_t workers) {
    return describe_manifest(m, ex, Metric::L1, workers).items;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

// ---------------------------------------------------------------------------

int run_describe(const std::string& manifest_path, const std::string& kind, const std::string& out_path,
                 const ExtractFlags& flags, const std::string& metric, std::size_t threads) {
    const auto t0 = Clock::now();
    const auto manifest = read_manifest(manifest_path, parse_dataset_kind(kind));
    const Extractor extractor(flags.config());
    const auto set = describe_manifest(manifest, extractor, parse_metric(metric), resolve_workers(threads));
    save_descriptors(out_path, set);
    std::cout << "described " << set.items.size() << " images, length " << set.length << ", digest "
              << digest_hex(set.params_digest) << " (" << set.params << ") in " << seconds_since(t0) << "s\n";
    return 0;
}

int run_index(const std::string& in_path, const std::string& out_path, const std::string& metric_flag) {
    auto set = load_descriptors(in_path);
    if (!metric_flag.empty()) set.metric_hint = parse_metric(metric_flag);
    const auto index = build_index(set.items, set.metric_hint);  // validates homogeneity and ids
    save_descriptors(out_path, set);
    std::cout << "index of " << index.size() << " entries, length " << index.length() << ", metric "
              << to_string(index.metric()) << '\n';
    return 0;
}

int run_query(const std::string& index_path, const std::vector<std::string>& images, std::size_t k,
              const std::string& metric_flag, bool json_out) {
    const auto set = load_descriptors(index_path);
    const Metric metric = metric_flag.empty() ? set.metric_hint : parse_metric(metric_flag);
    const auto index = build_index(set.items, metric);
    const Extractor extractor(ExtractorConfig::parse(set.params));
    if (extractor.digest() != set.params_digest) throw Error("index params text does not match its digest");

    nlohmann::json all = nlohmann::json::array();
    for (const auto& image : images) {
        auto d = extractor(load_image(image), image);
        round_to_storage(d);
        const auto result = knn_query(index, d, k);
        if (json_out) {
            nlohmann::json q{{"query", image}, {"k", k}, {"neighbors", nlohmann::json::array()}};
            for (const auto& n : result.neighbors)
                q["neighbors"].push_back({{"id", n.source_id}, {"label", n.label}, {"distance", n.distance}});
            all.push_back(std::move(q));
        } else {
            for (std::size_t r = 0; r < result.neighbors.size(); ++r) {
                const auto& n = result.neighbors[r];
                std::printf("%s\t%zu\t%s\t%s\t%.9g\n", image.c_str(), r + 1, n.source_id.c_str(), n.label.c_str(),
                            n.distance);
            }
        }
    }
    if (json_out) std::cout << all.dump(2) << '\n';
    return 0;
}

struct EvalInputs {
    std::vector<LabeledDescriptor> database;
    std::vector<LabeledDescriptor> queries;
};

EvalReport score(Protocol protocol, const DescriptorIndex& index, const std::vector<LabeledDescriptor>& queries,
                 double branching, std::size_t workers) {
    return protocol == Protocol::Irma ? evaluate_irma(index, queries, IrmaBranching(branching), workers)
                                      : evaluate_holidays(index, queries, workers);
}

void write_report(const std::string& prefix, const EvalReport& report, const std::string& params) {
    auto j = to_json(report);
    j["params"] = params;
    write_text(prefix + ".json", j.dump(2) + "\n");
    std::ostringstream csv;
    write_csv(csv, report);
    write_text(prefix + ".csv", csv.str());
    std::ostringstream txt;
    write_summary(txt, report);
    write_text(prefix + ".txt", txt.str());
    write_text(prefix + ".timing.json", nlohmann::json{{"wall_seconds", report.wall_seconds}}.dump(2) + "\n");
}

int run_evaluate(const std::string& index_path, const std::string& queries_path, const std::string& query_desc_path,
                 const std::string& protocol_name, const std::string& prefix, const std::string& metric_flag,
                 double branching, std::size_t threads) {
    const auto t0 = Clock::now();
    const Protocol protocol = parse_protocol(protocol_name);
    auto set = load_descriptors(index_path);
    const Metric metric = metric_flag.empty() ? set.metric_hint : parse_metric(metric_flag);

    EvalInputs in;
    if (!query_desc_path.empty()) {
        auto qs = load_descriptors(query_desc_path);
        if (qs.params_digest != set.params_digest)
            throw Error("query descriptors (" + digest_hex(qs.params_digest) + ") and index (" +
                        digest_hex(set.params_digest) + ") were produced by different configurations");
        in.queries = std::move(qs.items);
        in.database = std::move(set.items);
    } else if (!queries_path.empty()) {
        const Extractor extractor(ExtractorConfig::parse(set.params));
        if (extractor.digest() != set.params_digest) throw Error("index params text does not match its digest");
        const auto kind = protocol == Protocol::Irma ? DatasetKind::Irma : DatasetKind::Holidays;
        in.queries = describe_records(read_manifest(queries_path, kind), extractor, resolve_workers(threads));
        for (auto& q : in.queries) round_to_storage(q.descriptor);
        in.database = std::move(set.items);
    } else if (protocol == Protocol::Holidays) {
        std::vector<std::string> labels;
        for (const auto& item : set.items) labels.push_back(item.label);
        const auto split = split_first_per_label(labels);
        for (auto i : split.queries) in.queries.push_back(std::move(set.items[i]));
        for (auto i : split.database) in.database.push_back(std::move(set.items[i]));
    } else {
        throw Error("evaluate: --queries or --query-descriptors is required for the irma protocol");
    }

    const auto index = build_index(std::move(in.database), metric);
    auto report = score(protocol, index, in.queries, branching, resolve_workers(threads));
    report.wall_seconds = seconds_since(t0);
    write_report(prefix, report, set.params);
    write_summary(std::cout, report);
    return 0;
}

int run_sweep(const std::string& train_path, const std::string& queries_path, const std::string& protocol_name,
              const std::string& grids_text, const std::string& bins_text, const ExtractFlags& flags,
              const std::string& metric_name, const std::string& out_path, std::size_t threads) {
    const Protocol protocol = parse_protocol(protocol_name);
    const auto kind = protocol == Protocol::Irma ? DatasetKind::Irma : DatasetKind::Holidays;
    const Metric metric = parse_metric(metric_name);
    const std::size_t workers = resolve_workers(threads);
    const auto grids = parse_list(grids_text, "grid");
    const auto bins = parse_list(bins_text, "bins");
    const ExtractorConfig base = flags.config();
    if (base.method != Method::Lrd) throw Error("sweep: only the lrd method has grid/bin parameters");

    struct Loaded {
        std::vector<GrayImage> images;
        std::vector<std::string> ids, labels;
    };
    const auto load = [&](const DatasetManifest& m) {
        Loaded l;
        l.images.resize(m.records.size());
        parallel_for(
            m.records.size(),
            [&](std::size_t i) { l.images[i] = standardize(load_image(m.records[i].path), base.side, base.resize); },
            workers);
        for (const auto& r : m.records) {
            l.ids.push_back(r.id);
            l.labels.push_back(r.label);
        }
        return l;
    };
    const Loaded train = load(read_manifest(train_path, kind));
    std::optional<Loaded> test;
    if (!queries_path.empty())
        test = load(read_manifest(queries_path, kind));
    else if (protocol == Protocol::Irma)
        throw Error("sweep: --queries is required for the irma protocol");

    std::ostringstream table;
    table << "grid,bins,length," << (protocol == Protocol::Irma ? "total_error,accuracy" : "true_rate") << ",seconds\n";
    std::printf("%-8s %-6s %-8s %-14s %s\n", "grid", "bins", "length", "score", "seconds");
    for (auto g : grids) {
        for (auto b : bins) {
            const auto t0 = Clock::now();
            ExtractorConfig c = base;
            c.lrd.rows = c.lrd.cols = g;
            c.lrd.bins = b;
            const Extractor ex(c);
            const auto describe = [&](const Loaded& l) {
                std::vector<LabeledDescriptor> out(l.images.size());
                parallel_for(
                    l.images.size(), [&](std::size_t i) { out[i] = {ex.from_standardized(l.images[i], l.ids[i]), l.labels[i]}; },
                    workers);
                return out;
            };
            std::vector<LabeledDescriptor> db = describe(train), qs;
            if (test) {
                qs = describe(*test);
            } else {
                std::vector<std::string> labels;
                for (const auto& item : db) labels.push_back(item.label);
                const auto split = split_first_per_label(labels);
                std::vector<LabeledDescriptor> rest;
                for (auto i : split.queries) qs.push_back(std::move(db[i]));
                for (auto i : split.database) rest.push_back(std::move(db[i]));
                db = std::move(rest);
            }
            const auto index = build_index(std::move(db), metric);
            const auto report = score(protocol, index, qs, 10.0, workers);
            const double secs = seconds_since(t0);
            char score_text[64];
            if (protocol == Protocol::Irma) {
                std::snprintf(score_text, sizeof score_text, "%.2f", report.total_error);
                table << g << "x" << g << "," << b << "," << c.length() << "," << report.total_error << ","
                      << report.accuracy << "," << secs << "\n";
            } else {
                std::snprintf(score_text, sizeof score_text, "%.2f%%", 100.0 * report.true_retrieval_rate);
                table << g << "x" << g << "," << b << "," << c.length() << "," << report.true_retrieval_rate << "," << secs
                      << "\n";
            }
            std::printf("%-8s %-6zu %-8zu %-14s %.2f\n", (std::to_string(g) + "x" + std::to_string(g)).c_str(), b,
                        c.length(), score_text, secs);
        }
    }
    if (!out_path.empty()) write_text(out_path, table.str());
    return 0;
}

int run_sinogram(const std::string& image_path, const std::string& out_path, const std::string& image_out,
                 std::size_t side, bool raw) {
    GrayImage image = load_image(image_path);
    if (!raw) image = standardize(image, side);
    const ProjectionSet s = sinogram(image);
    std::ostringstream csv;
    char buf[32];
    for (std::size_t i = 0; i < s.detector_length; ++i) {
        for (std::size_t j = 0; j < s.angle_count; ++j) {
            std::snprintf(buf, sizeof buf, "%s%.9g", j ? "," : "", s.at(i, j));
            csv << buf;
        }
        csv << '\n';
    }
    write_text(out_path, csv.str());
    if (!image_out.empty()) {
        double peak = 0.0;
        for (double v : s.values) peak = std::max(peak, v);
        GrayImage view(s.angle_count, s.detector_length);
        for (std::size_t i = 0; i < s.detector_length; ++i)
            for (std::size_t j = 0; j < s.angle_count; ++j) view(j, i) = peak > 0 ? 255.0 * s.at(i, j) / peak : 0.0;
        save_image(image_out, view);
    }
    std::cout << "sinogram " << s.detector_length << " x " << s.angle_count << " written to " << out_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local Radon descriptor extraction, retrieval and evaluation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value file");

    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads (default: LRD_THREADS or all cores)");

    // describe
    auto* describe = app.add_subcommand("describe", "Compute descriptors for every image of a manifest");
    std::string d_manifest, d_kind = "generic", d_out, d_metric = "l1";
    ExtractFlags d_flags;
    describe->add_option("--manifest", d_manifest, "CSV manifest with header path,id,label")->required();
    describe->add_option("--kind", d_kind, "Dataset kind used to validate labels")
        ->check(CLI::IsMember({"generic", "irma", "holidays"}));
    describe->add_option("--out", d_out, "Output descriptor file")->required();
    describe->add_option("--metric", d_metric, "Metric hint stored in the file");
    d_flags.attach(describe);

    // index
    auto* index = app.add_subcommand("index", "Validate a descriptor file and persist it as an index");
    std::string i_in, i_out, i_metric;
    index->add_option("--descriptors", i_in, "Descriptor file from describe")->required();
    index->add_option("--out", i_out, "Output index file")->required();
    index->add_option("--metric", i_metric, "Distance metric: l1, l2, chi2, cosine");

    // query
    auto* query = app.add_subcommand("query", "Rank index entries for query images");
    std::string q_index, q_metric;
    std::vector<std::string> q_images;
    std::size_t q_k = 1;
    bool q_json = false;
    query->add_option("--index", q_index, "Index file")->required();
    query->add_option("--k", q_k, "Number of neighbours")->check(CLI::PositiveNumber);
    query->add_option("--metric", q_metric, "Override the index metric");
    query->add_flag("--json", q_json, "Print JSON instead of tab-separated rows");
    query->add_option("images", q_images, "Query images")->required();

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Score first-match retrieval with the IRMA or Holidays protocol");
    std::string e_index, e_queries, e_qdesc, e_protocol, e_prefix = "report", e_metric;
    double e_branching = 10.0;
    evaluate->add_option("--index", e_index, "Index (database) file")->required();
    evaluate->add_option("--queries", e_queries, "Query manifest, described with the index configuration");
    evaluate->add_option("--query-descriptors", e_qdesc, "Pre-computed query descriptor file");
    evaluate->add_option("--protocol", e_protocol, "irma or holidays")->required()->check(CLI::IsMember({"irma", "holidays"}));
    evaluate->add_option("--out-prefix", e_prefix, "Report prefix: writes .json, .csv, .txt, .timing.json");
    evaluate->add_option("--metric", e_metric, "Override the index metric");
    evaluate->add_option("--branching", e_branching, "IRMA branching factor per code position")->check(CLI::PositiveNumber);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Evaluate a range of grid sizes and bin counts");
    std::string s_train, s_queries, s_protocol, s_grids = "3,4,5", s_bins = "8,12,16,22", s_metric = "l1", s_out;
    ExtractFlags s_flags;
    sweep->add_option("--train", s_train, "Database manifest")->required();
    sweep->add_option("--queries", s_queries, "Query manifest (holidays: optional, first image per category)");
    sweep->add_option("--protocol", s_protocol, "irma or holidays")->required()->check(CLI::IsMember({"irma", "holidays"}));
    sweep->add_option("--grids", s_grids, "Square grid sizes, e.g. 3,4,5 or 2-6");
    sweep->add_option("--bins-list", s_bins, "Bin counts, e.g. 8,12,22");
    sweep->add_option("--metric", s_metric, "Distance metric");
    sweep->add_option("--out", s_out, "CSV table output");
    s_flags.attach(sweep);

    // sinogram
    auto* sino = app.add_subcommand("sinogram", "Dump the 180-angle sinogram of an image");
    std::string g_image, g_out, g_png;
    std::size_t g_side = 256;
    bool g_raw = false;
    sino->add_option("--image", g_image, "Input image")->required();
    sino->add_option("--out", g_out, "CSV output, one row per detector bin, one column per degree")->required();
    sino->add_option("--png", g_png, "Also write the sinogram as an 8-bit image");
    sino->add_option("--side", g_side, "Standardised side");
    sino->add_flag("--raw", g_raw, "Project the image as loaded (must be square)");

    // manifest generators
    auto* manifest = app.add_subcommand("manifest", "Generate dataset manifests");
    manifest->require_subcommand(1);
    auto* m_holidays = manifest->add_subcommand("holidays", "From a directory of numbered Holidays images");
    std::string mh_dir, mh_out;
    m_holidays->add_option("--dir", mh_dir, "Image directory")->required();
    m_holidays->add_option("--out", mh_out, "Output manifest")->required();
    auto* m_irma = manifest->add_subcommand("irma", "From an explicit 'image_id;code' list");
    std::string mi_codes, mi_images, mi_out;
    m_irma->add_option("--codes", mi_codes, "Code list file")->required();
    m_irma->add_option("--images", mi_images, "Image directory")->required();
    m_irma->add_option("--out", mi_out, "Output manifest")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*describe) return run_describe(d_manifest, d_kind, d_out, d_flags, d_metric, threads);
        if (*index) return run_index(i_in, i_out, i_metric);
        if (*query) return run_query(q_index, q_images, q_k, q_metric, q_json);
        if (*evaluate)
            return run_evaluate(e_index, e_queries, e_qdesc, e_protocol, e_prefix, e_metric, e_branching, threads);
        if (*sweep) return run_sweep(s_train, s_queries, s_protocol, s_grids, s_bins, s_flags, s_metric, s_out, threads);
        if (*sino) return run_sinogram(g_image, g_out, g_png, g_side, g_raw);
        if (*m_holidays) {
            const auto m = holidays_manifest(mh_dir);
            write_manifest(mh_out, m);
            std::cout << m.records.size() << " records written to " << mh_out << '\n';
            return 0;
        }
        if (*m_irma) {
            const auto m = irma_manifest(mi_codes, mi_images);
            write_manifest(mi_out, m);
            std::cout << m.records.size() << " records written to " << mi_out << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
