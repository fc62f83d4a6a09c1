#pragma once

#include <atomic>
#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "stitchkit/inject.hpp"
#include "stitchkit/io.hpp"
#include "stitchkit/metrics.hpp"
#include "stitchkit/serialize.hpp"

namespace stitchkit {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// All tunables in one place; mirrors the config file's four sections.
struct ToolkitConfig {
    AugmentConfig augment;
    SynthesisParams synthesis;
    DecomposeConfig decompose;
    ScoreParams score;
};

inline ToolkitConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError("config '" + path.string() + "': " + e.what());
    }
    ToolkitConfig cfg;
    cfg.augment = j.value("augment", AugmentConfig{});
    cfg.synthesis = j.value("synthesis", SynthesisParams{});
    cfg.decompose = j.value("decompose", DecomposeConfig{});
    cfg.score = j.value("score", ScoreParams{});
    return cfg;
}

namespace detail {

inline bool has_image_extension(const fs::path& p) {
    const auto ext = p.extension().string();
    return ext == ".png" || ext == ".pgm";
}

inline std::vector<fs::path> list_input_images(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw UsageError("input directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && has_image_extension(entry.path()))
            files.push_back(entry.path());
    if (files.empty())
        throw UsageError("input directory '" + dir.string() + "' contains no .png/.pgm images");
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return files;
}

inline std::string replica_id(const fs::path& source, int replica) {
    std::ostringstream os;
    os << source.stem().string() << "_" << std::setw(3) << std::setfill('0') << replica;
    return os.str();
}

/// Run `body(index)` for every index in [0, total) across `workers` threads.
/// The first exception, if any, is rethrown on the calling thread.
template <typename Body>
inline void parallel_for(std::size_t total, int workers, Body&& body) {
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(total)));
    if (n == 1) {
        for (std::size_t i = 0; i < total; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (int t = 0; t < n; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= total) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

inline void write_manifest(const Manifest& manifest, const fs::path& output_dir) {
    const fs::path path = output_dir / "manifest.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << json(manifest).dump(2) << "\n";
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline void ensure_output_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'");
}

} // namespace detail

struct SynthesizeOptions {
    fs::path input_dir;
    fs::path output_dir;
    std::uint64_t seed = 0;
    int count = 1;            // replicas per input image
    bool warmup = false;
    int workers = 1;
    bool debug = false;       // also write the pre-injection intermediate
    int target_w = 224;
    int target_h = 224;
};

/// Batch synthesis: for every input image and replica index, write
/// `<id>_img.png` and `<id>_mask.png` plus one manifest record. Sample i*count+r
/// draws from seed derive_seed(master, i*count+r), so output bytes are
/// independent of worker count and ordering.
inline Manifest run_synthesize(const SynthesizeOptions& opt, ToolkitConfig cfg = {}) {
    if (opt.count < 1) throw UsageError("count must be >= 1");
    cfg.synthesis.warmup = cfg.synthesis.warmup || opt.warmup;
    cfg.synthesis.validate();
    cfg.augment.validate();

    const auto inputs = detail::list_input_images(opt.input_dir);
    detail::ensure_output_dir(opt.output_dir);

    std::vector<GrayImage> sources;
    sources.reserve(inputs.size());
    for (const auto& p : inputs) sources.push_back(load_image(p));

    const std::size_t total = inputs.size() * static_cast<std::size_t>(opt.count);
    std::vector<SampleRecord> records(total);

    detail::parallel_for(total, opt.workers, [&](std::size_t g) {
        const std::size_t i = g / opt.count;
        const int replica = static_cast<int>(g % opt.count);
        Rng rng(derive_seed(opt.seed, g));
        SynthesizedSample sample = synthesize_sample(sources[i], cfg.synthesis, cfg.augment, rng,
                                                     opt.target_w, opt.target_h);
        const std::string id = detail::replica_id(inputs[i], replica);
        save_image(sample.image, opt.output_dir / (id + "_img.png"));
        save_mask(sample.mask, opt.output_dir / (id + "_mask.png"));
        if (opt.debug) save_image(sample.augmented, opt.output_dir / (id + "_aug.png"));
        SampleRecord rec;
        rec.id = id;
        rec.source = inputs[i].filename().string();
        rec.original_width = sources[i].width;
        rec.original_height = sources[i].height;
        rec.gt_score = analytic_score(sample.plan, opt.target_w, opt.target_h, cfg.score.b, cfg.score.c);
        rec.shortfall = sample.plan.shortfall;
        rec.plan = std::move(sample.plan);
        records[g] = std::move(rec);
    });

    Manifest manifest;
    manifest.master_seed = opt.seed;
    manifest.count = opt.count;
    manifest.augment = cfg.augment;
    manifest.synthesis = cfg.synthesis;
    manifest.decompose = cfg.decompose;
    manifest.score = cfg.score;
    manifest.samples = std::move(records);
    detail::write_manifest(manifest, opt.output_dir);
    return manifest;
}

struct DegradeOptions {
    fs::path input_dir;
    fs::path output_dir;
    std::string category;  // "small" or "large"
    std::uint64_t seed = 0;
    int count = 1;
    int workers = 1;
};

/// Offset ranges for the two degradation severities.
inline std::pair<double, double> degrade_offset_range(const std::string& category) {
    if (category == "small") return {0.01, 0.02};
    if (category == "large") return {0.02, 0.07};
    throw UsageError("unknown degrade category '" + category + "' (expected small|large)");
}

/// Corrupt images at native resolution with patch artifacts only, for
/// matcher-impact studies. No resize, no augmentation.
inline Manifest run_degrade(const DegradeOptions& opt, ToolkitConfig cfg = {}) {
    if (opt.count < 1) throw UsageError("count must be >= 1");
    const auto [off_lo, off_hi] = degrade_offset_range(opt.category);
    cfg.synthesis.offset_fraction_min = off_lo;
    cfg.synthesis.offset_fraction_max = off_hi;
    cfg.synthesis.line_probability = 0.0;
    cfg.synthesis.warmup = false;
    cfg.synthesis.validate();

    const auto inputs = detail::list_input_images(opt.input_dir);
    detail::ensure_output_dir(opt.output_dir);

    std::vector<GrayImage> sources;
    sources.reserve(inputs.size());
    for (const auto& p : inputs) sources.push_back(load_image(p));

    const std::size_t total = inputs.size() * static_cast<std::size_t>(opt.count);
    std::vector<SampleRecord> records(total);

    detail::parallel_for(total, opt.workers, [&](std::size_t g) {
        const std::size_t i = g / opt.count;
        const int replica = static_cast<int>(g % opt.count);
        const GrayImage& src = sources[i];
        Rng rng(derive_seed(opt.seed, g));
        ArtifactPlan plan = sample_artifact_plan(src.width, src.height, cfg.synthesis, rng);
        auto [corrupted, mask] = apply_plan(src, plan);
        const std::string id = detail::replica_id(inputs[i], replica);
        save_image(corrupted, opt.output_dir / (id + "_img.png"));
        SampleRecord rec;
        rec.id = id;
        rec.source = inputs[i].filename().string();
        rec.original_width = src.width;
        rec.original_height = src.height;
        rec.gt_score = analytic_score(plan, src.width, src.height, cfg.score.b, cfg.score.c);
        rec.shortfall = plan.shortfall;
        rec.plan = std::move(plan);
        records[g] = std::move(rec);
    });

    Manifest manifest;
    manifest.master_seed = opt.seed;
    manifest.count = opt.count;
    manifest.augment = cfg.augment;
    manifest.synthesis = cfg.synthesis;
    manifest.decompose = cfg.decompose;
    manifest.score = cfg.score;
    manifest.samples = std::move(records);
    detail::write_manifest(manifest, opt.output_dir);
    return manifest;
}

/// Score one mask file or every mask in a directory; one JSON line each.
/// Unreadable files produce an error record and count as failures. Returns
/// the number of failures.
inline int run_score(const fs::path& mask_path, const DecomposeConfig& dcfg, const ScoreParams& sp,
                     std::ostream& out) {
    std::vector<fs::path> paths;
    if (fs::is_directory(mask_path)) {
        for (const auto& entry : fs::directory_iterator(mask_path))
            if (entry.is_regular_file() && detail::has_image_extension(entry.path()))
                paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
        if (paths.empty())
            throw UsageError("'" + mask_path.string() + "' contains no .png/.pgm masks");
    } else {
        paths.push_back(mask_path);
    }
    int failures = 0;
    for (const auto& p : paths) {
        try {
            const BinaryMask mask = load_mask(p);
            out << json(score_mask(mask, dcfg, sp)).dump() << "\n";
        } catch (const std::exception& e) {
            out << json{{"path", p.string()}, {"error", e.what()}}.dump() << "\n";
            ++failures;
        }
    }
    return failures;
}

struct EvaluateResult {
    MetricsReport report;
    std::vector<std::string> unmatched;  // filenames present on only one side
};

/// Pair prediction and ground-truth masks by filename and aggregate metrics.
/// Files without a counterpart (or with mismatched dimensions) are excluded
/// and listed; if nothing matches, that is a usage error.
inline EvaluateResult run_evaluate(const fs::path& pred_dir, const fs::path& gt_dir,
                                   const std::optional<fs::path>& report_path,
                                   const DecomposeConfig& dcfg = {}, const ScoreParams& sp = {},
                                   Aggregation agg = Aggregation::Macro) {
    const auto preds = detail::list_input_images(pred_dir);
    const auto gts = detail::list_input_images(gt_dir);

    std::vector<std::pair<BinaryMask, BinaryMask>> pairs;
    EvaluateResult result;
    std::size_t pi = 0, gi = 0;
    while (pi < preds.size() || gi < gts.size()) {
        if (gi >= gts.size() || (pi < preds.size() && preds[pi].filename() < gts[gi].filename())) {
            result.unmatched.push_back("pred/" + preds[pi++].filename().string());
        } else if (pi >= preds.size() || gts[gi].filename() < preds[pi].filename()) {
            result.unmatched.push_back("gt/" + gts[gi++].filename().string());
        } else {
            BinaryMask pred = load_mask(preds[pi]);
            BinaryMask gt = load_mask(gts[gi]);
            if (pred.width != gt.width || pred.height != gt.height)
                result.unmatched.push_back("dims/" + preds[pi].filename().string());
            else
                pairs.emplace_back(std::move(pred), std::move(gt));
            ++pi;
            ++gi;
        }
    }
    if (pairs.empty()) throw UsageError("no matching mask pairs between pred and gt directories");

    result.report = dataset_report(pairs, dcfg, sp, agg);
    if (report_path) {
        std::ofstream out(*report_path);
        if (!out) throw IoError("cannot write report '" + report_path->string() + "'");
        out << json(result.report).dump(2) << "\n";
    }
    return result;
}

/// Parse a match-score file: one float per line, blank lines ignored.
inline std::vector<double> load_score_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<double> scores;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        const std::string tok = line.substr(a, b - a + 1);
        double v = 0.0;
        const auto* begin = tok.data();
        const auto* end = tok.data() + tok.size();
        const auto res = std::from_chars(begin, end, v);
        if (res.ec != std::errc{} || res.ptr != end)
            throw FormatError(path.string() + ":" + std::to_string(lineno) +
                              ": not a number: '" + tok + "'");
        scores.push_back(v);
    }
    return scores;
}

inline double run_eer(const fs::path& genuine_path, const fs::path& impostor_path) {
    return compute_eer(load_score_file(genuine_path), load_score_file(impostor_path));
}

} // namespace stitchkit
