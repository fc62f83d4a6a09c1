#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include <stitchkit/commands.hpp>
#include <stitchkit/stitchkit.hpp>

namespace fs = std::filesystem;
using namespace stitchkit;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "stitchkit_test_cli" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

GrayImage ridge_pattern(int w, int h, std::uint64_t seed) {
    // sinusoidal ridges with a bit of noise, loosely fingerprint-like
    GrayImage img(w, h);
    Rng rng(seed);
    const double fx = rng.uniform_real(0.10, 0.35);
    const double fy = rng.uniform_real(0.10, 0.35);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double v = 127.0 + 110.0 * std::sin(fx * x + fy * y + 0.002 * x * y);
            const double noise = rng.uniform_real(-8.0, 8.0);
            img.at(x, y) = static_cast<std::uint8_t>(std::clamp(v + noise, 0.0, 255.0));
        }
    return img;
}

fs::path make_input_dir(const std::string& name, int images, int w = 200, int h = 260) {
    const fs::path dir = fresh_dir(name);
    for (int i = 0; i < images; ++i) {
        std::ostringstream os;
        os << "finger_" << i << ".png";
        save_image(ridge_pattern(w, h, 7000 + i), dir / os.str());
    }
    return dir;
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
    std::map<std::string, std::string> tree;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        tree[fs::relative(entry.path(), dir).string()] =
            std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    }
    return tree;
}

} // namespace

TEST_CASE("synthesize writes count pairs per input plus a manifest") {
    const fs::path input = make_input_dir("synth_in", 1);
    const fs::path output = fresh_dir("synth_out");
    SynthesizeOptions opt;
    opt.input_dir = input;
    opt.output_dir = output;
    opt.seed = 42;
    opt.count = 3;
    const Manifest manifest = run_synthesize(opt);

    CHECK(manifest.samples.size() == 3);
    for (int r = 0; r < 3; ++r) {
        std::ostringstream id;
        id << "finger_0_" << std::setw(3) << std::setfill('0') << r;
        CHECK(fs::exists(output / (id.str() + "_img.png")));
        CHECK(fs::exists(output / (id.str() + "_mask.png")));
    }
    CHECK(fs::exists(output / "manifest.json"));

    // records carry original dimensions and a consistent analytic score
    for (const auto& rec : manifest.samples) {
        CHECK(rec.original_width == 200);
        CHECK(rec.original_height == 260);
        CHECK(rec.gt_score > 0.0);
    }
}

TEST_CASE("synthesize is byte-identical across runs and worker counts") {
    const fs::path input = make_input_dir("det_in", 2);
    const fs::path out1 = fresh_dir("det_out1");
    const fs::path out2 = fresh_dir("det_out2");
    const fs::path out8 = fresh_dir("det_out8");

    SynthesizeOptions opt;
    opt.input_dir = input;
    opt.seed = 123;
    opt.count = 2;

    opt.output_dir = out1;
    opt.workers = 1;
    run_synthesize(opt);
    opt.output_dir = out2;
    run_synthesize(opt);
    opt.output_dir = out8;
    opt.workers = 8;
    run_synthesize(opt);

    const auto t1 = read_tree(out1);
    CHECK(t1 == read_tree(out2));
    CHECK(t1 == read_tree(out8));
    CHECK(t1.size() == 2 * 2 * 2 + 1);  // img+mask per sample, one manifest
}

TEST_CASE("manifest replay regenerates the tree byte for byte") {
    const fs::path input = make_input_dir("replay_in", 1);
    const fs::path out1 = fresh_dir("replay_out1");
    SynthesizeOptions opt;
    opt.input_dir = input;
    opt.output_dir = out1;
    opt.seed = 777;
    opt.count = 2;
    opt.warmup = true;
    run_synthesize(opt);

    // reconstruct options and config purely from the manifest on disk
    std::ifstream in(out1 / "manifest.json");
    json j;
    in >> j;
    const Manifest manifest = j.get<Manifest>();
    ToolkitConfig cfg;
    cfg.augment = manifest.augment;
    cfg.synthesis = manifest.synthesis;
    cfg.decompose = manifest.decompose;
    cfg.score = manifest.score;
    SynthesizeOptions replay;
    replay.input_dir = input;
    replay.output_dir = fresh_dir("replay_out2");
    replay.seed = manifest.master_seed;
    replay.count = manifest.count;
    run_synthesize(replay, cfg);

    CHECK(read_tree(out1) == read_tree(replay.output_dir));
}

TEST_CASE("synthesize pixels outside the mask match the debug intermediate") {
    const fs::path input = make_input_dir("debug_in", 1);
    const fs::path output = fresh_dir("debug_out");
    SynthesizeOptions opt;
    opt.input_dir = input;
    opt.output_dir = output;
    opt.seed = 5;
    opt.count = 2;
    opt.debug = true;
    ToolkitConfig cfg;
    cfg.synthesis.line_probability = 0.0;  // patch mode: everything off-mask is untouched
    run_synthesize(opt, cfg);

    for (int r = 0; r < 2; ++r) {
        std::ostringstream id;
        id << "finger_0_" << std::setw(3) << std::setfill('0') << r;
        const GrayImage img = load_image(output / (id.str() + "_img.png"));
        const GrayImage aug = load_image(output / (id.str() + "_aug.png"));
        const BinaryMask mask = load_mask(output / (id.str() + "_mask.png"));
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                if (!mask.get(x, y)) REQUIRE(img.at(x, y) == aug.at(x, y));
    }
}

TEST_CASE("synthesize usage errors") {
    SynthesizeOptions opt;
    opt.input_dir = fresh_dir("empty_in");  // exists but holds no images
    opt.output_dir = fresh_dir("unused_out");
    opt.seed = 1;
    CHECK_THROWS_AS(run_synthesize(opt), UsageError);
    opt.input_dir = fs::temp_directory_path() / "stitchkit_no_such_dir";
    CHECK_THROWS_AS(run_synthesize(opt), UsageError);
}

TEST_CASE("degrade stays at native resolution with category offsets") {
    const fs::path input = make_input_dir("degrade_in", 1, 300, 400);
    const fs::path output = fresh_dir("degrade_out");
    DegradeOptions opt;
    opt.input_dir = input;
    opt.output_dir = output;
    opt.category = "small";
    opt.seed = 9;
    opt.count = 4;
    const Manifest manifest = run_degrade(opt);

    REQUIRE(manifest.samples.size() == 4);
    for (const auto& rec : manifest.samples) {
        CHECK(rec.plan.kind == PlanKind::Patches);
        for (const auto& p : rec.plan.patches) {
            // small category: floor(0.01*dim) .. floor(0.02*dim) per axis
            const int adx = std::abs(p.dx), ady = std::abs(p.dy);
            CHECK(adx >= 3);
            CHECK(adx <= 6);
            CHECK(ady >= 4);
            CHECK(ady <= 8);
        }
    }
    const GrayImage out0 = load_image(output / "finger_0_000_img.png");
    CHECK(out0.width == 300);
    CHECK(out0.height == 400);
    CHECK_FALSE(fs::exists(output / "finger_0_000_mask.png"));

    DegradeOptions bad = opt;
    bad.category = "huge";
    CHECK_THROWS_AS(run_degrade(bad), UsageError);
}

TEST_CASE("score command emits one pinned-schema JSON line per mask") {
    const fs::path dir = fresh_dir("score_masks");
    save_mask(BinaryMask(224, 224), dir / "empty.png");
    BinaryMask patch(224, 224);
    for (int y = 10; y < 30; ++y)
        for (int x = 10; x < 30; ++x) patch.set(x, y, true);
    save_mask(patch, dir / "patch.png");

    std::ostringstream out;
    const int failures = run_score(dir, {}, {}, out);
    CHECK(failures == 0);

    std::istringstream lines(out.str());
    std::string line;
    std::vector<json> reports;
    while (std::getline(lines, line)) reports.push_back(json::parse(line));
    REQUIRE(reports.size() == 2);

    // sorted order: empty.png first
    CHECK(reports[0]["score"].get<double>() == 0.0);
    CHECK(reports[0]["flagged"].get<bool>() == false);
    CHECK(reports[0]["n"].get<int>() == 0);
    CHECK(reports[0]["components"].is_array());
    CHECK(reports[1]["flagged"].get<bool>() == true);
    CHECK(reports[1]["n"].get<int>() == 1);
    const auto& comp = reports[1]["components"][0];
    CHECK(comp["class"].get<std::string>() == "patch");
    CHECK(comp["bbox"] == json({10, 10, 20, 20}));

    // unreadable entry produces an error record and a failure count
    {
        std::ofstream bad(dir / "broken.png");
        bad << "nope";
    }
    std::ostringstream out2;
    CHECK(run_score(dir, {}, {}, out2) == 1);
}

TEST_CASE("score of a manifest ground-truth mask equals the recorded gt score") {
    const fs::path input = make_input_dir("score_rt_in", 1);
    const fs::path output = fresh_dir("score_rt_out");
    SynthesizeOptions opt;
    opt.input_dir = input;
    opt.output_dir = output;
    opt.seed = 31;
    opt.count = 4;
    const Manifest manifest = run_synthesize(opt);
    for (const auto& rec : manifest.samples) {
        const BinaryMask mask = load_mask(output / (rec.id + "_mask.png"));
        const ScoreReport rep = score_mask(mask, manifest.decompose, manifest.score);
        REQUIRE_THAT(rep.score, Catch::Matchers::WithinAbs(rec.gt_score, 1e-9));
    }
}

TEST_CASE("evaluate compares mask directories") {
    const fs::path gt = fresh_dir("eval_gt");
    const fs::path pred = fresh_dir("eval_pred");
    BinaryMask left(10, 10), top(10, 10), empty(10, 10);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 5; ++x) left.set(x, y, true);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 10; ++x) top.set(x, y, true);

    SECTION("pred equals gt: perfect row") {
        save_mask(left, gt / "a.png");
        save_mask(top, gt / "b.png");
        save_mask(left, pred / "a.png");
        save_mask(top, pred / "b.png");
        const auto result = run_evaluate(pred, gt, std::nullopt);
        CHECK(result.report.iou == 1.0);
        CHECK(result.report.f1 == 1.0);
        CHECK(result.report.f2 == 1.0);
        CHECK(result.report.accuracy == 1.0);
        CHECK(result.report.recall == 1.0);
        CHECK(result.report.mean_score_diff == 0.0);
        CHECK(result.unmatched.empty());
    }
    SECTION("empty predictions against nonempty gt: zero recall") {
        save_mask(left, gt / "a.png");
        save_mask(empty, pred / "a.png");
        const auto result = run_evaluate(pred, gt, std::nullopt);
        CHECK(result.report.recall == 0.0);
    }
    SECTION("half-overlap pair reproduces the pixel-count metrics") {
        save_mask(left, gt / "a.png");
        save_mask(top, pred / "a.png");
        const fs::path report_file = fresh_dir("eval_rep") / "report.json";
        const auto result = run_evaluate(pred, gt, report_file);
        CHECK_THAT(result.report.iou, Catch::Matchers::WithinAbs(25.0 / 75.0, 1e-12));
        CHECK_THAT(result.report.f1, Catch::Matchers::WithinAbs(0.5, 1e-12));
        CHECK_THAT(result.report.f2, Catch::Matchers::WithinAbs(125.0 / 250.0, 1e-12));
        CHECK_THAT(result.report.accuracy, Catch::Matchers::WithinAbs(0.5, 1e-12));
        CHECK_THAT(result.report.recall, Catch::Matchers::WithinAbs(0.5, 1e-12));

        std::ifstream in(report_file);
        json j;
        in >> j;
        CHECK(j.contains("IoU"));
        CHECK(j.contains("Mean Score Dif."));
        CHECK_THAT(j["IoU"].get<double>(), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
    }
    SECTION("unmatched files are excluded with a warning") {
        save_mask(left, gt / "a.png");
        save_mask(left, gt / "only_gt.png");
        save_mask(left, pred / "a.png");
        save_mask(left, pred / "only_pred.png");
        const auto result = run_evaluate(pred, gt, std::nullopt);
        CHECK(result.report.samples == 1);
        REQUIRE(result.unmatched.size() == 2);
    }
    SECTION("all unmatched is a usage error") {
        save_mask(left, gt / "x.png");
        save_mask(left, pred / "y.png");
        CHECK_THROWS_AS(run_evaluate(pred, gt, std::nullopt), UsageError);
    }
}

TEST_CASE("eer command parses score files") {
    const fs::path dir = fresh_dir("eer_files");
    const auto write_scores = [&](const std::string& name, const std::vector<double>& vals) {
        std::ofstream out(dir / name);
        for (double v : vals) out << v << "\n";
        return dir / name;
    };
    const fs::path separable_g = write_scores("g1.csv", {0.8, 0.9, 0.95});
    const fs::path separable_i = write_scores("i1.csv", {0.1, 0.2});
    CHECK(run_eer(separable_g, separable_i) == 0.0);

    const fs::path same = write_scores("same.csv", {0.3, 0.5, 0.6, 0.9});
    CHECK_THAT(run_eer(same, same), Catch::Matchers::WithinAbs(0.5, 1e-12));

    const fs::path g4 = write_scores("g4.csv", {0.6, 0.7, 0.8, 0.9});
    const fs::path i4 = write_scores("i4.csv", {0.2, 0.3, 0.5, 0.65});
    CHECK_THAT(run_eer(g4, i4), Catch::Matchers::WithinAbs(0.25, 1e-12));

    {
        std::ofstream out(dir / "bad.csv");
        out << "0.5\nnot_a_number\n0.7\n";
    }
    try {
        run_eer(dir / "bad.csv", i4);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    CHECK_THROWS_AS(run_eer(dir / "missing.csv", i4), IoError);
}

TEST_CASE("artifact plans round-trip through JSON bit-exactly") {
    Rng rng(611);
    SynthesisParams params;
    for (int iter = 0; iter < 40; ++iter) {
        params.warmup = (iter % 3) == 0;
        const ArtifactPlan plan = sample_artifact_plan(
            static_cast<int>(rng.uniform_int(64, 400)),
            static_cast<int>(rng.uniform_int(64, 400)), params, rng);
        const json j = plan;
        REQUIRE(j.get<ArtifactPlan>() == plan);
    }
}

TEST_CASE("config file round-trip with flag-style overrides") {
    const fs::path dir = fresh_dir("config");
    const fs::path cfg_path = dir / "config.json";
    {
        std::ofstream out(cfg_path);
        out << R"({
            "augment": {"flip_probability": 1.0, "rotation_degrees": 5.0},
            "synthesis": {"line_probability": 0.5, "max_repetitions": 2},
            "decompose": {"connectivity": 4},
            "score": {"b": 7.0}
        })";
    }
    const ToolkitConfig cfg = load_config(cfg_path);
    CHECK(cfg.augment.flip_probability == 1.0);
    CHECK(cfg.augment.rotation_degrees == 5.0);
    CHECK(cfg.augment.crop_probability == 0.5);  // untouched default
    CHECK(cfg.synthesis.line_probability == 0.5);
    CHECK(cfg.synthesis.max_repetitions == 2);
    CHECK(cfg.decompose.connectivity == 4);
    CHECK(cfg.score.b == 7.0);
    CHECK(cfg.score.threshold == 7.0);  // tracks b when not pinned

    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_config(bad), FormatError);
}

#ifdef STITCHKIT_CLI_PATH
TEST_CASE("the installed binary honors the CLI grammar") {
    const fs::path dir = fresh_dir("cli_bin");
    const std::string bin = STITCHKIT_CLI_PATH;

    // unknown category -> usage error exit code 2
    const fs::path in_dir = make_input_dir("cli_bin_in", 1);
    {
        const std::string cmd = bin + " degrade --input " + in_dir.string() + " --output " +
                                (dir / "deg").string() + " --category huge --seed 1 2> " +
                                (dir / "err.txt").string();
        const int status = std::system(cmd.c_str());
        REQUIRE(WIFEXITED(status));
        CHECK(WEXITSTATUS(status) == 2);
    }

    // score a single empty mask to stdout
    save_mask(BinaryMask(64, 64), dir / "empty_mask.png");
    {
        const std::string cmd = bin + " score --mask " + (dir / "empty_mask.png").string() +
                                " > " + (dir / "score.jsonl").string();
        const int status = std::system(cmd.c_str());
        REQUIRE(WIFEXITED(status));
        CHECK(WEXITSTATUS(status) == 0);
        std::ifstream in(dir / "score.jsonl");
        json j;
        in >> j;
        CHECK(j["score"].get<double>() == 0.0);
        CHECK(j["flagged"].get<bool>() == false);
    }

    // a full synthesize round through the real binary
    {
        const std::string cmd = bin + " synthesize --input " + in_dir.string() + " --output " +
                                (dir / "synth").string() + " --seed 4 --count 1 2> /dev/null";
        const int status = std::system(cmd.c_str());
        REQUIRE(WIFEXITED(status));
        CHECK(WEXITSTATUS(status) == 0);
        CHECK(fs::exists(dir / "synth" / "manifest.json"));
        CHECK(fs::exists(dir / "synth" / "finger_0_000_img.png"));
        CHECK(fs::exists(dir / "synth" / "finger_0_000_mask.png"));
    }

    // missing required option -> nonzero exit
    {
        const std::string cmd = bin + " eer --genuine /dev/null 2> /dev/null";
        const int status = std::system(cmd.c_str());
        REQUIRE(WIFEXITED(status));
        CHECK(WEXITSTATUS(status) != 0);
    }
}
#endif
