// stitchkit: synthesize fingerprint mosaicking artifacts with exact ground
// truth, score segmentation masks, and evaluate detector output.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <stitchkit/stitchkit.hpp>

namespace sk = stitchkit;

namespace {

sk::ToolkitConfig load_or_default(const std::optional<std::string>& config_path) {
    return config_path ? sk::load_config(*config_path) : sk::ToolkitConfig{};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fingerprint mosaicking artifact toolkit", "stitchkit"};
    app.require_subcommand(1);

    // synthesize
    auto* synth = app.add_subcommand(
        "synthesize", "generate corrupted images with pixel-exact ground-truth masks");
    sk::SynthesizeOptions sopt;
    std::optional<std::string> synth_config;
    synth->add_option("--input", sopt.input_dir, "directory of clean source images")->required();
    synth->add_option("--output", sopt.output_dir, "output directory")->required();
    synth->add_option("--seed", sopt.seed, "master seed")->required();
    synth->add_option("--count", sopt.count, "replicas per input image");
    synth->add_flag("--warmup", sopt.warmup, "double the size and offset fraction ranges");
    synth->add_option("--config", synth_config, "JSON config file");
    synth->add_option("--workers", sopt.workers, "worker threads (output is identical for any value)");
    synth->add_flag("--debug", sopt.debug, "also write the pre-injection intermediates");

    // degrade
    auto* degrade = app.add_subcommand(
        "degrade", "corrupt images at native resolution for matcher-impact studies");
    sk::DegradeOptions dopt;
    std::optional<std::string> degrade_config;
    degrade->add_option("--input", dopt.input_dir, "directory of source images")->required();
    degrade->add_option("--output", dopt.output_dir, "output directory")->required();
    degrade->add_option("--category", dopt.category, "offset severity: small | large")->required();
    degrade->add_option("--seed", dopt.seed, "master seed")->required();
    degrade->add_option("--count", dopt.count, "replicas per input image");
    degrade->add_option("--config", degrade_config, "JSON config file");
    degrade->add_option("--workers", dopt.workers, "worker threads");

    // score
    auto* score = app.add_subcommand("score", "score masks; one JSON line per mask");
    std::string mask_path;
    std::optional<std::string> score_config;
    std::optional<double> opt_b, opt_c, opt_threshold;
    score->add_option("--mask", mask_path, "mask file or directory of masks")->required();
    score->add_option("--b", opt_b, "patch weight");
    score->add_option("--c", opt_c, "line weight");
    score->add_option("--threshold", opt_threshold, "flag cutoff (defaults to b)");
    score->add_option("--config", score_config, "JSON config file");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "compare predicted masks against ground truth");
    std::string pred_dir, gt_dir, report_path;
    std::optional<std::string> eval_config;
    bool micro = false;
    evaluate->add_option("--pred", pred_dir, "directory of predicted masks")->required();
    evaluate->add_option("--gt", gt_dir, "directory of ground-truth masks")->required();
    evaluate->add_option("--report", report_path, "output JSON report path")->required();
    evaluate->add_flag("--micro", micro, "pool pixel tallies instead of averaging per image");
    evaluate->add_option("--config", eval_config, "JSON config file");

    // eer
    auto* eer = app.add_subcommand("eer", "equal-error rate from match-score files");
    std::string genuine_path, impostor_path;
    eer->add_option("--genuine", genuine_path, "CSV of genuine match scores, one per line")
        ->required();
    eer->add_option("--impostor", impostor_path, "CSV of impostor match scores, one per line")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const sk::Manifest manifest = sk::run_synthesize(sopt, load_or_default(synth_config));
            std::cerr << "wrote " << manifest.samples.size() << " samples to "
                      << sopt.output_dir.string() << "\n";
        } else if (degrade->parsed()) {
            const sk::Manifest manifest = sk::run_degrade(dopt, load_or_default(degrade_config));
            std::cerr << "wrote " << manifest.samples.size() << " degraded images to "
                      << dopt.output_dir.string() << "\n";
        } else if (score->parsed()) {
            sk::ToolkitConfig cfg = load_or_default(score_config);
            if (opt_b) {
                // the flag cutoff follows b unless pinned explicitly
                if (!opt_threshold && cfg.score.threshold == cfg.score.b)
                    cfg.score.threshold = *opt_b;
                cfg.score.b = *opt_b;
            }
            if (opt_c) cfg.score.c = *opt_c;
            if (opt_threshold) cfg.score.threshold = *opt_threshold;
            const int failures = sk::run_score(mask_path, cfg.decompose, cfg.score, std::cout);
            if (failures > 0) {
                std::cerr << failures << " mask(s) failed\n";
                return 1;
            }
        } else if (evaluate->parsed()) {
            sk::ToolkitConfig cfg = load_or_default(eval_config);
            const auto result = sk::run_evaluate(
                pred_dir, gt_dir, std::filesystem::path(report_path), cfg.decompose, cfg.score,
                micro ? sk::Aggregation::Micro : sk::Aggregation::Macro);
            for (const auto& name : result.unmatched)
                std::cerr << "warning: excluded " << name << "\n";
            std::cout << sk::json(result.report).dump(2) << "\n";
        } else if (eer->parsed()) {
            const double value = sk::run_eer(genuine_path, impostor_path);
            std::cout << sk::json{{"eer", value}}.dump() << "\n";
        }
    } catch (const sk::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
