#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "stitchkit/augment.hpp"
#include "stitchkit/decompose.hpp"
#include "stitchkit/inject.hpp"
#include "stitchkit/metrics.hpp"
#include "stitchkit/score.hpp"
#include "stitchkit/version.hpp"

namespace stitchkit {

using json = nlohmann::json;

// Configs deserialize leniently: absent fields keep their defaults, so a
// config file may carry any subset of sections and keys.

inline void to_json(json& j, const AugmentConfig& c) {
    j = json{{"crop_probability", c.crop_probability},
             {"flip_probability", c.flip_probability},
             {"rotation_probability", c.rotation_probability},
             {"perspective_probability", c.perspective_probability},
             {"blur_probability", c.blur_probability},
             {"solarize_probability", c.solarize_probability},
             {"posterize_probability", c.posterize_probability},
             {"equalize_probability", c.equalize_probability},
             {"rotation_degrees", c.rotation_degrees},
             {"crop_scale_range", {c.crop_scale_min, c.crop_scale_max}},
             {"perspective_distortion", c.perspective_distortion},
             {"blur_sigma_range", {c.blur_sigma_min, c.blur_sigma_max}},
             {"solarize_threshold", c.solarize_threshold},
             {"posterize_bits_range", {c.posterize_bits_min, c.posterize_bits_max}}};
}

inline void from_json(const json& j, AugmentConfig& c) {
    c = AugmentConfig{};
    c.crop_probability = j.value("crop_probability", c.crop_probability);
    c.flip_probability = j.value("flip_probability", c.flip_probability);
    c.rotation_probability = j.value("rotation_probability", c.rotation_probability);
    c.perspective_probability = j.value("perspective_probability", c.perspective_probability);
    c.blur_probability = j.value("blur_probability", c.blur_probability);
    c.solarize_probability = j.value("solarize_probability", c.solarize_probability);
    c.posterize_probability = j.value("posterize_probability", c.posterize_probability);
    c.equalize_probability = j.value("equalize_probability", c.equalize_probability);
    c.rotation_degrees = j.value("rotation_degrees", c.rotation_degrees);
    if (j.contains("crop_scale_range")) {
        c.crop_scale_min = j["crop_scale_range"].at(0).get<double>();
        c.crop_scale_max = j["crop_scale_range"].at(1).get<double>();
    }
    c.perspective_distortion = j.value("perspective_distortion", c.perspective_distortion);
    if (j.contains("blur_sigma_range")) {
        c.blur_sigma_min = j["blur_sigma_range"].at(0).get<double>();
        c.blur_sigma_max = j["blur_sigma_range"].at(1).get<double>();
    }
    c.solarize_threshold = j.value("solarize_threshold", c.solarize_threshold);
    if (j.contains("posterize_bits_range")) {
        c.posterize_bits_min = j["posterize_bits_range"].at(0).get<int>();
        c.posterize_bits_max = j["posterize_bits_range"].at(1).get<int>();
    }
    c.validate();
}

inline void to_json(json& j, const SynthesisParams& p) {
    j = json{{"patch_fraction_range", {p.patch_fraction_min, p.patch_fraction_max}},
             {"offset_fraction_range", {p.offset_fraction_min, p.offset_fraction_max}},
             {"max_repetitions", p.max_repetitions},
             {"line_probability", p.line_probability},
             {"warmup", p.warmup},
             {"max_attempts", p.max_attempts}};
}

inline void from_json(const json& j, SynthesisParams& p) {
    p = SynthesisParams{};
    if (j.contains("patch_fraction_range")) {
        p.patch_fraction_min = j["patch_fraction_range"].at(0).get<double>();
        p.patch_fraction_max = j["patch_fraction_range"].at(1).get<double>();
    }
    if (j.contains("offset_fraction_range")) {
        p.offset_fraction_min = j["offset_fraction_range"].at(0).get<double>();
        p.offset_fraction_max = j["offset_fraction_range"].at(1).get<double>();
    }
    p.max_repetitions = j.value("max_repetitions", p.max_repetitions);
    p.line_probability = j.value("line_probability", p.line_probability);
    p.warmup = j.value("warmup", p.warmup);
    p.max_attempts = j.value("max_attempts", p.max_attempts);
    p.validate();
}

inline void to_json(json& j, const DecomposeConfig& c) {
    j = json{{"connectivity", c.connectivity},
             {"span_threshold", c.span_threshold},
             {"min_area_fraction", c.min_area_fraction}};
}

inline void from_json(const json& j, DecomposeConfig& c) {
    c = DecomposeConfig{};
    c.connectivity = j.value("connectivity", c.connectivity);
    c.span_threshold = j.value("span_threshold", c.span_threshold);
    c.min_area_fraction = j.value("min_area_fraction", c.min_area_fraction);
    c.validate();
}

inline void to_json(json& j, const ScoreParams& p) {
    j = json{{"b", p.b},
             {"c", p.c},
             {"threshold", p.threshold},
             {"use_pixel_area", p.use_pixel_area}};
}

inline void from_json(const json& j, ScoreParams& p) {
    p = ScoreParams{};
    p.b = j.value("b", p.b);
    p.c = j.value("c", p.c);
    p.threshold = j.value("threshold", p.b);  // flag cutoff tracks b unless pinned
    p.use_pixel_area = j.value("use_pixel_area", p.use_pixel_area);
    p.validate();
}

// Plans serialize bit-exactly: every sampled integer round-trips.

inline void to_json(json& j, const PatchSpec& s) {
    j = json{{"rect", {s.rect.x, s.rect.y, s.rect.w, s.rect.h}}, {"dx", s.dx}, {"dy", s.dy}};
}

inline void from_json(const json& j, PatchSpec& s) {
    const auto& r = j.at("rect");
    s.rect = {r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(), r.at(3).get<int>()};
    s.dx = j.at("dx").get<int>();
    s.dy = j.at("dy").get<int>();
}

inline void to_json(json& j, const LineSpec& s) {
    j = json{{"axis", s.axis == LineAxis::Horizontal ? "horizontal" : "vertical"},
             {"coord", s.coord},
             {"shift", s.shift}};
}

inline void from_json(const json& j, LineSpec& s) {
    const auto axis = j.at("axis").get<std::string>();
    if (axis == "horizontal") s.axis = LineAxis::Horizontal;
    else if (axis == "vertical") s.axis = LineAxis::Vertical;
    else throw std::invalid_argument("LineSpec: axis must be 'horizontal' or 'vertical'");
    s.coord = j.at("coord").get<int>();
    s.shift = j.at("shift").get<int>();
}

inline void to_json(json& j, const ArtifactPlan& p) {
    j = json{{"kind", p.kind == PlanKind::Patches ? "patches" : "lines"},
             {"patches", p.patches},
             {"lines", p.lines},
             {"shortfall", p.shortfall}};
}

inline void from_json(const json& j, ArtifactPlan& p) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "patches") p.kind = PlanKind::Patches;
    else if (kind == "lines") p.kind = PlanKind::Lines;
    else throw std::invalid_argument("ArtifactPlan: kind must be 'patches' or 'lines'");
    p.patches = j.value("patches", std::vector<PatchSpec>{});
    p.lines = j.value("lines", std::vector<LineSpec>{});
    p.shortfall = j.value("shortfall", 0);
}

inline const char* component_class_name(ComponentClass c) {
    switch (c) {
        case ComponentClass::Patch: return "patch";
        case ComponentClass::VLine: return "vline";
        case ComponentClass::HLine: return "hline";
    }
    return "patch";
}

inline void to_json(json& j, const ScoreReport& r) {
    json comps = json::array();
    for (const auto& c : r.components)
        comps.push_back(json{{"class", component_class_name(c.cls)},
                             {"bbox", {c.bbox.x, c.bbox.y, c.bbox.w, c.bbox.h}},
                             {"contribution", c.value}});
    j = json{{"score", r.score}, {"flagged", r.flagged}, {"n", r.n},
             {"m", r.m},         {"o", r.o},             {"components", std::move(comps)}};
}

inline void to_json(json& j, const MetricsReport& r) {
    j = json{{"IoU", r.iou},
             {"F1", r.f1},
             {"F2", r.f2},
             {"Accuracy", r.accuracy},
             {"Recall", r.recall},
             {"Mean Score Dif.", r.mean_score_diff},
             {"samples", r.samples}};
}

/// One synthesized sample's provenance in the manifest.
struct SampleRecord {
    std::string id;
    std::string source;
    int original_width = 0;
    int original_height = 0;
    ArtifactPlan plan;
    double gt_score = 0.0;
    int shortfall = 0;
};

inline void to_json(json& j, const SampleRecord& r) {
    j = json{{"id", r.id},
             {"source", r.source},
             {"original_size", {r.original_width, r.original_height}},
             {"plan", r.plan},
             {"gt_score", r.gt_score},
             {"shortfall", r.shortfall}};
}

inline void from_json(const json& j, SampleRecord& r) {
    r.id = j.at("id").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.original_width = j.at("original_size").at(0).get<int>();
    r.original_height = j.at("original_size").at(1).get<int>();
    r.plan = j.at("plan").get<ArtifactPlan>();
    r.gt_score = j.at("gt_score").get<double>();
    r.shortfall = j.value("shortfall", 0);
}

/// Batch provenance: seed, parameter echo, and per-sample records. Replaying
/// the same seed and parameters regenerates byte-identical outputs.
struct Manifest {
    std::string version = STITCHKIT_VERSION;
    std::uint64_t master_seed = 0;
    int count = 1;
    AugmentConfig augment;
    SynthesisParams synthesis;
    DecomposeConfig decompose;
    ScoreParams score;
    std::vector<SampleRecord> samples;
};

inline void to_json(json& j, const Manifest& m) {
    j = json{{"version", m.version},
             {"master_seed", m.master_seed},
             {"count", m.count},
             {"params",
              json{{"augment", m.augment},
                   {"synthesis", m.synthesis},
                   {"decompose", m.decompose},
                   {"score", m.score}}},
             {"samples", m.samples}};
}

inline void from_json(const json& j, Manifest& m) {
    m.version = j.at("version").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.count = j.value("count", 1);
    const auto& params = j.at("params");
    m.augment = params.value("augment", AugmentConfig{});
    m.synthesis = params.value("synthesis", SynthesisParams{});
    m.decompose = params.value("decompose", DecomposeConfig{});
    m.score = params.value("score", ScoreParams{});
    m.samples = j.value("samples", std::vector<SampleRecord>{});
}

} // namespace stitchkit
