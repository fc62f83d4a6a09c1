#pragma once

#include <cmath>
#include <cstdlib>
#include <utility>
#include <vector>

#include "stitchkit/augment.hpp"
#include "stitchkit/image.hpp"
#include "stitchkit/resize.hpp"
#include "stitchkit/rng.hpp"

namespace stitchkit {

/// A rectangular region whose content is replaced by the content at a pixel
/// offset, leaving a boundary discontinuity. `rect` is the destination; the
/// source is `rect` shifted by (dx, dy).
struct PatchSpec {
    Rect rect;
    int dx = 0;
    int dy = 0;

    bool operator==(const PatchSpec&) const = default;
};

enum class LineAxis { Horizontal, Vertical };

/// A seam along a full image row or column. Everything on the far side of
/// the seam is displaced by `shift` pixels perpendicular to it; the band of
/// thickness |shift| adjacent to the seam is the artifact region.
struct LineSpec {
    LineAxis axis = LineAxis::Horizontal;
    int coord = 0;
    int shift = 0;

    bool operator==(const LineSpec&) const = default;
};

enum class PlanKind { Patches, Lines };

/// The sampled injection recipe. Doubles as ground truth: the artifact mask
/// is fully determined by the plan.
struct ArtifactPlan {
    PlanKind kind = PlanKind::Patches;
    std::vector<PatchSpec> patches;
    std::vector<LineSpec> lines;
    int shortfall = 0;  // elements dropped after exhausting placement attempts

    std::size_t element_count() const {
        return kind == PlanKind::Patches ? patches.size() : lines.size();
    }

    bool operator==(const ArtifactPlan&) const = default;
};

/// Sampling ranges for artifact synthesis, as fractions of the image
/// dimensions. Warm-up doubles both fraction ranges.
struct SynthesisParams {
    double patch_fraction_min = 0.05;
    double patch_fraction_max = 0.15;
    double offset_fraction_min = 0.02;
    double offset_fraction_max = 0.07;
    int max_repetitions = 4;
    double line_probability = 0.25;
    bool warmup = false;
    int max_attempts = 100;

    void validate() const {
        if (!(patch_fraction_min > 0.0 && patch_fraction_min <= patch_fraction_max &&
              patch_fraction_max < 1.0))
            throw std::invalid_argument("SynthesisParams: patch fraction range must be ordered and within (0,1)");
        if (!(offset_fraction_min > 0.0 && offset_fraction_min <= offset_fraction_max &&
              offset_fraction_max < 1.0))
            throw std::invalid_argument("SynthesisParams: offset fraction range must be ordered and within (0,1)");
        if (max_repetitions < 1)
            throw std::invalid_argument("SynthesisParams: max repetitions must be >= 1");
        if (!(line_probability >= 0.0 && line_probability <= 1.0))
            throw std::invalid_argument("SynthesisParams: line probability must be in [0,1]");
        if (max_attempts < 1)
            throw std::invalid_argument("SynthesisParams: max attempts must be >= 1");
    }

    bool operator==(const SynthesisParams&) const = default;
};

namespace detail {

/// Fraction-of-dimension to pixels: rounded toward zero, floor of 1 px.
inline int fraction_to_pixels(double fraction, int dim) {
    const int v = static_cast<int>(fraction * dim);
    return v < 1 ? 1 : v;
}

/// Offset component: rounded toward zero, may be 0.
inline int fraction_to_offset(double fraction, int dim) {
    return static_cast<int>(fraction * dim);
}

inline void validate_patch_spec(const PatchSpec& spec, int width, int height) {
    if (!spec.rect.within(width, height))
        throw std::invalid_argument("inject_patch: rect out of bounds");
    const Rect src{spec.rect.x + spec.dx, spec.rect.y + spec.dy, spec.rect.w, spec.rect.h};
    if (!src.within(width, height))
        throw std::invalid_argument("inject_patch: source region out of bounds");
    if (spec.dx == 0 && spec.dy == 0)
        throw std::invalid_argument("inject_patch: offset must be nonzero");
}

inline void validate_line_spec(const LineSpec& spec, int width, int height) {
    const int dim = spec.axis == LineAxis::Horizontal ? height : width;
    const int mag = std::abs(spec.shift);
    if (mag < 1) throw std::invalid_argument("inject_line: shift must be nonzero");
    if (spec.coord < 0 || spec.coord + mag > dim)
        throw std::invalid_argument("inject_line: band out of bounds");
    if (spec.shift > 0 && spec.coord < mag)
        throw std::invalid_argument("inject_line: band out of bounds (duplicated side missing)");
}

inline void mark_rect(BinaryMask& mask, const Rect& r) {
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x)
            mask.set(x, y, true);
}

inline Rect line_band(const LineSpec& spec, int width, int height) {
    const int mag = std::abs(spec.shift);
    if (spec.axis == LineAxis::Horizontal) return {0, spec.coord, width, mag};
    return {spec.coord, 0, mag, height};
}

} // namespace detail

/// Displace the patch content: out[p] = in[p + (dx, dy)] inside the rect,
/// untouched elsewhere. The mask marks exactly the rect.
inline std::pair<GrayImage, BinaryMask> inject_patch(const GrayImage& img, const PatchSpec& spec) {
    detail::validate_patch_spec(spec, img.width, img.height);
    GrayImage out = img;
    BinaryMask mask(img.width, img.height);
    const Rect& r = spec.rect;
    for (int y = r.y; y < r.y + r.h; ++y)
        for (int x = r.x; x < r.x + r.w; ++x)
            out.at(x, y) = img.at(x + spec.dx, y + spec.dy);
    detail::mark_rect(mask, r);
    return {std::move(out), std::move(mask)};
}

/// Shift everything past the seam by `shift` pixels. Positive shifts move
/// content away from the seam, duplicating the |shift| rows/columns just
/// before it; negative shifts pull content toward the seam, replicating the
/// far edge into the vacated rows/columns. The mask marks the full-span band
/// of thickness |shift| starting at the seam.
inline std::pair<GrayImage, BinaryMask> inject_line(const GrayImage& img, const LineSpec& spec) {
    detail::validate_line_spec(spec, img.width, img.height);
    GrayImage out = img;
    BinaryMask mask(img.width, img.height);
    const int mag = std::abs(spec.shift);
    if (spec.axis == LineAxis::Horizontal) {
        if (spec.shift > 0) {
            for (int y = spec.coord; y < img.height; ++y)
                for (int x = 0; x < img.width; ++x)
                    out.at(x, y) = img.at(x, y - mag);
        } else {
            for (int y = spec.coord; y < img.height; ++y) {
                const int sy = std::min(y + mag, img.height - 1);
                for (int x = 0; x < img.width; ++x)
                    out.at(x, y) = img.at(x, sy);
            }
        }
    } else {
        if (spec.shift > 0) {
            for (int y = 0; y < img.height; ++y)
                for (int x = spec.coord; x < img.width; ++x)
                    out.at(x, y) = img.at(x - mag, y);
        } else {
            for (int y = 0; y < img.height; ++y)
                for (int x = spec.coord; x < img.width; ++x)
                    out.at(x, y) = img.at(std::min(x + mag, img.width - 1), y);
        }
    }
    detail::mark_rect(mask, detail::line_band(spec, img.width, img.height));
    return {std::move(out), std::move(mask)};
}

/// Sample an injection recipe. Line mode is chosen with the configured
/// probability, else patch mode; the element count is uniform on
/// {1..max_repetitions}. Placement keeps elements separated by at least one
/// pixel so each stays its own connected component; an element that cannot
/// be placed within the attempt budget is dropped and counted in shortfall.
inline ArtifactPlan sample_artifact_plan(int width, int height, const SynthesisParams& params,
                                         Rng& rng) {
    params.validate();
    if (width < 16 || height < 16)
        throw SynthesisError("image too small for artifact synthesis (minimum 16x16)");

    const double k = params.warmup ? 2.0 : 1.0;
    const double size_lo = params.patch_fraction_min * k;
    const double size_hi = params.patch_fraction_max * k;
    const double off_lo = params.offset_fraction_min * k;
    const double off_hi = params.offset_fraction_max * k;

    ArtifactPlan plan;
    plan.kind = rng.bernoulli(params.line_probability) ? PlanKind::Lines : PlanKind::Patches;
    const int count = static_cast<int>(rng.uniform_int(1, params.max_repetitions));

    if (plan.kind == PlanKind::Patches) {
        for (int e = 0; e < count; ++e) {
            bool placed = false;
            for (int attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
                const int w = detail::fraction_to_pixels(rng.uniform_real(size_lo, size_hi), width);
                const int h = detail::fraction_to_pixels(rng.uniform_real(size_lo, size_hi), height);
                int dx = 0, dy = 0;
                for (int redraw = 0; dx == 0 && dy == 0; ++redraw) {
                    if (redraw >= params.max_attempts)
                        throw SynthesisError("offset range truncates to zero for this image size");
                    const double fx = rng.uniform_real(off_lo, off_hi);
                    const double fy = rng.uniform_real(off_lo, off_hi);
                    dx = detail::fraction_to_offset(fx, width) * (rng.bernoulli(0.5) ? 1 : -1);
                    dy = detail::fraction_to_offset(fy, height) * (rng.bernoulli(0.5) ? 1 : -1);
                }
                const int xlo = std::max(0, -dx);
                const int xhi = std::min(width - w, width - w - dx);
                const int ylo = std::max(0, -dy);
                const int yhi = std::min(height - h, height - h - dy);
                if (xhi < xlo || yhi < ylo) continue;
                const Rect rect{static_cast<int>(rng.uniform_int(xlo, xhi)),
                                static_cast<int>(rng.uniform_int(ylo, yhi)), w, h};
                bool overlaps = false;
                for (const auto& p : plan.patches)
                    if (rect.expanded(1).intersects(p.rect)) overlaps = true;
                if (overlaps) continue;
                plan.patches.push_back({rect, dx, dy});
                placed = true;
            }
            if (!placed) ++plan.shortfall;
        }
    } else {
        const LineAxis axis = rng.bernoulli(0.5) ? LineAxis::Horizontal : LineAxis::Vertical;
        const int dim = axis == LineAxis::Horizontal ? height : width;
        for (int e = 0; e < count; ++e) {
            bool placed = false;
            for (int attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
                const int mag = detail::fraction_to_pixels(rng.uniform_real(off_lo, off_hi), dim);
                const int shift = rng.bernoulli(0.5) ? mag : -mag;
                const int lo = shift > 0 ? mag : 0;
                const int hi = dim - mag;
                if (hi < lo) continue;
                const int coord = static_cast<int>(rng.uniform_int(lo, hi));
                bool overlaps = false;
                for (const auto& l : plan.lines) {
                    const int omag = std::abs(l.shift);
                    if (coord - 1 < l.coord + omag && l.coord < coord + mag + 1) overlaps = true;
                }
                if (overlaps) continue;
                plan.lines.push_back({axis, coord, shift});
                placed = true;
            }
            if (!placed) ++plan.shortfall;
        }
    }
    return plan;
}

/// Apply every injection in plan order; the ground-truth mask is the union
/// of the per-injection masks.
inline std::pair<GrayImage, BinaryMask> apply_plan(const GrayImage& img, const ArtifactPlan& plan) {
    GrayImage cur = img;
    BinaryMask mask(img.width, img.height);
    const auto merge = [&](const BinaryMask& m) {
        for (std::size_t i = 0; i < mask.bits.size(); ++i) mask.bits[i] |= m.bits[i];
    };
    if (plan.kind == PlanKind::Patches) {
        for (const auto& spec : plan.patches) {
            auto [next, m] = inject_patch(cur, spec);
            cur = std::move(next);
            merge(m);
        }
    } else {
        for (const auto& spec : plan.lines) {
            auto [next, m] = inject_line(cur, spec);
            cur = std::move(next);
            merge(m);
        }
    }
    return {std::move(cur), std::move(mask)};
}

/// The ground-truth mask implied by a plan, without touching pixel data.
inline BinaryMask plan_mask(const ArtifactPlan& plan, int width, int height) {
    BinaryMask mask(width, height);
    if (plan.kind == PlanKind::Patches)
        for (const auto& spec : plan.patches) detail::mark_rect(mask, spec.rect);
    else
        for (const auto& spec : plan.lines)
            detail::mark_rect(mask, detail::line_band(spec, width, height));
    return mask;
}

/// Evaluate the mosaicking artifact score directly from a plan: each patch
/// contributes patch_weight plus its area as a percentage of the image; each
/// line contributes its thickness relative to the perpendicular dimension,
/// scaled by line_weight.
inline double analytic_score(const ArtifactPlan& plan, int width, int height,
                             double patch_weight = 5.0, double line_weight = 0.025) {
    const double image_area = static_cast<double>(width) * static_cast<double>(height);
    double score = 0.0;
    for (const auto& p : plan.patches)
        score += patch_weight + 100.0 * (static_cast<double>(p.rect.w) * p.rect.h) / image_area;
    for (const auto& l : plan.lines) {
        const double mag = std::abs(l.shift);
        score += l.axis == LineAxis::Vertical ? 100.0 * line_weight * mag / width
                                              : 100.0 * line_weight * mag / height;
    }
    return score;
}

/// One synthesized training sample plus its provenance.
struct SynthesizedSample {
    GrayImage image;      // corrupted output
    BinaryMask mask;      // pixel-exact ground truth
    ArtifactPlan plan;
    GrayImage augmented;  // pre-injection source, for exactness checks / debug
};

/// Full pipeline for one sample: resize to the target frame, augment, sample
/// a plan, inject.
inline SynthesizedSample synthesize_sample(const GrayImage& img, const SynthesisParams& params,
                                           const AugmentConfig& aug, Rng& rng, int target_w = 224,
                                           int target_h = 224) {
    GrayImage resized = resize_bilinear(img, target_w, target_h);
    GrayImage augmented = apply_augmentations(resized, aug, rng);
    ArtifactPlan plan = sample_artifact_plan(target_w, target_h, params, rng);
    auto [corrupted, mask] = apply_plan(augmented, plan);
    return {std::move(corrupted), std::move(mask), std::move(plan), std::move(augmented)};
}

} // namespace stitchkit
