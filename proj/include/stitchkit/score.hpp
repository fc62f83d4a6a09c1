#pragma once

#include <vector>

#include "stitchkit/decompose.hpp"
#include "stitchkit/image.hpp"

namespace stitchkit {

/// Weights for the mosaicking artifact score. `b` prices each detected patch,
/// `c` scales line terms; a mask is flagged when the score reaches the
/// threshold, which defaults to b so that a single patch is enough to flag.
struct ScoreParams {
    double b = 5.0;
    double c = 0.025;
    double threshold = 5.0;
    bool use_pixel_area = false;  // patch area from raw pixel count instead of bbox

    void validate() const {
        if (!(b > 0.0)) throw std::invalid_argument("ScoreParams: b must be positive");
        if (!(c > 0.0)) throw std::invalid_argument("ScoreParams: c must be positive");
        if (!(threshold > 0.0))
            throw std::invalid_argument("ScoreParams: threshold must be positive");
    }

    bool operator==(const ScoreParams&) const = default;
};

struct Contribution {
    ComponentClass cls = ComponentClass::Patch;
    Rect bbox;
    double value = 0.0;
};

struct ScoreReport {
    double score = 0.0;
    bool flagged = false;
    int n = 0;  // patch components
    int m = 0;  // vertical-line components
    int o = 0;  // horizontal-line components
    std::vector<Contribution> components;
};

/// Mosaicking artifact score over a decomposed mask:
///
///   S = ( sum_patches [ b * sw * sh / 100 + w * h ]
///       + c * ( sum_vlines sh * w  +  sum_hlines sw * h ) ) * 100 / (sw * sh)
///
/// with sw, sh the mask dimensions, w/h the component bounding-box sides.
/// Every patch therefore contributes b plus its box area as a percentage of
/// the image; lines contribute in proportion to their thickness.
inline ScoreReport compute_score(const DecomposedMask& d, const ScoreParams& p = {}) {
    p.validate();
    if (d.width <= 0 || d.height <= 0)
        throw std::invalid_argument("compute_score: mask dimensions must be positive");
    const double sw = d.width;
    const double sh = d.height;
    const double norm = 100.0 / (sw * sh);
    ScoreReport rep;
    rep.components.reserve(d.components.size());
    for (const auto& comp : d.components) {
        double term = 0.0;
        switch (comp.cls) {
            case ComponentClass::Patch: {
                ++rep.n;
                const double patch_area =
                    p.use_pixel_area ? static_cast<double>(comp.area)
                                     : static_cast<double>(comp.bbox.w) * comp.bbox.h;
                term = p.b * sw * sh / 100.0 + patch_area;
                break;
            }
            case ComponentClass::VLine:
                ++rep.m;
                term = p.c * sh * comp.bbox.w;
                break;
            case ComponentClass::HLine:
                ++rep.o;
                term = p.c * sw * comp.bbox.h;
                break;
        }
        const double value = term * norm;
        rep.components.push_back({comp.cls, comp.bbox, value});
        rep.score += value;
    }
    rep.flagged = rep.score >= p.threshold;
    return rep;
}

/// Decompose-then-score convenience for raw masks.
inline ScoreReport score_mask(const BinaryMask& mask, const DecomposeConfig& dcfg = {},
                              const ScoreParams& p = {}) {
    return compute_score(decompose(mask, dcfg), p);
}

} // namespace stitchkit
