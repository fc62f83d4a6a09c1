#pragma once

#include <algorithm>
#include <vector>

#include "stitchkit/image.hpp"

namespace stitchkit {

enum class ComponentClass { Patch, VLine, HLine };

/// One connected region of a mask.
struct Component {
    long long area = 0;
    Rect bbox;
    ComponentClass cls = ComponentClass::Patch;

    bool operator==(const Component&) const = default;
};

struct DecomposeConfig {
    int connectivity = 8;               // 4 or 8
    double span_threshold = 0.9;        // fraction of a full image span that makes a line
    double min_area_fraction = 0.0001;  // components smaller than this are speckle

    void validate() const {
        if (connectivity != 4 && connectivity != 8)
            throw std::invalid_argument("DecomposeConfig: connectivity must be 4 or 8");
        if (!(span_threshold > 0.0 && span_threshold <= 1.0))
            throw std::invalid_argument("DecomposeConfig: span threshold must be in (0,1]");
        if (!(min_area_fraction >= 0.0 && min_area_fraction < 1.0))
            throw std::invalid_argument("DecomposeConfig: min area fraction must be in [0,1)");
    }

    bool operator==(const DecomposeConfig&) const = default;
};

struct DecomposedMask {
    int width = 0;
    int height = 0;
    std::vector<Component> components;
};

/// Connected labeling via row runs and union-find; never materializes a
/// label image, so it stays cheap on large mostly-empty masks. Components
/// below the minimum-area fraction are discarded. The result is ordered by
/// bounding-box top-left, row-major.
inline std::vector<Component> connected_components(const BinaryMask& mask,
                                                   const DecomposeConfig& cfg = {}) {
    cfg.validate();
    struct Run {
        int x0, x1, y;  // inclusive column span on row y
        int parent;
    };
    std::vector<Run> runs;
    std::vector<int> prev;  // run indices of the previous row
    std::vector<int> cur;

    const auto find = [&](int i) {
        while (runs[i].parent != i) {
            runs[i].parent = runs[runs[i].parent].parent;
            i = runs[i].parent;
        }
        return i;
    };
    const auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) runs[b].parent = a;
    };

    const int reach = cfg.connectivity == 8 ? 1 : 0;
    for (int y = 0; y < mask.height; ++y) {
        cur.clear();
        const std::uint8_t* row = mask.bits.data() + static_cast<std::size_t>(y) * mask.width;
        int x = 0;
        std::size_t p = 0;  // cursor into prev
        while (x < mask.width) {
            while (x < mask.width && row[x] == 0) ++x;
            if (x >= mask.width) break;
            const int x0 = x;
            while (x < mask.width && row[x] != 0) ++x;
            const int x1 = x - 1;
            const int idx = static_cast<int>(runs.size());
            runs.push_back({x0, x1, y, idx});
            while (p < prev.size() && runs[prev[p]].x1 + reach < x0) ++p;
            for (std::size_t q = p; q < prev.size() && runs[prev[q]].x0 <= x1 + reach; ++q)
                unite(prev[q], idx);
            cur.push_back(idx);
        }
        prev.swap(cur);
    }

    // aggregate per root
    std::vector<int> root_of(runs.size());
    std::vector<int> slot(runs.size(), -1);
    std::vector<Component> comps;
    for (std::size_t i = 0; i < runs.size(); ++i) root_of[i] = find(static_cast<int>(i));
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const int r = root_of[i];
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(comps.size());
            comps.push_back({0, {runs[i].x0, runs[i].y, 0, 0}, ComponentClass::Patch});
        }
        Component& c = comps[slot[r]];
        const Run& run = runs[i];
        c.area += run.x1 - run.x0 + 1;
        const int bx1 = std::max(c.bbox.x + c.bbox.w - 1, run.x1);
        const int by1 = std::max(c.bbox.y + c.bbox.h - 1, run.y);
        c.bbox.x = std::min(c.bbox.x, run.x0);
        c.bbox.y = std::min(c.bbox.y, run.y);
        c.bbox.w = bx1 - c.bbox.x + 1;
        c.bbox.h = by1 - c.bbox.y + 1;
    }

    const double min_area =
        cfg.min_area_fraction * static_cast<double>(mask.width) * static_cast<double>(mask.height);
    std::erase_if(comps, [&](const Component& c) { return static_cast<double>(c.area) < min_area; });
    std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
        if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
        if (a.bbox.x != b.bbox.x) return a.bbox.x < b.bbox.x;
        if (a.bbox.h != b.bbox.h) return a.bbox.h < b.bbox.h;
        if (a.bbox.w != b.bbox.w) return a.bbox.w < b.bbox.w;
        return a.area < b.area;
    });
    return comps;
}

/// A component is a line only when its bounding box spans (nearly) the full
/// image in one direction and is elongated that way; a box that spans both
/// directions is a patch.
inline ComponentClass classify_component(const Component& comp, int width, int height,
                                         const DecomposeConfig& cfg = {}) {
    const bool spans_w = comp.bbox.w >= cfg.span_threshold * width;
    const bool spans_h = comp.bbox.h >= cfg.span_threshold * height;
    if (spans_w && spans_h) return ComponentClass::Patch;
    if (spans_w && comp.bbox.h < comp.bbox.w) return ComponentClass::HLine;
    if (spans_h && comp.bbox.w < comp.bbox.h) return ComponentClass::VLine;
    return ComponentClass::Patch;
}

/// Label, filter, and classify a mask's components.
inline DecomposedMask decompose(const BinaryMask& mask, const DecomposeConfig& cfg = {}) {
    DecomposedMask d{mask.width, mask.height, connected_components(mask, cfg)};
    for (auto& c : d.components) c.cls = classify_component(c, d.width, d.height, cfg);
    return d;
}

} // namespace stitchkit
