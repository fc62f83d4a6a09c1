#pragma once

#include <algorithm>
#include <cmath>

#include "stitchkit/image.hpp"

namespace stitchkit {

namespace detail {

/// Bilinear sample with indices clamped to the image border.
inline double sample_bilinear_clamped(const GrayImage& img, double fx, double fy) {
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double wx = fx - x0;
    const double wy = fy - y0;
    const auto cx = [&](int x) { return std::clamp(x, 0, img.width - 1); };
    const auto cy = [&](int y) { return std::clamp(y, 0, img.height - 1); };
    const double p00 = img.at(cx(x0), cy(y0));
    const double p10 = img.at(cx(x0 + 1), cy(y0));
    const double p01 = img.at(cx(x0), cy(y0 + 1));
    const double p11 = img.at(cx(x0 + 1), cy(y0 + 1));
    return (1.0 - wy) * ((1.0 - wx) * p00 + wx * p10) + wy * ((1.0 - wx) * p01 + wx * p11);
}

inline std::uint8_t round_to_u8(double v) {
    const long r = std::lround(v);
    return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

} // namespace detail

/// Bilinear resize with half-pixel-center alignment: output pixel (x, y)
/// samples the source at ((x + 0.5) * in/out - 0.5). Resizing to the input
/// size is the identity map.
inline GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw std::invalid_argument("resize_bilinear: target dimensions must be >= 1");
    GrayImage out(out_w, out_h);
    const double sx = static_cast<double>(img.width) / out_w;
    const double sy = static_cast<double>(img.height) / out_h;
    for (int y = 0; y < out_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        for (int x = 0; x < out_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            out.at(x, y) = detail::round_to_u8(detail::sample_bilinear_clamped(img, fx, fy));
        }
    }
    return out;
}

} // namespace stitchkit
