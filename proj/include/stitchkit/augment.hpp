#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "stitchkit/image.hpp"
#include "stitchkit/resize.hpp"
#include "stitchkit/rng.hpp"

namespace stitchkit {

/// Knobs for the eight-transform augmentation pipeline. Each transform is
/// included independently with its probability; included transforms run in a
/// uniformly shuffled order. Geometric transforms resample back into the
/// input frame, filling uncovered pixels with 255 (scan background).
struct AugmentConfig {
    double crop_probability = 0.5;
    double flip_probability = 0.5;
    double rotation_probability = 0.5;
    double perspective_probability = 0.5;
    double blur_probability = 0.5;
    double solarize_probability = 0.5;
    double posterize_probability = 0.5;
    double equalize_probability = 0.5;

    double rotation_degrees = 15.0;   // sampled uniformly in +/- this range
    double crop_scale_min = 0.7;      // crop area fraction range
    double crop_scale_max = 1.0;
    double perspective_distortion = 0.3;
    double blur_sigma_min = 0.1;
    double blur_sigma_max = 2.0;
    int solarize_threshold = 128;
    int posterize_bits_min = 4;
    int posterize_bits_max = 8;

    void validate() const {
        const double probs[] = {crop_probability,      flip_probability,
                                rotation_probability,  perspective_probability,
                                blur_probability,      solarize_probability,
                                posterize_probability, equalize_probability};
        for (double p : probs)
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("AugmentConfig: probabilities must be in [0,1]");
        if (!(rotation_degrees >= 0.0) || !std::isfinite(rotation_degrees))
            throw std::invalid_argument("AugmentConfig: rotation range must be finite and >= 0");
        if (!(crop_scale_min > 0.0 && crop_scale_min <= crop_scale_max && crop_scale_max <= 1.0))
            throw std::invalid_argument("AugmentConfig: crop scale range must be within (0,1] and ordered");
        if (!(perspective_distortion >= 0.0 && perspective_distortion < 1.0))
            throw std::invalid_argument("AugmentConfig: perspective distortion must be in [0,1)");
        if (!(blur_sigma_min > 0.0 && blur_sigma_min <= blur_sigma_max))
            throw std::invalid_argument("AugmentConfig: blur sigma range must be positive and ordered");
        if (solarize_threshold < 0 || solarize_threshold > 256)
            throw std::invalid_argument("AugmentConfig: solarize threshold must be in [0,256]");
        if (posterize_bits_min < 1 || posterize_bits_max > 8 ||
            posterize_bits_min > posterize_bits_max)
            throw std::invalid_argument("AugmentConfig: posterize bits must be in [1,8] and ordered");
    }

    bool operator==(const AugmentConfig&) const = default;
};

/// Mirror the image left-right.
inline GrayImage hflip(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y) = img.at(img.width - 1 - x, y);
    return out;
}

namespace detail {

/// Bilinear sample where neighbors outside the frame read as `fill`.
inline double sample_bilinear_fill(const GrayImage& img, double fx, double fy, double fill) {
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double wx = fx - x0;
    const double wy = fy - y0;
    const auto px = [&](int x, int y) -> double {
        if (x < 0 || x >= img.width || y < 0 || y >= img.height) return fill;
        return img.at(x, y);
    };
    return (1.0 - wy) * ((1.0 - wx) * px(x0, y0) + wx * px(x0 + 1, y0)) +
           wy * ((1.0 - wx) * px(x0, y0 + 1) + wx * px(x0 + 1, y0 + 1));
}

/// Solve an n x n linear system in place by Gaussian elimination with
/// partial pivoting. `a` is row-major with the rhs appended as column n.
template <int N>
inline std::array<double, N> solve_linear(std::array<std::array<double, N + 1>, N> a) {
    for (int col = 0; col < N; ++col) {
        int pivot = col;
        for (int r = col + 1; r < N; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        if (std::abs(a[col][col]) < 1e-12)
            throw std::invalid_argument("degenerate corner configuration");
        for (int r = col + 1; r < N; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c <= N; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::array<double, N> x{};
    for (int r = N - 1; r >= 0; --r) {
        double s = a[r][N];
        for (int c = r + 1; c < N; ++c) s -= a[r][c] * x[c];
        x[r] = s / a[r][r];
    }
    return x;
}

} // namespace detail

/// Rotate about the image center with bilinear resampling; pixels that fall
/// outside the source read as background (255).
inline GrayImage rotate(const GrayImage& img, double angle_degrees) {
    if (!std::isfinite(angle_degrees))
        throw std::invalid_argument("rotate: angle must be finite");
    const double rad = angle_degrees * std::numbers::pi / 180.0;
    const double c = std::cos(rad);
    const double s = std::sin(rad);
    const double cx = (img.width - 1) / 2.0;
    const double cy = (img.height - 1) / 2.0;
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double fx = c * dx + s * dy + cx;
            const double fy = -s * dx + c * dy + cy;
            out.at(x, y) = detail::round_to_u8(detail::sample_bilinear_fill(img, fx, fy, 255.0));
        }
    }
    return out;
}

/// Take a uniformly placed crop of area fraction ~`scale` (aspect preserved)
/// and resize it back to the input dimensions.
inline GrayImage random_resized_crop(const GrayImage& img, double scale, Rng& rng) {
    if (!(scale > 0.0 && scale <= 1.0))
        throw std::invalid_argument("random_resized_crop: scale must be in (0,1]");
    const double side = std::sqrt(scale);
    const int cw = std::clamp(static_cast<int>(std::lround(img.width * side)), 1, img.width);
    const int ch = std::clamp(static_cast<int>(std::lround(img.height * side)), 1, img.height);
    const int x0 = static_cast<int>(rng.uniform_int(0, img.width - cw));
    const int y0 = static_cast<int>(rng.uniform_int(0, img.height - ch));
    GrayImage crop(cw, ch);
    for (int y = 0; y < ch; ++y)
        for (int x = 0; x < cw; ++x)
            crop.at(x, y) = img.at(x0 + x, y0 + y);
    return resize_bilinear(crop, img.width, img.height);
}

/// Projective warp with the four source corners jittered inward by up to
/// distortion * dim / 2, torchvision style. Fill is 255.
inline GrayImage random_perspective(const GrayImage& img, double distortion, Rng& rng) {
    if (!(distortion >= 0.0 && distortion < 1.0))
        throw std::invalid_argument("random_perspective: distortion must be in [0,1)");
    const double jx = distortion * img.width / 2.0;
    const double jy = distortion * img.height / 2.0;
    double j[8];
    for (double& v : j) v = rng.uniform_real(0.0, 1.0);
    const double W = img.width - 1.0;
    const double H = img.height - 1.0;
    // src corners, TL TR BR BL
    const double sxc[4] = {j[0] * jx, W - j[2] * jx, W - j[4] * jx, j[6] * jx};
    const double syc[4] = {j[1] * jy, j[3] * jy, H - j[5] * jy, H - j[7] * jy};
    const double dxc[4] = {0.0, W, W, 0.0};
    const double dyc[4] = {0.0, 0.0, H, H};
    bool moved = false;
    for (int k = 0; k < 4; ++k)
        if (sxc[k] != dxc[k] || syc[k] != dyc[k]) moved = true;
    if (!moved || img.width < 2 || img.height < 2) return img;

    // homography mapping the output frame onto the jittered source quad
    std::array<std::array<double, 9>, 8> a{};
    for (int k = 0; k < 4; ++k) {
        const double X = dxc[k], Y = dyc[k], u = sxc[k], v = syc[k];
        a[2 * k] = {X, Y, 1, 0, 0, 0, -u * X, -u * Y, u};
        a[2 * k + 1] = {0, 0, 0, X, Y, 1, -v * X, -v * Y, v};
    }
    const auto hm = detail::solve_linear<8>(a);
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double den = hm[6] * x + hm[7] * y + 1.0;
            const double fx = (hm[0] * x + hm[1] * y + hm[2]) / den;
            const double fy = (hm[3] * x + hm[4] * y + hm[5]) / den;
            out.at(x, y) = detail::round_to_u8(detail::sample_bilinear_fill(img, fx, fy, 255.0));
        }
    }
    return out;
}

/// Separable Gaussian blur, kernel radius ceil(3*sigma), borders replicated.
inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur: sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    const auto cx = [&](int x) { return std::clamp(x, 0, img.width - 1); };
    const auto cy = [&](int y) { return std::clamp(y, 0, img.height - 1); };
    std::vector<double> tmp(img.size());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * img.at(cx(x + i), y);
            tmp[static_cast<std::size_t>(y) * img.width + x] = acc;
        }
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp[static_cast<std::size_t>(cy(y + i)) * img.width + x];
            out.at(x, y) = detail::round_to_u8(acc);
        }
    return out;
}

/// Invert every pixel at or above the threshold.
inline GrayImage solarize(const GrayImage& img, int threshold) {
    if (threshold < 0 || threshold > 256)
        throw std::invalid_argument("solarize: threshold must be in [0,256]");
    GrayImage out = img;
    for (auto& p : out.pixels)
        if (p >= threshold) p = static_cast<std::uint8_t>(255 - p);
    return out;
}

/// Keep only the top `bits` bits of each pixel.
inline GrayImage posterize(const GrayImage& img, int bits) {
    if (bits < 1 || bits > 8) throw std::invalid_argument("posterize: bits must be in [1,8]");
    const std::uint8_t mask = static_cast<std::uint8_t>(0xFF << (8 - bits));
    GrayImage out = img;
    for (auto& p : out.pixels) p = static_cast<std::uint8_t>(p & mask);
    return out;
}

/// Cumulative-histogram equalization over 256 bins. The lowest occupied bin
/// maps to 0 and the full range stretches to 255; a constant image is left
/// unchanged.
inline GrayImage equalize_histogram(const GrayImage& img) {
    std::array<std::uint64_t, 256> hist{};
    for (std::uint8_t p : img.pixels) ++hist[p];
    const std::uint64_t total = img.size();
    int first = 0;
    while (first < 256 && hist[first] == 0) ++first;
    const std::uint64_t cdf_min = hist[first];
    if (cdf_min == total) return img;
    const double scale = 255.0 / static_cast<double>(total - cdf_min);
    std::array<std::uint8_t, 256> lut{};
    std::uint64_t cdf = 0;
    for (int i = 0; i < 256; ++i) {
        cdf += hist[i];
        const double mapped = (static_cast<double>(cdf) - static_cast<double>(cdf_min)) * scale;
        lut[i] = detail::round_to_u8(std::max(mapped, 0.0));
    }
    GrayImage out = img;
    for (auto& p : out.pixels) p = lut[p];
    return out;
}

/// Run the pipeline: draw inclusion for each transform in a fixed canonical
/// order (crop, flip, rotate, perspective, blur, solarize, posterize,
/// equalize), shuffle the included subset, then apply with per-application
/// sampled parameters. Equal (image, config, seed) gives equal output.
inline GrayImage apply_augmentations(const GrayImage& img, const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    enum { kCrop, kFlip, kRotate, kPerspective, kBlur, kSolarize, kPosterize, kEqualize };
    const double probs[8] = {cfg.crop_probability,      cfg.flip_probability,
                             cfg.rotation_probability,  cfg.perspective_probability,
                             cfg.blur_probability,      cfg.solarize_probability,
                             cfg.posterize_probability, cfg.equalize_probability};
    std::vector<int> chosen;
    for (int i = 0; i < 8; ++i)
        if (rng.bernoulli(probs[i])) chosen.push_back(i);
    rng.shuffle(chosen);

    GrayImage out = img;
    for (int t : chosen) {
        switch (t) {
            case kCrop:
                out = random_resized_crop(
                    out, rng.uniform_real(cfg.crop_scale_min, cfg.crop_scale_max), rng);
                break;
            case kFlip:
                out = hflip(out);
                break;
            case kRotate:
                out = rotate(out, rng.uniform_real(-cfg.rotation_degrees, cfg.rotation_degrees));
                break;
            case kPerspective:
                out = random_perspective(out, cfg.perspective_distortion, rng);
                break;
            case kBlur:
                out = gaussian_blur(out, rng.uniform_real(cfg.blur_sigma_min, cfg.blur_sigma_max));
                break;
            case kSolarize:
                out = solarize(out, cfg.solarize_threshold);
                break;
            case kPosterize:
                out = posterize(out, static_cast<int>(rng.uniform_int(cfg.posterize_bits_min,
                                                                      cfg.posterize_bits_max)));
                break;
            case kEqualize:
                out = equalize_histogram(out);
                break;
        }
    }
    return out;
}

} // namespace stitchkit
