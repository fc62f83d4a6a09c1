#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stitchkit {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// 8-bit single-channel raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;

    GrayImage(int w, int h, std::uint8_t fill = 0) : width(w), height(h) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("GrayImage: dimensions must be positive");
        pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }

    GrayImage(int w, int h, std::vector<std::uint8_t> buf)
        : width(w), height(h), pixels(std::move(buf)) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("GrayImage: dimensions must be positive");
        if (pixels.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h))
            throw std::invalid_argument("GrayImage: buffer length must equal width*height");
    }

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    std::size_t size() const { return pixels.size(); }

    bool operator==(const GrayImage&) const = default;
};

/// Boolean raster aligned to an image; true marks artifact pixels.
/// Stored one byte per pixel (values strictly 0 or 1).
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    BinaryMask() = default;

    BinaryMask(int w, int h, bool fill = false) : width(w), height(h) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("BinaryMask: dimensions must be positive");
        bits.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0);
    }

    bool get(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set(int x, int y, bool v) {
        bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
    }
    std::size_t size() const { return bits.size(); }

    /// Number of set pixels.
    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint8_t b : bits) n += b;
        return n;
    }

    bool operator==(const BinaryMask&) const = default;
};

/// Axis-aligned pixel rectangle anchored at its top-left corner.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }

    bool within(int image_w, int image_h) const {
        return x >= 0 && y >= 0 && w >= 1 && h >= 1 && x + w <= image_w && y + h <= image_h;
    }

    bool intersects(const Rect& o) const {
        return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
    }

    Rect expanded(int margin) const {
        return {x - margin, y - margin, w + 2 * margin, h + 2 * margin};
    }

    bool operator==(const Rect&) const = default;
};

} // namespace stitchkit
