#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "stitchkit/image.hpp"

namespace stitchkit {

namespace detail {

// PGM (P5, maxval <= 255) ---------------------------------------------------

inline int pgm_read_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok.empty() ? EOF : 0;
}

inline GrayImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw FormatError("'" + path.string() + "' is not a binary PGM (P5) file");
    std::string tok;
    long w = 0, h = 0, maxval = 0;
    try {
        if (pgm_read_token(in, tok) == EOF) throw IoError("truncated PGM header");
        w = std::stol(tok);
        if (pgm_read_token(in, tok) == EOF) throw IoError("truncated PGM header");
        h = std::stol(tok);
        if (pgm_read_token(in, tok) == EOF) throw IoError("truncated PGM header");
        maxval = std::stol(tok);
    } catch (const std::logic_error&) {
        throw FormatError("malformed PGM header in '" + path.string() + "'");
    }
    if (w < 1 || h < 1) throw FormatError("bad PGM dimensions in '" + path.string() + "'");
    if (maxval < 1 || maxval > 255)
        throw FormatError("unsupported PGM bit depth (maxval " + std::to_string(maxval) +
                          ") in '" + path.string() + "'");
    GrayImage img(static_cast<int>(w), static_cast<int>(h));
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw IoError("truncated PGM pixel data in '" + path.string() + "'");
    return img;
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// PNG (via libpng simplified API) -------------------------------------------

inline GrayImage load_png(const std::filesystem::path& path) {
    png_image im{};
    im.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&im, path.string().c_str())) {
        std::string msg = im.message;
        png_image_free(&im);
        throw IoError("cannot read PNG '" + path.string() + "': " + msg);
    }
    if (im.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&im);
        throw FormatError("unsupported PNG bit depth (16-bit) in '" + path.string() + "'");
    }
    const bool color = (im.format & PNG_FORMAT_FLAG_COLOR) != 0;
    im.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(im));
    const png_color white{255, 255, 255};  // alpha, if any, composites onto white
    if (!png_image_finish_read(&im, &white, buf.data(), 0, nullptr)) {
        std::string msg = im.message;
        png_image_free(&im);
        throw IoError("cannot decode PNG '" + path.string() + "': " + msg);
    }
    GrayImage img(static_cast<int>(im.width), static_cast<int>(im.height));
    if (!color) {
        img.pixels = std::move(buf);
    } else {
        // integer luma, weights 77/151/28 over 256
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            const unsigned r = buf[3 * i], g = buf[3 * i + 1], b = buf[3 * i + 2];
            img.pixels[i] = static_cast<std::uint8_t>((77u * r + 151u * g + 28u * b) >> 8);
        }
    }
    return img;
}

inline void save_png(const GrayImage& img, const std::filesystem::path& path) {
    png_image im{};
    im.version = PNG_IMAGE_VERSION;
    im.width = static_cast<png_uint_32>(img.width);
    im.height = static_cast<png_uint_32>(img.height);
    im.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&im, path.string().c_str(), 0, img.pixels.data(), 0, nullptr)) {
        std::string msg = im.message;
        png_image_free(&im);
        throw IoError("cannot write PNG '" + path.string() + "': " + msg);
    }
}

} // namespace detail

/// Load a grayscale image from a PNG or PGM (P5) file. The format is sniffed
/// from the file's magic bytes, not its extension. Color PNGs are converted
/// with integer luma weights 77/151/28 (sum 256); 16-bit inputs are rejected.
inline GrayImage load_image(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open '" + path.string() + "'");
    unsigned char sig[8] = {0};
    probe.read(reinterpret_cast<char*>(sig), 8);
    const std::streamsize got = probe.gcount();
    probe.close();
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (got >= 8 && std::equal(sig, sig + 8, png_sig)) return detail::load_png(path);
    if (got >= 2 && sig[0] == 'P' && sig[1] == '5') return detail::load_pgm(path);
    if (got >= 2 && sig[0] == 'P' && (sig[1] == '2' || sig[1] == '3' || sig[1] == '6'))
        throw FormatError("unsupported PNM variant in '" + path.string() + "' (only binary P5)");
    throw FormatError("unrecognized image format in '" + path.string() + "'");
}

/// Save as PNG or PGM depending on the extension (.png / .pgm).
inline void save_image(const GrayImage& img, const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".png") return detail::save_png(img, path);
    if (ext == ".pgm") return detail::save_pgm(img, path);
    throw std::invalid_argument("save_image: unsupported extension '" + ext + "'");
}

/// Load a mask: any nonzero pixel maps to true.
inline BinaryMask load_mask(const std::filesystem::path& path) {
    const GrayImage img = load_image(path);
    BinaryMask mask(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) mask.bits[i] = img.pixels[i] ? 1 : 0;
    return mask;
}

/// Save a mask with 0 = background, 255 = artifact.
inline void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    GrayImage img(mask.width, mask.height);
    for (std::size_t i = 0; i < mask.bits.size(); ++i) img.pixels[i] = mask.bits[i] ? 255 : 0;
    save_image(img, path);
}

} // namespace stitchkit
