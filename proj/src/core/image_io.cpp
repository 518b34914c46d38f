#include "ddslab/core/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ddslab {

namespace {

std::uint8_t to_u8(float x) {
    float u = std::round((x + 1.f) * 127.5f);
    if (u < 0.f) u = 0.f;
    if (u > 255.f) u = 255.f;
    return std::uint8_t(u);
}

float from_u8(std::uint8_t u) { return float(u) / 127.5f - 1.f; }

struct FileCloser {
    FILE* f;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

void write_rgb_rows(const std::string& path, int h, int w,
                    const std::vector<std::uint8_t>& rgb) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    FileCloser closer{f};

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng error while writing " + path);
    }
    png_init_io(png, f);
    png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = const_cast<png_bytep>(rgb.data() + std::size_t(y) * w * 3);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png(const std::string& path, const Tensor& img) {
    if (img.c != 3) throw std::runtime_error("write_png expects a 3-channel image");
    std::vector<std::uint8_t> rgb(std::size_t(img.h) * img.w * 3);
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int ch = 0; ch < 3; ++ch)
                rgb[(std::size_t(y) * img.w + x) * 3 + ch] = to_u8(img.at(ch, y, x));
    write_rgb_rows(path, img.h, img.w, rgb);
}

void write_png_gray(const std::string& path, const Tensor& map) {
    if (map.c != 1) throw std::runtime_error("write_png_gray expects a 1-channel map");
    std::vector<std::uint8_t> rgb(std::size_t(map.h) * map.w * 3);
    for (int y = 0; y < map.h; ++y)
        for (int x = 0; x < map.w; ++x) {
            float g = map.at(0, y, x);
            if (g < 0.f) g = 0.f;
            if (g > 1.f) g = 1.f;
            auto u = std::uint8_t(std::round(g * 255.f));
            for (int ch = 0; ch < 3; ++ch) rgb[(std::size_t(y) * map.w + x) * 3 + ch] = u;
        }
    write_rgb_rows(path, map.h, map.w, rgb);
}

void write_png_grid(const std::string& path, const std::vector<Tensor>& imgs, int per_row) {
    if (imgs.empty()) throw std::runtime_error("write_png_grid: no images");
    const int ih = imgs[0].h, iw = imgs[0].w;
    for (const auto& im : imgs)
        if (im.c != 3 || im.h != ih || im.w != iw)
            throw std::runtime_error("write_png_grid: images must share shape");
    const int n = int(imgs.size());
    const int cols = per_row > 0 ? std::min(per_row, n) : n;
    const int rows = (n + cols - 1) / cols;
    const int gw = cols * iw + (cols - 1);
    const int gh = rows * ih + (rows - 1);
    std::vector<std::uint8_t> rgb(std::size_t(gh) * gw * 3, 32);
    for (int i = 0; i < n; ++i) {
        const int r = i / cols, c = i % cols;
        const int oy = r * (ih + 1), ox = c * (iw + 1);
        for (int y = 0; y < ih; ++y)
            for (int x = 0; x < iw; ++x)
                for (int ch = 0; ch < 3; ++ch)
                    rgb[(std::size_t(oy + y) * gw + (ox + x)) * 3 + ch] =
                        to_u8(imgs[i].at(ch, y, x));
    }
    write_rgb_rows(path, gh, gw, rgb);
}

Tensor read_png(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    FileCloser closer{f};

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw std::runtime_error("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw std::runtime_error("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng error while reading " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);

    const int w = int(png_get_image_width(png, info));
    const int h = int(png_get_image_height(png, info));
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    std::vector<std::uint8_t> rgb(std::size_t(h) * w * 3);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = rgb.data() + std::size_t(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Tensor img(3, h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < 3; ++ch)
                img.at(ch, y, x) = from_u8(rgb[(std::size_t(y) * w + x) * 3 + ch]);
    return img;
}

}  // namespace ddslab
