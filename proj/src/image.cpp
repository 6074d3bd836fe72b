#include "ylt/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "ylt/errors.hpp"

namespace ylt {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void check_image(const Tensor& image, const char* who) {
    if (image.ndim() != 3 || image.shape[0] != 3)
        throw ConfigError(std::string(who) + " expects a [3,H,W] tensor, got " +
                          shape_str(image.shape));
}

} // namespace

Tensor read_png(const std::string& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw DataError("cannot open image " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("png reader allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw DataError("png reader allocation failed");
    }
    std::vector<png_bytep> rows;
    std::vector<unsigned char> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("failed to decode " + path);
    }
    png_init_io(png, file.get());
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);

    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    pixels.resize(static_cast<std::size_t>(width) * height * 3);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Tensor image({3, static_cast<int>(height), static_cast<int>(width)});
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    for (std::size_t i = 0; i < plane; ++i) {
        image.data[i] = pixels[i * 3] / 255.0f;
        image.data[plane + i] = pixels[i * 3 + 1] / 255.0f;
        image.data[2 * plane + i] = pixels[i * 3 + 2] / 255.0f;
    }
    return image;
}

void write_png(const Tensor& image, const std::string& path) {
    check_image(image, "write_png");
    const int h = image.shape[1], w = image.shape[2];
    const std::size_t plane = static_cast<std::size_t>(h) * w;

    std::vector<unsigned char> pixels(plane * 3);
    for (std::size_t i = 0; i < plane; ++i) {
        for (int c = 0; c < 3; ++c) {
            const float v = std::clamp(image.data[static_cast<std::size_t>(c) * plane + i], 0.0f, 1.0f);
            pixels[i * 3 + static_cast<std::size_t>(c)] =
                static_cast<unsigned char>(std::lround(v * 255.0f));
        }
    }

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw DataError("cannot write image " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw DataError("png writer allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw DataError("png writer allocation failed");
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(h));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("failed to encode " + path);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < h; ++y)
        rows[static_cast<std::size_t>(y)] = pixels.data() + static_cast<std::size_t>(y) * w * 3;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Tensor resize_bilinear(const Tensor& image, int out_w, int out_h) {
    check_image(image, "resize_bilinear");
    if (out_w < 1 || out_h < 1) throw ConfigError("resize target must be positive");
    const int h = image.shape[1], w = image.shape[2];
    if (out_w == w && out_h == h) return image;

    Tensor out({3, out_h, out_w});
    const float sx = static_cast<float>(w) / static_cast<float>(out_w);
    const float sy = static_cast<float>(h) / static_cast<float>(out_h);
    for (int c = 0; c < 3; ++c) {
        const float* src = image.data.data() + static_cast<std::size_t>(c) * h * w;
        float* dst = out.data.data() + static_cast<std::size_t>(c) * out_h * out_w;
        for (int y = 0; y < out_h; ++y) {
            const float fy = std::clamp((y + 0.5f) * sy - 0.5f, 0.0f, static_cast<float>(h - 1));
            const int y0 = static_cast<int>(fy);
            const int y1 = std::min(y0 + 1, h - 1);
            const float wy = fy - static_cast<float>(y0);
            for (int x = 0; x < out_w; ++x) {
                const float fx =
                    std::clamp((x + 0.5f) * sx - 0.5f, 0.0f, static_cast<float>(w - 1));
                const int x0 = static_cast<int>(fx);
                const int x1 = std::min(x0 + 1, w - 1);
                const float wx = fx - static_cast<float>(x0);
                const float top = src[y0 * w + x0] * (1 - wx) + src[y0 * w + x1] * wx;
                const float bottom = src[y1 * w + x0] * (1 - wx) + src[y1 * w + x1] * wx;
                dst[y * out_w + x] = top * (1 - wy) + bottom * wy;
            }
        }
    }
    return out;
}

Tensor crop(const Tensor& image, int x0, int y0, int x1, int y1) {
    check_image(image, "crop");
    const int h = image.shape[1], w = image.shape[2];
    if (x0 < 0 || y0 < 0 || x1 > w || y1 > h || x0 >= x1 || y0 >= y1)
        throw ConfigError("crop rectangle outside image");
    const int cw = x1 - x0, ch = y1 - y0;
    Tensor out({3, ch, cw});
    for (int c = 0; c < 3; ++c) {
        const float* src = image.data.data() + static_cast<std::size_t>(c) * h * w;
        float* dst = out.data.data() + static_cast<std::size_t>(c) * ch * cw;
        for (int y = 0; y < ch; ++y)
            std::copy(src + (y0 + y) * w + x0, src + (y0 + y) * w + x1, dst + y * cw);
    }
    return out;
}

Tensor hflip(const Tensor& image) {
    check_image(image, "hflip");
    const int h = image.shape[1], w = image.shape[2];
    Tensor out(image.shape);
    for (int c = 0; c < 3; ++c) {
        const float* src = image.data.data() + static_cast<std::size_t>(c) * h * w;
        float* dst = out.data.data() + static_cast<std::size_t>(c) * h * w;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) dst[y * w + x] = src[y * w + (w - 1 - x)];
    }
    return out;
}

void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v) {
    const float max = std::max({r, g, b});
    const float min = std::min({r, g, b});
    const float delta = max - min;
    v = max;
    s = max > 0 ? delta / max : 0.0f;
    if (delta <= 0) {
        h = 0.0f;
        return;
    }
    if (max == r)
        h = (g - b) / delta;
    else if (max == g)
        h = 2.0f + (b - r) / delta;
    else
        h = 4.0f + (r - g) / delta;
    h /= 6.0f;
    if (h < 0) h += 1.0f;
}

void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b) {
    if (s <= 0) {
        r = g = b = v;
        return;
    }
    h = h - std::floor(h);
    const float hv = h * 6.0f;
    const int sector = std::min(5, static_cast<int>(hv));
    const float f = hv - static_cast<float>(sector);
    const float p = v * (1 - s);
    const float q = v * (1 - s * f);
    const float t = v * (1 - s * (1 - f));
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
}

Tensor hue_shift(const Tensor& image, float delta) {
    check_image(image, "hue_shift");
    Tensor out(image.shape);
    const std::size_t plane = static_cast<std::size_t>(image.shape[1]) * image.shape[2];
    for (std::size_t i = 0; i < plane; ++i) {
        float h, s, v;
        rgb_to_hsv(image.data[i], image.data[plane + i], image.data[2 * plane + i], h, s, v);
        h += delta;
        h -= std::floor(h);
        hsv_to_rgb(h, s, v, out.data[i], out.data[plane + i], out.data[2 * plane + i]);
    }
    return out;
}

} // namespace ylt
