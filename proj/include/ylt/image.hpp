#pragma once

#include <string>

#include "ylt/tensor.hpp"

namespace ylt {

// Images are Tensor[3, H, W], RGB in [0, 1].

Tensor read_png(const std::string& path);
// Rounds to 8-bit RGB; values are clamped to [0, 1] first.
void write_png(const Tensor& image, const std::string& path);

Tensor resize_bilinear(const Tensor& image, int out_w, int out_h);

// Pixel crop; coordinates are inclusive-exclusive [x0, x1) x [y0, y1).
Tensor crop(const Tensor& image, int x0, int y0, int x1, int y1);

Tensor hflip(const Tensor& image);

// h, s, v in [0, 1); gray pixels (s = 0) keep h = 0.
void rgb_to_hsv(float r, float g, float b, float& h, float& s, float& v);
void hsv_to_rgb(float h, float s, float v, float& r, float& g, float& b);

// RGB -> HSV -> (h + delta mod 1) -> RGB per pixel; saturation/value untouched.
Tensor hue_shift(const Tensor& image, float delta);

} // namespace ylt
