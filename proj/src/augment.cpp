#include "ylt/augment.hpp"

#include <algorithm>
#include <cmath>

#include "ylt/dataset.hpp"
#include "ylt/errors.hpp"
#include "ylt/image.hpp"

namespace ylt {
namespace {

struct Rect {
    double x0, y0, x1, y1;
    double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
};

Rect box_rect(const BoxAnnotation& b) {
    return {b.cx - b.w / 2.0, b.cy - b.h / 2.0, b.cx + b.w / 2.0, b.cy + b.h / 2.0};
}

Rect intersect(const Rect& a, const Rect& b) {
    return {std::max(a.x0, b.x0), std::max(a.y0, b.y0), std::min(a.x1, b.x1),
            std::min(a.y1, b.y1)};
}

void apply_crop(AnnotatedImage& out, const AnnotatedImage& sample, const AugmentationConfig& cfg,
                Rng& rng) {
    const int w = sample.pixels.shape[2], h = sample.pixels.shape[1];
    const float j = cfg.annotation_jitter;
    for (int attempt = 0; attempt < 20; ++attempt) {
        const float left = rng.uniform_f(-j, j);
        const float right = rng.uniform_f(-j, j);
        const float top = rng.uniform_f(-j, j);
        const float bottom = rng.uniform_f(-j, j);
        const int x0 = static_cast<int>(std::clamp<long>(std::lround(left * w), 0, w - 1));
        const int x1 = static_cast<int>(std::clamp<long>(w + std::lround(right * w), x0 + 1, w));
        const int y0 = static_cast<int>(std::clamp<long>(std::lround(top * h), 0, h - 1));
        const int y1 = static_cast<int>(std::clamp<long>(h + std::lround(bottom * h), y0 + 1, h));

        const Rect crop_rect{static_cast<double>(x0) / w, static_cast<double>(y0) / h,
                             static_cast<double>(x1) / w, static_cast<double>(y1) / h};
        bool ok = true;
        for (const BoxAnnotation& b : sample.boxes) {
            const Rect r = box_rect(b);
            if (intersect(r, crop_rect).area() < cfg.annotation_retention * r.area()) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;

        out.pixels = crop(sample.pixels, x0, y0, x1, y1);
        out.boxes.clear();
        const double cw = crop_rect.x1 - crop_rect.x0, ch = crop_rect.y1 - crop_rect.y0;
        for (const BoxAnnotation& b : sample.boxes) {
            const Rect r = intersect(box_rect(b), crop_rect);
            BoxAnnotation nb = b;
            nb.cx = static_cast<float>(((r.x0 + r.x1) / 2.0 - crop_rect.x0) / cw);
            nb.cy = static_cast<float>(((r.y0 + r.y1) / 2.0 - crop_rect.y0) / ch);
            nb.w = static_cast<float>((r.x1 - r.x0) / cw);
            nb.h = static_cast<float>((r.y1 - r.y0) / ch);
            out.boxes.push_back(nb);
        }
        return;
    }
    out.pixels = sample.pixels;
    out.boxes = sample.boxes;
}

} // namespace

AnnotatedImage augment(const AnnotatedImage& sample, const AugmentationConfig& cfg, Rng& rng) {
    AnnotatedImage out;
    out.is_hard_negative = sample.is_hard_negative;

    if (cfg.annotation_jitter > 0) {
        apply_crop(out, sample, cfg, rng);
    } else {
        out.pixels = sample.pixels;
        out.boxes = sample.boxes;
    }

    bool flip = false;
    if (cfg.hflip_prob >= 1) {
        flip = true;
    } else if (cfg.hflip_prob > 0) {
        flip = rng.bernoulli(cfg.hflip_prob);
    }
    if (flip) {
        out.pixels = hflip(out.pixels);
        for (BoxAnnotation& b : out.boxes) b.cx = 1.0f - b.cx;
    }

    const bool shift_hue = cfg.hue_delta > 0;
    const bool scale_sv = cfg.sat_exposure_factor > 1;
    if (shift_hue || scale_sv) {
        float delta = 0.0f, sat = 1.0f, val = 1.0f;
        if (shift_hue) delta = rng.uniform_f(-cfg.hue_delta, cfg.hue_delta);
        if (scale_sv) {
            sat = rng.uniform_f(1.0f, cfg.sat_exposure_factor);
            if (rng.bernoulli(0.5)) sat = 1.0f / sat;
            val = rng.uniform_f(1.0f, cfg.sat_exposure_factor);
            if (rng.bernoulli(0.5)) val = 1.0f / val;
        }
        const std::size_t plane =
            static_cast<std::size_t>(out.pixels.shape[1]) * out.pixels.shape[2];
        for (std::size_t i = 0; i < plane; ++i) {
            float h, s, v;
            rgb_to_hsv(out.pixels.data[i], out.pixels.data[plane + i],
                       out.pixels.data[2 * plane + i], h, s, v);
            h += delta;
            h -= std::floor(h);
            s = std::clamp(s * sat, 0.0f, 1.0f);
            v = std::clamp(v * val, 0.0f, 1.0f);
            hsv_to_rgb(h, s, v, out.pixels.data[i], out.pixels.data[plane + i],
                       out.pixels.data[2 * plane + i]);
        }
    }
    return out;
}

int choose_input_dim(int base, float jitter, int stride, Rng& rng) {
    if (base < 1 || stride < 1 || base % stride != 0)
        throw ConfigError("input dim base must be a positive multiple of the stride");
    const double lo = base * (1.0 - jitter);
    const double hi = base * (1.0 + jitter);
    const int first = static_cast<int>(std::ceil(lo / stride));
    const int last = static_cast<int>(std::floor(hi / stride));
    if (first > last) return base;
    return (first + rng.uniform_int(last - first + 1)) * stride;
}

} // namespace ylt
