#pragma once

#include <cstdint>

#include "ylt/rng.hpp"

namespace ylt {

struct AnnotatedImage;

struct AugmentationConfig {
    float scale_jitter = 0.30f;        // multi-scale input resizing range
    float hflip_prob = 0.5f;
    float hue_delta = 0.10f;           // of the hue range, wrapping
    float sat_exposure_factor = 1.5f;  // applied as s or 1/s
    float annotation_jitter = 0.20f;   // per crop edge, of the corresponding dim
    float annotation_retention = 0.80f;
    std::uint64_t seed = 0;
};

// In order: crop/translate jitter (resampled up to 20 times until every
// annotation keeps >= retention of its area inside the crop, else identity),
// horizontal flip, hue shift, saturation and exposure each scaled by s or 1/s
// with s in [1, factor], values clamped to [0, 1]. Stages whose configured
// range is empty are skipped entirely, so a zeroed config is an exact
// identity.
AnnotatedImage augment(const AnnotatedImage& sample, const AugmentationConfig& cfg, Rng& rng);

// Uniform choice among multiples of stride within [base*(1-jitter),
// base*(1+jitter)]; returns base when the range holds no multiple.
int choose_input_dim(int base, float jitter, int stride, Rng& rng);

} // namespace ylt
