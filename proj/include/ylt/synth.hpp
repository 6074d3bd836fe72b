#pragma once

#include <cstdint>
#include <string>

#include "ylt/dataset.hpp"

namespace ylt {

// Scenes plant striped "product" rectangles (one visual signature per class:
// base hue plus stripe orientation/period) on a noisy background, optionally
// with flat untextured distractor rectangles that carry no annotation.
struct SyntheticSceneSpec {
    int width = 128, height = 128;
    int num_classes = 3;
    int class_id = -1; // -1 draws a class per box, else all boxes use this one
    int boxes = 3;
    int distractors = 0;
    float min_size = 0.18f, max_size = 0.42f; // box dims, fraction of canvas
    float max_pair_iou = 0.3f;
    float min_center_distance = 0.25f; // fraction of canvas; 0 disables
    std::uint64_t seed = 0;
};

// Deterministic per seed. Rectangles are placed with at most 100 attempts
// each; ones that never fit are dropped (reflected in *placed_boxes /
// *placed_distractors). Annotations come from the rendered pixel rects, so
// they are exact.
AnnotatedImage generate_synthetic_scene(const SyntheticSceneSpec& spec,
                                        int* placed_boxes = nullptr,
                                        int* placed_distractors = nullptr);

struct SynthDatasetSpec {
    int classes = 3;
    int train_per_class = 15;
    int val_per_class = 30;
    int hard_negative_train = 0; // distractor-only training images
    int unknown_scenes = 0;      // distractor-only images for gap analysis
    int canvas = 128;
    int max_boxes_per_scene = 2;
    int distractors_per_negative = 2;
    std::uint64_t seed = 0;
};

struct SynthDatasetPaths {
    std::string train_manifest, val_manifest, unknown_manifest, names;
    int train_images = 0, val_images = 0, unknown_images = 0;
};

// Emits PNGs + label files + manifests under out_dir. Train, validation, and
// unknown scenes draw from disjoint seed namespaces. The unknown manifest is
// written only when unknown_scenes > 0.
SynthDatasetPaths generate_synthetic_dataset(const SynthDatasetSpec& spec,
                                             const std::string& out_dir);

} // namespace ylt
