#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ylt/augment.hpp"
#include "ylt/boxes.hpp"
#include "ylt/tensor.hpp"

namespace ylt {

struct AnnotatedImage {
    Tensor pixels; // [3, H, W] RGB in [0, 1]
    std::vector<BoxAnnotation> boxes;
    bool is_hard_negative = false; // empty boxes by design
};

// `<class_id> <cx> <cy> <w> <h>`, space-separated decimals; coordinates are
// fractions of the image dims. No clamping: out-of-range values are errors.
BoxAnnotation parse_annotation_line(const std::string& line);

// One annotation per line; parse errors carry the path and line number.
std::vector<BoxAnnotation> load_label_file(const std::string& path);

// image.png -> image.txt
std::string label_path_for(const std::string& image_path);

struct DatasetManifest {
    std::vector<std::string> image_paths; // resolved against the manifest dir
    std::vector<std::string> class_names; // line index = class id
};

// Manifest: newline-separated image paths. Names file: one class name per
// line. Blank lines and '#' comments are skipped.
DatasetManifest load_manifest(const std::string& manifest_path, const std::string& names_path);

// Reads the image plus its label file; a missing label file means a
// deliberately empty annotation list (hard negative).
AnnotatedImage load_sample(const std::string& image_path);

struct Dataset {
    std::vector<AnnotatedImage> samples;
    std::vector<std::string> class_names;
    int positives = 0;
};

Dataset load_dataset(const DatasetManifest& manifest);

// Uniform sampling with replacement, each sample augmented, hard negatives
// capped at floor(cap * batch_size) per batch: negatives may only occupy the
// slots where floor((s+1) * cap) steps up. Sample slot s draws from an
// independent stream seeded with seed ^ (first_sample_index + s), so slots
// are reproducible independently of each other and of the batch window.
std::vector<AnnotatedImage> compose_batch(const Dataset& dataset, const AugmentationConfig& cfg,
                                          int batch_size, float hard_negative_cap,
                                          std::uint64_t seed, std::int64_t first_sample_index);

struct Batch {
    Tensor images; // [N, 3, dim, dim]
    std::vector<std::vector<BoxAnnotation>> truths;
};

Batch stack_batch(const std::vector<AnnotatedImage>& samples, int input_dim);

} // namespace ylt
