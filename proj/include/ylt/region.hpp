#pragma once

#include <vector>

#include "ylt/boxes.hpp"
#include "ylt/config.hpp"
#include "ylt/tensor.hpp"

namespace ylt {

// The detection head reads the final conv output as A blocks of (5 + C)
// channels per anchor: tx, ty, tw, th, to, then C class logits. A cell (i, j)
// with anchor (pw, ph) decodes to
//   cx = (sigmoid(tx) + i) / W   cy = (sigmoid(ty) + j) / H
//   w  = pw * exp(tw) / W        h  = ph * exp(th) / H
// with anchors measured in grid cells.
struct DecodedBox {
    double cx, cy, w, h;
};

DecodedBox decode_box(float tx, float ty, float tw, float th, int cell_x, int cell_y,
                      double anchor_w, double anchor_h, int grid_w, int grid_h);

// One detection per (cell, anchor): probability = sigmoid(to) * max softmax
// class score, class = argmax. Keeps those with probability >= threshold.
std::vector<Detection> decode_detections(const Tensor& output, const RegionHeadSpec& head,
                                         float probability_threshold);

struct TruthAssignment {
    int truth_index = 0;
    int cell_x = 0, cell_y = 0;
    int anchor = 0;
};

// Maps each truth box to the grid cell holding its center and the anchor with
// the highest shape IoU (lowest index on ties). When two truths claim the same
// slot the lower-index truth keeps it.
std::vector<TruthAssignment> assign_truths(const std::vector<BoxAnnotation>& truths,
                                           const RegionHeadSpec& head, int grid_w, int grid_h);

// Frozen per-slot targets; the loss below is an ordinary weighted squared
// error against them. Slot order is ((n * A + a) * H + j) * W + i.
struct RegionTargets {
    int batch = 0, anchors = 0, grid_h = 0, grid_w = 0, classes = 0;
    std::vector<float> coord_weight;      // 0 for unassigned slots
    std::vector<float> tx, ty, tw, th;    // targets for sigmoid(tx), sigmoid(ty), tw, th
    std::vector<float> obj_weight;        // 0 marks ignored slots
    std::vector<float> obj_target;        // IoU with the matched truth, else 0
    std::vector<float> class_weight;
    std::vector<int> class_target;        // -1 for unassigned slots
};

inline constexpr float kCoordLossScale = 1.0f;
inline constexpr float kObjectLossScale = 5.0f;
inline constexpr float kNoObjectLossScale = 1.0f;
inline constexpr float kClassLossScale = 1.0f;

// Assigned slots regress coords and objectness toward the current decoded IoU;
// background slots push sigmoid(to) to 0 unless their decoded box overlaps any
// truth above head.objectness_ignore_iou, which exempts them.
RegionTargets build_region_loss_targets(const Tensor& output,
                                        const std::vector<std::vector<BoxAnnotation>>& truths,
                                        const RegionHeadSpec& head);

// Weighted squared error against frozen targets, summed per image and averaged
// over the batch. Accumulates the gradient into *d_output when given.
double region_loss(const Tensor& output, const RegionTargets& targets,
                   Tensor* d_output = nullptr);

// build_region_loss_targets + region_loss in one step.
double region_forward_backward(const Tensor& output,
                               const std::vector<std::vector<BoxAnnotation>>& truths,
                               const RegionHeadSpec& head, Tensor* d_output);

} // namespace ylt
