#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace ylt {

struct AnchorEstimate {
    // in grid-cell units, sorted by area ascending
    std::vector<std::pair<float, float>> anchors;
    // fewer than k distinct box shapes: the distinct set was cycled to length k
    bool duplicated = false;
    // mean (1 - IoU) of each box to its nearest anchor, in normalized units
    double mean_distortion = 0.0;
};

// K-means over box shapes (w, h normalized) under distance 1 - IoU of
// co-centered boxes. Deterministic: the first centroid is the largest box,
// the rest follow farthest-point initialization; converges when assignments
// stop changing or after 100 rounds. The seed is part of the interface for
// reproducibility plumbing; the procedure itself draws nothing from it.
AnchorEstimate estimate_anchors(const std::vector<std::pair<float, float>>& boxes, int k,
                                int grid_size, std::uint64_t seed);

} // namespace ylt
