#pragma once

#include <cstdint>
#include <vector>

#include "ylt/config.hpp"
#include "ylt/network.hpp"
#include "ylt/weights.hpp"

namespace ylt {

// Which convolutional layers (by ordinal among conv layers) are freshly
// initialized instead of copied. The final conv layer is always reinitialized:
// its filter count is tied to (classes + 5) * anchors.
struct SurgeryPlan {
    int source_classes = 0;
    int target_classes = 0;
    int num_anchors = 0;
    std::vector<int> reinit_layers;
};

SurgeryPlan make_surgery_plan(const NetworkConfig& target_config, int source_classes);

// Returns target_config with the class count, anchors, and final conv filter
// count replaced. Anchor values are kept from the source when the count
// matches; otherwise they must be supplied.
NetworkConfig retarget_config(const NetworkConfig& source_config, int target_classes,
                              const std::vector<std::pair<float, float>>& anchors);

// Builds a network for target_config from `seed`, then overwrites every conv
// layer outside plan.reinit_layers with the source values (bit-exact). Layers
// in the plan keep their seeded initialization.
Network apply_surgery(const WeightsFile& source, const NetworkConfig& target_config,
                      const SurgeryPlan& plan, std::uint64_t seed);

} // namespace ylt
