#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ylt/config.hpp"
#include "ylt/network.hpp"

namespace ylt {

// Binary weights container. On disk: magic "YLTW", version u32 = 1, layer
// count u32, then per convolutional layer filters/channels/kernel as u32
// followed by little-endian f32 arrays — scale, shift, running mean, running
// variance when batch-normalized, else bias — and finally the kernel weights.
// Whether a layer is batch-normalized is not stored; reading requires the
// network config the file belongs to.
struct LayerWeights {
    int filters = 0, channels = 0, kernel = 0;
    bool batch_normalize = false;
    std::vector<float> gamma, beta, running_mean, running_var;
    std::vector<float> bias;
    std::vector<float> kernels;
};

struct WeightsFile {
    std::vector<LayerWeights> layers;
};

inline constexpr std::uint32_t kWeightsVersion = 1;

WeightsFile snapshot_weights(const Network& net);
// Copies values back into a network of matching architecture; resets nothing
// else (gradients and momentum are left to the caller).
void restore_weights(Network& net, const WeightsFile& file);

void write_weights_file(const WeightsFile& file, const std::string& path);
WeightsFile read_weights_file(const std::string& path, const NetworkConfig& config);

void save_weights(const Network& net, const std::string& path);
Network load_weights(const std::string& path, const NetworkConfig& config);

} // namespace ylt
