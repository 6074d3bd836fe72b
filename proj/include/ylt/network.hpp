#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ylt/config.hpp"
#include "ylt/ops.hpp"
#include "ylt/rng.hpp"
#include "ylt/tensor.hpp"

namespace ylt {

struct Layer {
    LayerSpec spec;
    int in_channels = 0; // conv only
    int padding = 0;     // pixels

    Parameter kernels;            // [F, C, k, k]
    Parameter bias;               // [F]; zero and untrained when batch_normalize
    Parameter gamma, beta;        // [F], conv with batchnorm
    Tensor running_mean, running_var; // [F]

    // caches written by train-mode forward passes
    Tensor output;
    std::vector<std::int64_t> pool_argmax;
    BatchNormCache bn_cache;
};

// Seeded uniform fill of the kernels in +-sqrt(1 / (C*k*k)); batchnorm scale 1,
// shifts and biases 0, running variance 1.
void initialize_conv_layer(Layer& layer, Rng& rng);

class Network {
public:
    Network(const NetworkConfig& config, std::uint64_t seed);

    const NetworkConfig& config() const { return config_; }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }
    int output_channels() const { return output_channels_; }

    // Nominal input resolution (multi-scale training); must be multiples of the
    // total stride.
    void set_input_dims(int width, int height);

    Tensor forward(const Tensor& input, Mode mode);
    // Consumes the caches written by the last train-mode forward and accumulates
    // into the parameter gradients. Returns the gradient w.r.t. the input.
    Tensor backward(const Tensor& d_output);

    // Per layer: batchnorm scale + shift (or bias), then kernels.
    std::vector<Parameter*> trainable_parameters();
    void zero_gradients();
    void reset_momentum();

private:
    NetworkConfig config_;
    std::vector<Layer> layers_;
    int output_channels_ = 0;
    Tensor input_; // saved by train-mode forward
};

struct FiniteDifferenceResult {
    double max_relative_error = 0.0;
    int checked = 0;
};

// Central-difference check of d(loss)/d(parameter) on a random sample of
// parameter entries. `loss` maps the network output to a scalar, `loss_grad`
// to its gradient; batch statistics stay frozen during the probe passes.
// Probes whose +-epsilon passes cross an activation kink or move a pooling
// argmax are re-drawn (central differences are meaningless across a kink,
// while a wrong analytic gradient still shows up on the smooth probes that
// remain); each kept probe is Richardson-extrapolated from two step sizes and
// the two scales must agree, which rejects kinks hiding inside `loss` itself.
// Error is |numeric - exact| / max(|numeric| + |exact|, 1): relative for large
// gradients, absolute near zero. The float32 rounding floor of the loss,
// |loss| * 2^-24 / step, is subtracted first: below it a central difference
// carries no information.
FiniteDifferenceResult finite_difference_check(
    Network& net, const Tensor& input, const std::function<double(const Tensor&)>& loss,
    const std::function<Tensor(const Tensor&)>& loss_grad, int samples_per_parameter,
    std::uint64_t seed, float epsilon = 1e-2f);

// 0.5 * sum(y^2); gradient is y itself.
double half_sum_squares(const Tensor& output);
Tensor half_sum_squares_grad(const Tensor& output);

} // namespace ylt
