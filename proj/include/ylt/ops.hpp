#pragma once

#include "ylt/tensor.hpp"

namespace ylt {

enum class Mode { infer, train, train_frozen_stats };

// All ops accept CHW (treated as a single-image batch) or NCHW tensors and
// return the same rank they were given.

// Cross-correlation with square kernel. out H' = (H + 2*pad - k)/stride + 1.
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias,
                      int stride, int pad);
// d_input has the input's shape; d_weights/d_bias are accumulated (+=).
void conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& d_output,
                     int stride, int pad, Tensor& d_input, Tensor& d_weights, Tensor& d_bias);

// 2x2/stride-2 max pooling; H and W must be even. argmax holds the flat input
// offset that produced each output value (first occurrence wins on ties).
Tensor maxpool_forward(const Tensor& input, std::vector<std::int64_t>* argmax = nullptr);
void maxpool_backward(const Tensor& d_output, const std::vector<std::int64_t>& argmax,
                      Tensor& d_input);

struct BatchNormCache {
    Tensor xhat;              // normalized input
    std::vector<float> invstd; // per channel
};

inline constexpr float kBatchNormEps = 1e-5f;
inline constexpr float kBatchNormMomentum = 0.99f;

// Train modes normalize with batch statistics over (N,H,W) per channel;
// Mode::train also folds them into the running stats. Infer mode uses the
// running stats.
Tensor batchnorm_forward(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                         Tensor& running_mean, Tensor& running_var, Mode mode,
                         BatchNormCache* cache = nullptr);
void batchnorm_backward(const Tensor& d_output, const BatchNormCache& cache, const Tensor& gamma,
                        Tensor& d_input, Tensor& d_gamma, Tensor& d_beta);

inline constexpr float kLeakySlope = 0.1f;

Tensor leaky_relu_forward(const Tensor& input);
// Uses the forward output's sign to pick the slope (valid since f preserves sign).
void leaky_relu_backward(const Tensor& output, const Tensor& d_output, Tensor& d_input);

} // namespace ylt
