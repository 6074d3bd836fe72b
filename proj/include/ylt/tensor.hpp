#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ylt {

// Dense row-major f32 tensor. Images and activations use CHW (or NCHW) order.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s);
    Tensor(std::vector<int> s, std::vector<float> d);

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    int ndim() const { return static_cast<int>(shape.size()); }

    float& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    float operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    float& at3(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    float at3(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }

    void fill(float v);
    bool all_finite() const;
};

std::int64_t numel_of(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// View of batch element n of an NCHW tensor, copied out as a CHW tensor.
Tensor slice_batch(const Tensor& t, int n);

// Trainable value with its gradient and SGD momentum buffer (all same shape).
struct Parameter {
    Tensor value;
    Tensor gradient;
    Tensor momentum_buffer;
    std::string name;

    Parameter() = default;
    Parameter(std::vector<int> shape, std::string name_);

    void zero_grad() { gradient.fill(0.0f); }
};

// buffer <- momentum*buffer - lr*(grad + decay*value); value <- value + buffer.
// Returns false without touching any parameter when a gradient is non-finite
// (the caller treats that as a divergence event). Gradients are zeroed after a
// successful step.
bool sgd_momentum_step(const std::vector<Parameter*>& params, float lr,
                       float momentum = 0.9f, float weight_decay = 5e-4f);

} // namespace ylt
