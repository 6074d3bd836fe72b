#include "ylt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ylt/errors.hpp"

namespace ylt {

std::int64_t numel_of(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ConfigError("tensor dimension must be positive, got " + std::to_string(d));
        n *= d;
    }
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(numel_of(shape)), 0.0f);
}

Tensor::Tensor(std::vector<int> s, std::vector<float> d) : shape(std::move(s)), data(std::move(d)) {
    if (numel_of(shape) != static_cast<std::int64_t>(data.size()))
        throw ConfigError("tensor shape " + shape_str(shape) + " does not match buffer of " +
                          std::to_string(data.size()) + " values");
}

void Tensor::fill(float v) { std::fill(data.begin(), data.end(), v); }

bool Tensor::all_finite() const {
    for (float v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor slice_batch(const Tensor& t, int n) {
    if (t.ndim() != 4) throw ConfigError("slice_batch expects an NCHW tensor, got " + shape_str(t.shape));
    std::vector<int> s{t.shape[1], t.shape[2], t.shape[3]};
    std::int64_t stride = numel_of(s);
    Tensor out(s);
    std::copy(t.data.begin() + n * stride, t.data.begin() + (n + 1) * stride, out.data.begin());
    return out;
}

Parameter::Parameter(std::vector<int> shape, std::string name_)
    : value(shape), gradient(shape), momentum_buffer(std::move(shape)), name(std::move(name_)) {}

bool sgd_momentum_step(const std::vector<Parameter*>& params, float lr, float momentum,
                       float weight_decay) {
    for (const Parameter* p : params)
        if (!p->gradient.all_finite()) return false;

    for (Parameter* p : params) {
        float* v = p->value.data.data();
        float* g = p->gradient.data.data();
        float* m = p->momentum_buffer.data.data();
        const std::size_t n = p->value.data.size();
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = momentum * m[i] - lr * (g[i] + weight_decay * v[i]);
            if (m[i] != 0.0f) v[i] += m[i];
            g[i] = 0.0f;
        }
    }
    return true;
}

} // namespace ylt
