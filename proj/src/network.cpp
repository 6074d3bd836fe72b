#include "ylt/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ylt/errors.hpp"

namespace ylt {

void initialize_conv_layer(Layer& layer, Rng& rng) {
    const int fan_in = layer.in_channels * layer.spec.size * layer.spec.size;
    const float scale = std::sqrt(1.0f / static_cast<float>(fan_in));
    for (auto& v : layer.kernels.value.data) v = rng.uniform_f(-scale, scale);
    layer.bias.value.fill(0.0f);
    if (layer.spec.batch_normalize) {
        layer.gamma.value.fill(1.0f);
        layer.beta.value.fill(0.0f);
        layer.running_mean.fill(0.0f);
        layer.running_var.fill(1.0f);
    }
}

namespace {

Parameter make_param(std::vector<int> shape, std::string name) {
    Parameter p;
    p.value = Tensor(std::move(shape));
    p.gradient = Tensor(p.value.shape);
    p.momentum_buffer = Tensor(p.value.shape);
    p.name = std::move(name);
    return p;
}

} // namespace

Network::Network(const NetworkConfig& config, std::uint64_t seed) : config_(config) {
    validate_config(config_);
    Rng rng(seed);
    int channels = config_.channels;
    int conv_index = 0;
    for (const LayerSpec& spec : config_.layers) {
        Layer layer;
        layer.spec = spec;
        if (spec.kind == LayerKind::convolutional) {
            const std::string base = "conv" + std::to_string(conv_index++);
            layer.in_channels = channels;
            layer.padding = spec.pad ? spec.size / 2 : 0;
            layer.kernels = make_param({spec.filters, channels, spec.size, spec.size},
                                       base + ".kernels");
            layer.bias = make_param({spec.filters}, base + ".bias");
            if (spec.batch_normalize) {
                layer.gamma = make_param({spec.filters}, base + ".scale");
                layer.beta = make_param({spec.filters}, base + ".shift");
                layer.running_mean = Tensor({spec.filters});
                layer.running_var = Tensor({spec.filters});
            }
            initialize_conv_layer(layer, rng);
            channels = spec.filters;
        }
        layers_.push_back(std::move(layer));
    }
    output_channels_ = channels;
}

void Network::set_input_dims(int width, int height) {
    const int stride = config_.total_stride();
    if (width <= 0 || height <= 0 || width % stride != 0 || height % stride != 0)
        throw ConfigError("input dims " + std::to_string(width) + "x" + std::to_string(height) +
                          " are not positive multiples of the network stride " +
                          std::to_string(stride));
    config_.input_width = width;
    config_.input_height = height;
}

Tensor Network::forward(const Tensor& input, Mode mode) {
    if (input.ndim() != 3 && input.ndim() != 4)
        throw ConfigError("network input must be CHW or NCHW, got " + shape_str(input.shape));
    const int c = input.shape[input.ndim() - 3];
    const int h = input.shape[input.ndim() - 2];
    const int w = input.shape[input.ndim() - 1];
    if (c != config_.channels)
        throw ConfigError("network expects " + std::to_string(config_.channels) +
                          " input channels, got " + std::to_string(c));
    const int stride = config_.total_stride();
    if (h % stride != 0 || w % stride != 0)
        throw ConfigError("input " + std::to_string(w) + "x" + std::to_string(h) +
                          " is not a multiple of the network stride " + std::to_string(stride));

    const bool training = mode != Mode::infer;
    if (training) input_ = input;

    Tensor x = input;
    for (Layer& layer : layers_) {
        if (layer.spec.kind == LayerKind::maxpool) {
            x = maxpool_forward(x, training ? &layer.pool_argmax : nullptr);
        } else {
            x = conv2d_forward(x, layer.kernels.value, layer.bias.value, layer.spec.stride,
                               layer.padding);
            if (layer.spec.batch_normalize)
                x = batchnorm_forward(x, layer.gamma.value, layer.beta.value, layer.running_mean,
                                      layer.running_var, mode, training ? &layer.bn_cache : nullptr);
            if (layer.spec.activation == Activation::leaky) x = leaky_relu_forward(x);
        }
        if (training) layer.output = x;
    }
    return x;
}

Tensor Network::backward(const Tensor& d_output) {
    if (input_.numel() == 0) throw ConfigError("backward without a preceding training forward");
    Tensor d = d_output;
    for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
        Layer& layer = layers_[i];
        const Tensor& layer_input = i == 0 ? input_ : layers_[i - 1].output;
        if (d.shape != layer.output.shape)
            throw ConfigError("backward gradient shape " + shape_str(d.shape) +
                              " does not match layer output " + shape_str(layer.output.shape));
        if (layer.spec.kind == LayerKind::maxpool) {
            Tensor d_in(layer_input.shape);
            maxpool_backward(d, layer.pool_argmax, d_in);
            d = std::move(d_in);
        } else {
            if (layer.spec.activation == Activation::leaky) {
                Tensor d_act(d.shape);
                leaky_relu_backward(layer.output, d, d_act);
                d = std::move(d_act);
            }
            if (layer.spec.batch_normalize) {
                Tensor d_bn(d.shape);
                batchnorm_backward(d, layer.bn_cache, layer.gamma.value, d_bn,
                                   layer.gamma.gradient, layer.beta.gradient);
                d = std::move(d_bn);
            }
            Tensor d_in(layer_input.shape);
            conv2d_backward(layer_input, layer.kernels.value, d, layer.spec.stride, layer.padding,
                            d_in, layer.kernels.gradient, layer.bias.gradient);
            d = std::move(d_in);
        }
    }
    return d;
}

std::vector<Parameter*> Network::trainable_parameters() {
    std::vector<Parameter*> params;
    for (Layer& layer : layers_) {
        if (layer.spec.kind != LayerKind::convolutional) continue;
        if (layer.spec.batch_normalize) {
            params.push_back(&layer.gamma);
            params.push_back(&layer.beta);
        } else {
            params.push_back(&layer.bias);
        }
        params.push_back(&layer.kernels);
    }
    return params;
}

void Network::zero_gradients() {
    for (Layer& layer : layers_) {
        layer.kernels.gradient.fill(0.0f);
        layer.bias.gradient.fill(0.0f);
        layer.gamma.gradient.fill(0.0f);
        layer.beta.gradient.fill(0.0f);
    }
}

void Network::reset_momentum() {
    for (Layer& layer : layers_) {
        layer.kernels.momentum_buffer.fill(0.0f);
        layer.bias.momentum_buffer.fill(0.0f);
        layer.gamma.momentum_buffer.fill(0.0f);
        layer.beta.momentum_buffer.fill(0.0f);
    }
}

FiniteDifferenceResult finite_difference_check(
    Network& net, const Tensor& input, const std::function<double(const Tensor&)>& loss,
    const std::function<Tensor(const Tensor&)>& loss_grad, int samples_per_parameter,
    std::uint64_t seed, float epsilon) {
    net.zero_gradients();
    Tensor out = net.forward(input, Mode::train_frozen_stats);
    net.backward(loss_grad(out));
    // Each loss evaluation carries the accumulated float32 rounding of its
    // summands, ~|loss| * 2^-23 * 2/sqrt(numel) in the RMS sense; divided by
    // the probe step (and amplified by the extrapolation below) that is the
    // resolution limit of any central difference, so it is granted as slack.
    const double noise_floor = 1.5e-6 * std::abs(loss(out)) /
                               (std::sqrt(static_cast<double>(out.numel())) * epsilon);

    std::vector<Parameter*> params = net.trainable_parameters();
    std::vector<std::vector<float>> analytic;
    analytic.reserve(params.size());
    for (const Parameter* p : params) analytic.push_back(p->gradient.data);

    // A central difference is only trustworthy when neither probe crosses an
    // activation kink or moves a pooling argmax; the caches written by the probe
    // forwards give an exact test for that (leaky keeps the sign of its input),
    // so contaminated probes shrink epsilon and eventually re-draw the index.
    // Both probes must also match the baseline state, or a non-monotone dip
    // through a kink could leave the endpoints agreeing with each other.
    const auto kink_state = [&net] {
        std::vector<std::int64_t> state;
        for (const Layer& layer : net.layers()) {
            if (layer.spec.kind == LayerKind::maxpool) {
                state.insert(state.end(), layer.pool_argmax.begin(), layer.pool_argmax.end());
            } else if (layer.spec.activation == Activation::leaky) {
                for (float v : layer.output.data)
                    state.push_back(v > 0.0f ? 1 : v < 0.0f ? -1 : 0);
            }
        }
        return state;
    };
    const std::vector<std::int64_t> base_state = kink_state();

    Rng rng(seed);
    FiniteDifferenceResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter& p = *params[pi];
        const int n = p.value.numel();
        for (int s = 0; s < samples_per_parameter; ++s) {
            for (int attempt = 0; attempt < 16; ++attempt) {
                const int idx = rng.uniform_int(n);
                const float saved = p.value[idx];
                const auto central = [&](float eps, bool& clean) {
                    p.value[idx] = saved + eps;
                    const double plus = loss(net.forward(input, Mode::train_frozen_stats));
                    const bool plus_clean = kink_state() == base_state;
                    p.value[idx] = saved - eps;
                    const double minus = loss(net.forward(input, Mode::train_frozen_stats));
                    clean = plus_clean && kink_state() == base_state;
                    p.value[idx] = saved;
                    return (plus - minus) / (2.0 * static_cast<double>(eps));
                };
                bool clean = false;
                const double c1 = central(epsilon, clean);
                if (!clean) continue;
                const double c2 = central(0.5f * epsilon, clean);
                if (!clean) continue;
                // The two scales must agree to within curvature; a larger gap
                // means the probe straddled a kink the state test cannot see
                // (e.g. inside the loss itself), so it gets re-drawn.
                if (std::abs(c1 - c2) > 0.02 * std::max(std::abs(c1) + std::abs(c2), 1.0))
                    continue;
                // Richardson extrapolation cancels the quadratic truncation term.
                const double numeric = (4.0 * c2 - c1) / 3.0;
                const double exact = analytic[pi][static_cast<std::size_t>(idx)];
                const double rel =
                    std::max(0.0, std::abs(numeric - exact) - noise_floor) /
                    std::max(std::abs(numeric) + std::abs(exact), 1.0);
                result.max_relative_error = std::max(result.max_relative_error, rel);
                ++result.checked;
                break;
            }
        }
    }
    net.zero_gradients();
    return result;
}

double half_sum_squares(const Tensor& output) {
    double acc = 0.0;
    for (float v : output.data) acc += 0.5 * static_cast<double>(v) * v;
    return acc;
}

Tensor half_sum_squares_grad(const Tensor& output) { return output; }

} // namespace ylt
