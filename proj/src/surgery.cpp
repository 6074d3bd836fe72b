#include "ylt/surgery.hpp"

#include <algorithm>

#include "ylt/errors.hpp"

namespace ylt {
namespace {

int conv_layer_count(const NetworkConfig& config) {
    int n = 0;
    for (const LayerSpec& spec : config.layers)
        if (spec.kind == LayerKind::convolutional) ++n;
    return n;
}

std::string dims_str(int f, int c, int k) {
    return std::to_string(f) + "x" + std::to_string(c) + "x" + std::to_string(k) + "x" +
           std::to_string(k);
}

} // namespace

SurgeryPlan make_surgery_plan(const NetworkConfig& target_config, int source_classes) {
    const int convs = conv_layer_count(target_config);
    if (convs == 0) throw ConfigError("surgery needs at least one convolutional layer");
    SurgeryPlan plan;
    plan.source_classes = source_classes;
    plan.target_classes = target_config.head.num_classes;
    plan.num_anchors = target_config.head.num_anchors();
    plan.reinit_layers = {convs - 1};
    return plan;
}

NetworkConfig retarget_config(const NetworkConfig& source_config, int target_classes,
                              const std::vector<std::pair<float, float>>& anchors) {
    if (target_classes < 1) throw ConfigError("target class count must be at least 1");
    if (anchors.empty()) throw ConfigError("target anchors must not be empty");
    NetworkConfig target = source_config;
    target.head.num_classes = target_classes;
    target.head.anchors = anchors;
    const int final_index = target.final_conv_index();
    target.layers[static_cast<std::size_t>(final_index)].filters =
        required_final_filters(target_classes, static_cast<int>(anchors.size()));
    validate_config(target);
    return target;
}

Network apply_surgery(const WeightsFile& source, const NetworkConfig& target_config,
                      const SurgeryPlan& plan, std::uint64_t seed) {
    validate_config(target_config);
    const int convs = conv_layer_count(target_config);
    if (static_cast<int>(source.layers.size()) != convs)
        throw DataError("source weights hold " + std::to_string(source.layers.size()) +
                        " layers, target config has " + std::to_string(convs));
    if (std::find(plan.reinit_layers.begin(), plan.reinit_layers.end(), convs - 1) ==
        plan.reinit_layers.end())
        throw ConfigError("surgery plan must reinitialize the final convolutional layer");
    for (int idx : plan.reinit_layers)
        if (idx < 0 || idx >= convs)
            throw ConfigError("surgery plan reinitializes layer " + std::to_string(idx) +
                              " outside 0.." + std::to_string(convs - 1));
    const int expected =
        required_final_filters(plan.target_classes, plan.num_anchors);
    if (target_config.head.num_classes != plan.target_classes ||
        target_config.head.num_anchors() != plan.num_anchors)
        throw ConfigError("surgery plan and target config disagree on the detection head");
    const LayerSpec& final_spec =
        target_config.layers[static_cast<std::size_t>(target_config.final_conv_index())];
    if (final_spec.filters != expected)
        throw ConfigError("final layer has " + std::to_string(final_spec.filters) +
                          " filters, surgery targets " + std::to_string(expected));

    Network net(target_config, seed);
    int conv_index = 0;
    for (Layer& layer : net.layers()) {
        if (layer.spec.kind != LayerKind::convolutional) continue;
        const int idx = conv_index++;
        if (std::find(plan.reinit_layers.begin(), plan.reinit_layers.end(), idx) !=
            plan.reinit_layers.end())
            continue;
        const LayerWeights& lw = source.layers[static_cast<std::size_t>(idx)];
        if (lw.filters != layer.spec.filters || lw.channels != layer.in_channels ||
            lw.kernel != layer.spec.size || lw.batch_normalize != layer.spec.batch_normalize)
            throw DataError("layer conv" + std::to_string(idx) + ": source is " +
                            dims_str(lw.filters, lw.channels, lw.kernel) + ", target expects " +
                            dims_str(layer.spec.filters, layer.in_channels, layer.spec.size));
        layer.kernels.value.data = lw.kernels;
        if (lw.batch_normalize) {
            layer.gamma.value.data = lw.gamma;
            layer.beta.value.data = lw.beta;
            layer.running_mean.data = lw.running_mean;
            layer.running_var.data = lw.running_var;
        } else {
            layer.bias.value.data = lw.bias;
        }
    }
    return net;
}

} // namespace ylt
