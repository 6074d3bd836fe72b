#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ylt {

enum class LayerKind { convolutional, maxpool };
enum class Activation { leaky, linear };

struct LayerSpec {
    LayerKind kind = LayerKind::convolutional;
    // convolutional attributes
    int filters = 1;
    int size = 3;
    int stride = 1;
    int pad = 1;
    bool batch_normalize = false;
    Activation activation = Activation::leaky;
    // maxpool is fixed 2x2/stride 2
};

struct RegionHeadSpec {
    int num_classes = 1;
    std::vector<std::pair<float, float>> anchors; // (pw, ph) in grid-cell units
    float nms_overlap_threshold = 0.45f;
    float objectness_ignore_iou = 0.6f;

    int num_anchors() const { return static_cast<int>(anchors.size()); }
};

struct NetworkConfig {
    int input_width = 416;
    int input_height = 416;
    int channels = 3;
    std::vector<LayerSpec> layers;
    RegionHeadSpec head;

    int total_stride() const;
    int grid_w() const { return input_width / total_stride(); }
    int grid_h() const { return input_height / total_stride(); }
    // index (into layers) of the last convolutional layer
    int final_conv_index() const;
};

inline int required_final_filters(int num_classes, int num_anchors) {
    return (num_classes + 5) * num_anchors;
}

// Throws ConfigError on any violated constraint (filter-count rule, illegal
// kernel/stride/pad, input dims not divisible by the downsampling stride).
void validate_config(const NetworkConfig& cfg);

// One [section] of a key=value config file, entries in file order.
struct ConfigSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(const std::string& key) const;
};

// Splits sectioned key=value text. Whitespace-tolerant; '#' starts a comment;
// section order is kept; duplicate section names are allowed.
std::vector<ConfigSection> parse_config_sections(const std::string& text);

// Strict scalar parsing for section values; throws ConfigError naming the key.
int config_int(const ConfigSection& sec, const std::string& key, int fallback);
float config_float(const ConfigSection& sec, const std::string& key, float fallback);
std::vector<float> parse_float_list(const std::string& text);

// True for [net], [convolutional], [maxpool], [region].
bool is_network_section(const std::string& name);

// Builds a network description from its sections; rejects unknown sections and
// unknown keys within known sections.
NetworkConfig network_config_from_sections(const std::vector<ConfigSection>& sections);

// Sectioned key=value network description ([net], [convolutional], [maxpool],
// [region]). Whitespace-tolerant; '#' starts a comment; section order is kept.
NetworkConfig parse_network_config_text(const std::string& text);
NetworkConfig load_network_config(const std::string& path);
std::string network_config_to_text(const NetworkConfig& cfg);
void save_network_config(const NetworkConfig& cfg, const std::string& path);

} // namespace ylt
