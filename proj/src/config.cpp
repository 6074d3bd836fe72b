#include "ylt/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "ylt/errors.hpp"

namespace ylt {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void require_keys(const ConfigSection& sec, std::initializer_list<const char*> known) {
    for (const auto& [k, v] : sec.entries) {
        bool ok = false;
        for (const char* key : known)
            if (k == key) ok = true;
        if (!ok)
            throw ConfigError("unknown key '" + k + "' in section [" + sec.name + "]");
    }
}

} // namespace

const std::string* ConfigSection::find(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

std::vector<ConfigSection> parse_config_sections(const std::string& text) {
    std::vector<ConfigSection> sections;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header '" + line + "'");
            sections.push_back({trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + line + "'");
        if (sections.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key=value before any section");
        sections.back().entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return sections;
}

int config_int(const ConfigSection& sec, const std::string& key, int fallback) {
    const std::string* v = sec.find(key);
    if (!v) return fallback;
    int out = 0;
    const char* first = v->c_str();
    const char* last = first + v->size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("key '" + key + "' in section [" + sec.name + "]: '" + *v +
                          "' is not an integer");
    return out;
}

float config_float(const ConfigSection& sec, const std::string& key, float fallback) {
    const std::string* v = sec.find(key);
    if (!v) return fallback;
    const char* first = v->c_str();
    char* end = nullptr;
    float out = std::strtof(first, &end);
    if (end != first + v->size() || v->empty())
        throw ConfigError("key '" + key + "' in section [" + sec.name + "]: '" + *v +
                          "' is not a number");
    return out;
}

std::vector<float> parse_float_list(const std::string& text) {
    std::vector<float> out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        const char* first = tok.c_str();
        char* end = nullptr;
        float v = std::strtof(first, &end);
        if (end != first + tok.size())
            throw ConfigError("'" + tok + "' is not a number");
        out.push_back(v);
    }
    return out;
}

bool is_network_section(const std::string& name) {
    return name == "net" || name == "convolutional" || name == "maxpool" || name == "region";
}

int NetworkConfig::total_stride() const {
    int s = 1;
    for (const LayerSpec& l : layers)
        s *= (l.kind == LayerKind::maxpool) ? 2 : l.stride;
    return s;
}

int NetworkConfig::final_conv_index() const {
    for (int i = static_cast<int>(layers.size()) - 1; i >= 0; --i)
        if (layers[static_cast<std::size_t>(i)].kind == LayerKind::convolutional) return i;
    return -1;
}

void validate_config(const NetworkConfig& cfg) {
    if (cfg.layers.empty()) throw ConfigError("network has no layers");
    if (cfg.channels != 3) throw ConfigError("only 3-channel input is supported");
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        const LayerSpec& l = cfg.layers[i];
        if (l.kind != LayerKind::convolutional) continue;
        if (l.filters < 1)
            throw ConfigError("layer " + std::to_string(i) + ": filters must be >= 1");
        if (l.size != 1 && l.size != 3)
            throw ConfigError("layer " + std::to_string(i) + ": kernel size must be 1 or 3");
        if (l.stride != 1 && l.stride != 2)
            throw ConfigError("layer " + std::to_string(i) + ": stride must be 1 or 2");
        if (l.pad != 0 && l.pad != 1)
            throw ConfigError("layer " + std::to_string(i) + ": pad must be 0 or 1");
    }
    int fci = cfg.final_conv_index();
    if (fci < 0) throw ConfigError("network has no convolutional layer");
    const RegionHeadSpec& head = cfg.head;
    if (head.num_classes < 1) throw ConfigError("region head needs at least one class");
    if (head.anchors.empty()) throw ConfigError("region head needs at least one anchor");
    for (const auto& [pw, ph] : head.anchors)
        if (pw <= 0 || ph <= 0) throw ConfigError("anchor dims must be positive");
    if (head.nms_overlap_threshold <= 0 || head.nms_overlap_threshold >= 1)
        throw ConfigError("nms overlap threshold must lie in (0,1)");
    int want = required_final_filters(head.num_classes, head.num_anchors());
    int got = cfg.layers[static_cast<std::size_t>(fci)].filters;
    if (got != want)
        throw ConfigError("final convolutional layer has " + std::to_string(got) +
                          " filters, the region head with " + std::to_string(head.num_classes) +
                          " classes and " + std::to_string(head.num_anchors()) +
                          " anchors requires (classes+5)*anchors = " + std::to_string(want));
    int stride = cfg.total_stride();
    if (cfg.input_width % stride != 0 || cfg.input_height % stride != 0)
        throw ConfigError("input dims " + std::to_string(cfg.input_width) + "x" +
                          std::to_string(cfg.input_height) +
                          " are not divisible by the downsampling stride " + std::to_string(stride));
}

NetworkConfig network_config_from_sections(const std::vector<ConfigSection>& sections) {
    NetworkConfig cfg;
    bool saw_region = false;
    for (const ConfigSection& sec : sections) {
        if (sec.name == "net") {
            require_keys(sec, {"width", "height", "channels"});
            cfg.input_width = config_int(sec, "width", cfg.input_width);
            cfg.input_height = config_int(sec, "height", cfg.input_height);
            cfg.channels = config_int(sec, "channels", 3);
        } else if (sec.name == "convolutional") {
            require_keys(sec, {"filters", "size", "stride", "pad", "batch_normalize", "activation"});
            LayerSpec l;
            l.kind = LayerKind::convolutional;
            l.filters = config_int(sec, "filters", 1);
            l.size = config_int(sec, "size", 3);
            l.stride = config_int(sec, "stride", 1);
            l.pad = config_int(sec, "pad", l.size == 3 ? 1 : 0);
            l.batch_normalize = config_int(sec, "batch_normalize", 0) != 0;
            const std::string* act = sec.find("activation");
            if (act) {
                if (*act == "leaky") l.activation = Activation::leaky;
                else if (*act == "linear") l.activation = Activation::linear;
                else throw ConfigError("unknown activation '" + *act + "'");
            }
            cfg.layers.push_back(l);
        } else if (sec.name == "maxpool") {
            require_keys(sec, {"size", "stride"});
            if (config_int(sec, "size", 2) != 2 || config_int(sec, "stride", 2) != 2)
                throw ConfigError("maxpool supports only size=2 stride=2");
            LayerSpec l;
            l.kind = LayerKind::maxpool;
            l.size = 2;
            l.stride = 2;
            cfg.layers.push_back(l);
        } else if (sec.name == "region") {
            require_keys(sec, {"classes", "num", "anchors", "nms_overlap", "ignore_iou"});
            saw_region = true;
            cfg.head.num_classes = config_int(sec, "classes", 1);
            int num = config_int(sec, "num", 0);
            const std::string* a = sec.find("anchors");
            if (!a) throw ConfigError("[region] section is missing anchors");
            std::vector<float> vals = parse_float_list(*a);
            if (vals.size() % 2 != 0)
                throw ConfigError("[region] anchors need an even number of values");
            cfg.head.anchors.clear();
            for (std::size_t i = 0; i + 1 < vals.size(); i += 2)
                cfg.head.anchors.emplace_back(vals[i], vals[i + 1]);
            if (num != 0 && num != cfg.head.num_anchors())
                throw ConfigError("[region] num=" + std::to_string(num) + " does not match " +
                                  std::to_string(cfg.head.num_anchors()) + " anchor pairs");
            cfg.head.nms_overlap_threshold = config_float(sec, "nms_overlap", cfg.head.nms_overlap_threshold);
            cfg.head.objectness_ignore_iou = config_float(sec, "ignore_iou", cfg.head.objectness_ignore_iou);
        } else {
            throw ConfigError("unknown section [" + sec.name + "]");
        }
    }
    if (!saw_region) throw ConfigError("network description has no [region] section");
    validate_config(cfg);
    return cfg;
}

NetworkConfig parse_network_config_text(const std::string& text) {
    return network_config_from_sections(parse_config_sections(text));
}

NetworkConfig load_network_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open network config '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_network_config_text(os.str());
}

std::string network_config_to_text(const NetworkConfig& cfg) {
    std::ostringstream os;
    os << "[net]\nwidth=" << cfg.input_width << "\nheight=" << cfg.input_height
       << "\nchannels=" << cfg.channels << "\n";
    for (const LayerSpec& l : cfg.layers) {
        if (l.kind == LayerKind::maxpool) {
            os << "\n[maxpool]\nsize=2\nstride=2\n";
            continue;
        }
        os << "\n[convolutional]\nfilters=" << l.filters << "\nsize=" << l.size
           << "\nstride=" << l.stride << "\npad=" << l.pad
           << "\nbatch_normalize=" << (l.batch_normalize ? 1 : 0)
           << "\nactivation=" << (l.activation == Activation::leaky ? "leaky" : "linear") << "\n";
    }
    os << "\n[region]\nclasses=" << cfg.head.num_classes << "\nnum=" << cfg.head.num_anchors()
       << "\nanchors=";
    for (std::size_t i = 0; i < cfg.head.anchors.size(); ++i) {
        if (i) os << ",";
        os << cfg.head.anchors[i].first << "," << cfg.head.anchors[i].second;
    }
    os << "\nnms_overlap=" << cfg.head.nms_overlap_threshold
       << "\nignore_iou=" << cfg.head.objectness_ignore_iou << "\n";
    return os.str();
}

void save_network_config(const NetworkConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write network config '" + path + "'");
    out << network_config_to_text(cfg);
}

} // namespace ylt
