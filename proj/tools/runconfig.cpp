#include "runconfig.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ylt/errors.hpp"

namespace ylt {

namespace {

std::uint64_t parse_u64(const ConfigSection& sec, const std::string& key, std::uint64_t fallback) {
    const std::string* v = sec.find(key);
    if (!v) return fallback;
    const char* first = v->c_str();
    char* end = nullptr;
    unsigned long long out = std::strtoull(first, &end, 10);
    if (v->empty() || end != first + v->size())
        throw ConfigError("key '" + key + "' in section [" + sec.name + "]: '" + *v +
                          "' is not an unsigned integer");
    return out;
}

std::vector<int> parse_int_list(const ConfigSection& sec, const std::string& key,
                                std::vector<int> fallback) {
    const std::string* v = sec.find(key);
    if (!v) return fallback;
    std::vector<int> out;
    for (float f : parse_float_list(*v)) {
        int i = static_cast<int>(f);
        if (static_cast<float>(i) != f)
            throw ConfigError("key '" + key + "' in section [" + sec.name +
                              "]: expected integers");
        out.push_back(i);
    }
    return out;
}

void apply_training_section(TrainingConfig& t, const ConfigSection& sec) {
    static const char* known[] = {
        "batch_size",        "max_iterations",     "learning_rate",     "loss_stop_threshold",
        "ema_factor",        "checkpoint_iterations", "divergence_ratio", "lr_backoff_factor",
        "backoff_budget",    "warmup_iterations",  "momentum",          "weight_decay",
        "hard_negative_cap", "multiscale",         "multiscale_interval", "seed",
        "lr_spike_iteration", "lr_spike_factor"};
    for (const auto& [k, v] : sec.entries) {
        bool ok = false;
        for (const char* key : known)
            if (k == key) ok = true;
        if (!ok) throw ConfigError("unknown key '" + k + "' in section [training]");
    }
    t.batch_size = config_int(sec, "batch_size", t.batch_size);
    t.max_iterations = config_int(sec, "max_iterations", t.max_iterations);
    t.learning_rate = config_float(sec, "learning_rate", t.learning_rate);
    t.loss_stop_threshold = config_float(sec, "loss_stop_threshold", t.loss_stop_threshold);
    t.ema_factor = config_float(sec, "ema_factor", t.ema_factor);
    t.checkpoint_iterations =
        parse_int_list(sec, "checkpoint_iterations", t.checkpoint_iterations);
    t.divergence_ratio = config_float(sec, "divergence_ratio", t.divergence_ratio);
    t.lr_backoff_factor = config_float(sec, "lr_backoff_factor", t.lr_backoff_factor);
    t.backoff_budget = config_int(sec, "backoff_budget", t.backoff_budget);
    t.warmup_iterations = config_int(sec, "warmup_iterations", t.warmup_iterations);
    t.momentum = config_float(sec, "momentum", t.momentum);
    t.weight_decay = config_float(sec, "weight_decay", t.weight_decay);
    t.hard_negative_cap = config_float(sec, "hard_negative_cap", t.hard_negative_cap);
    t.multiscale = config_int(sec, "multiscale", t.multiscale ? 1 : 0) != 0;
    t.multiscale_interval = config_int(sec, "multiscale_interval", t.multiscale_interval);
    t.seed = parse_u64(sec, "seed", t.seed);
    t.lr_spike_iteration = config_int(sec, "lr_spike_iteration", t.lr_spike_iteration);
    t.lr_spike_factor = config_float(sec, "lr_spike_factor", t.lr_spike_factor);
}

void apply_augment_section(AugmentationConfig& a, const ConfigSection& sec) {
    static const char* known[] = {"scale_jitter",      "hflip_prob",
                                  "hue_delta",         "sat_exposure_factor",
                                  "annotation_jitter", "annotation_retention"};
    for (const auto& [k, v] : sec.entries) {
        bool ok = false;
        for (const char* key : known)
            if (k == key) ok = true;
        if (!ok) throw ConfigError("unknown key '" + k + "' in section [augmentation]");
    }
    a.scale_jitter = config_float(sec, "scale_jitter", a.scale_jitter);
    a.hflip_prob = config_float(sec, "hflip_prob", a.hflip_prob);
    a.hue_delta = config_float(sec, "hue_delta", a.hue_delta);
    a.sat_exposure_factor = config_float(sec, "sat_exposure_factor", a.sat_exposure_factor);
    a.annotation_jitter = config_float(sec, "annotation_jitter", a.annotation_jitter);
    a.annotation_retention = config_float(sec, "annotation_retention", a.annotation_retention);
}

void apply_paths_section(RunPaths& p, const ConfigSection& sec) {
    struct Entry {
        const char* key;
        std::string* slot;
    };
    const Entry entries[] = {{"manifest", &p.manifest}, {"names", &p.names},
                             {"out", &p.out},           {"weights", &p.weights},
                             {"image", &p.image},       {"known", &p.known},
                             {"unknown", &p.unknown},   {"checkpoints", &p.checkpoints},
                             {"report", &p.report}};
    for (const auto& [k, v] : sec.entries) {
        bool ok = false;
        for (const Entry& e : entries)
            if (k == e.key) {
                *e.slot = v;
                ok = true;
            }
        if (!ok) throw ConfigError("unknown key '" + k + "' in section [paths]");
    }
}

std::string fmt_float(float v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return buf;
}

} // namespace

RunConfig parse_run_config_text(const std::string& text) {
    RunConfig rc;
    std::vector<ConfigSection> network_sections;
    for (const ConfigSection& sec : parse_config_sections(text)) {
        if (is_network_section(sec.name))
            network_sections.push_back(sec);
        else if (sec.name == "training")
            apply_training_section(rc.training, sec);
        else if (sec.name == "augmentation")
            apply_augment_section(rc.augment, sec);
        else if (sec.name == "paths")
            apply_paths_section(rc.paths, sec);
        else
            throw ConfigError("unknown section [" + sec.name + "]");
    }
    if (!network_sections.empty()) {
        rc.network = network_config_from_sections(network_sections);
        rc.has_network = true;
    }
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_run_config_text(os.str());
}

std::string run_config_echo(const RunConfig& rc) {
    std::ostringstream os;
    const TrainingConfig& t = rc.training;
    os << "[training]\n";
    os << "batch_size=" << t.batch_size << "\n";
    os << "max_iterations=" << t.max_iterations << "\n";
    os << "learning_rate=" << fmt_float(t.learning_rate) << "\n";
    os << "loss_stop_threshold=" << fmt_float(t.loss_stop_threshold) << "\n";
    os << "ema_factor=" << fmt_float(t.ema_factor) << "\n";
    os << "checkpoint_iterations=";
    for (std::size_t i = 0; i < t.checkpoint_iterations.size(); ++i)
        os << (i ? "," : "") << t.checkpoint_iterations[i];
    os << "\n";
    os << "divergence_ratio=" << fmt_float(t.divergence_ratio) << "\n";
    os << "lr_backoff_factor=" << fmt_float(t.lr_backoff_factor) << "\n";
    os << "backoff_budget=" << t.backoff_budget << "\n";
    os << "warmup_iterations=" << t.warmup_iterations << "\n";
    os << "momentum=" << fmt_float(t.momentum) << "\n";
    os << "weight_decay=" << fmt_float(t.weight_decay) << "\n";
    os << "hard_negative_cap=" << fmt_float(t.hard_negative_cap) << "\n";
    os << "multiscale=" << (t.multiscale ? 1 : 0) << "\n";
    os << "multiscale_interval=" << t.multiscale_interval << "\n";
    os << "seed=" << t.seed << "\n";
    os << "lr_spike_iteration=" << t.lr_spike_iteration << "\n";
    os << "lr_spike_factor=" << fmt_float(t.lr_spike_factor) << "\n";
    const AugmentationConfig& a = rc.augment;
    os << "\n[augmentation]\n";
    os << "scale_jitter=" << fmt_float(a.scale_jitter) << "\n";
    os << "hflip_prob=" << fmt_float(a.hflip_prob) << "\n";
    os << "hue_delta=" << fmt_float(a.hue_delta) << "\n";
    os << "sat_exposure_factor=" << fmt_float(a.sat_exposure_factor) << "\n";
    os << "annotation_jitter=" << fmt_float(a.annotation_jitter) << "\n";
    os << "annotation_retention=" << fmt_float(a.annotation_retention) << "\n";
    const RunPaths& p = rc.paths;
    os << "\n[paths]\n";
    struct Entry {
        const char* key;
        const std::string* value;
    };
    const Entry entries[] = {{"manifest", &p.manifest}, {"names", &p.names},
                             {"out", &p.out},           {"weights", &p.weights},
                             {"image", &p.image},       {"known", &p.known},
                             {"unknown", &p.unknown},   {"checkpoints", &p.checkpoints},
                             {"report", &p.report}};
    for (const Entry& e : entries)
        if (!e.value->empty()) os << e.key << "=" << *e.value << "\n";
    if (rc.has_network) os << "\n" << network_config_to_text(rc.network);
    return os.str();
}

} // namespace ylt
