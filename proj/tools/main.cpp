#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "runconfig.hpp"
#include "ylt/anchors.hpp"
#include "ylt/dataset.hpp"
#include "ylt/errors.hpp"
#include "ylt/eval.hpp"
#include "ylt/image.hpp"
#include "ylt/network.hpp"
#include "ylt/region.hpp"
#include "ylt/report.hpp"
#include "ylt/surgery.hpp"
#include "ylt/synth.hpp"
#include "ylt/training.hpp"
#include "ylt/weights.hpp"

namespace fs = std::filesystem;
using namespace ylt;

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string fmt_g(float v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
    return buf;
}

// The reproducibility log: effective config to stderr, and to a file when a
// path is known. Machine output (CSV rows) goes to stdout only.
void emit_run_log(const std::string& command, int threads, const RunConfig& rc,
                  const std::string& log_path) {
    std::ostringstream os;
    os << "command=" << command << "\n";
    os << "version=" << kToolVersion << "\n";
    os << "threads=" << threads << "\n\n";
    os << run_config_echo(rc);
    std::cerr << os.str();
    if (log_path.empty()) return;
    fs::path p(log_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write run log '" + log_path + "'");
    f << os.str();
}

// Image paths from a manifest, resolved against the manifest's directory.
std::vector<std::string> manifest_image_paths(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest '" + manifest_path + "'");
    fs::path base = fs::path(manifest_path).parent_path();
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t b = line.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r\n");
        line = line.substr(b, e - b + 1);
        fs::path p(line);
        out.push_back(p.is_absolute() ? p.string() : (base / p).string());
    }
    return out;
}

std::string default_names_path(const std::string& manifest_path) {
    return (fs::path(manifest_path).parent_path() / "names.txt").string();
}

std::vector<std::pair<float, float>> parse_anchor_pairs(const std::string& text) {
    std::vector<float> vals = parse_float_list(text);
    if (vals.empty() || vals.size() % 2 != 0)
        throw ConfigError("anchors need an even, positive number of comma-separated values");
    std::vector<std::pair<float, float>> out;
    for (std::size_t i = 0; i + 1 < vals.size(); i += 2) out.emplace_back(vals[i], vals[i + 1]);
    return out;
}

struct SynthOpts {
    std::string out;
    SynthDatasetSpec spec;
};

int run_synth(const SynthOpts& o, int threads, const std::string& run_log) {
    RunConfig rc;
    rc.training.seed = o.spec.seed;
    rc.paths.out = o.out;
    std::string log = run_log.empty() ? (fs::path(o.out) / "run.log").string() : run_log;
    emit_run_log("synth", threads, rc, log);
    generate_synthetic_dataset(o.spec, o.out);
    std::string table = "class,train,val\n";
    for (int c = 0; c < o.spec.classes; ++c)
        table += "class" + std::to_string(c) + "," + std::to_string(o.spec.train_per_class) +
                 "," + std::to_string(o.spec.val_per_class) + "\n";
    if (o.spec.hard_negative_train > 0)
        table += "negatives," + std::to_string(o.spec.hard_negative_train) + ",0\n";
    if (o.spec.unknown_scenes > 0)
        table += "unknown,0," + std::to_string(o.spec.unknown_scenes) + "\n";
    std::cout << table;
    return 0;
}

struct AnchorsOpts {
    std::string manifest;
    int k = 5;
    int grid = 13;
    std::uint64_t seed = 0;
};

int run_anchors(const AnchorsOpts& o, int threads, const std::string& run_log) {
    RunConfig rc;
    rc.paths.manifest = o.manifest;
    emit_run_log("anchors", threads, rc, run_log);
    std::vector<std::pair<float, float>> boxes;
    for (const std::string& image : manifest_image_paths(o.manifest)) {
        std::string label = label_path_for(image);
        if (!fs::exists(label)) continue;
        for (const BoxAnnotation& b : load_label_file(label)) boxes.emplace_back(b.w, b.h);
    }
    if (boxes.empty()) throw DataError("manifest '" + o.manifest + "' holds no annotated boxes");
    AnchorEstimate est = estimate_anchors(boxes, o.k, o.grid, o.seed);
    if (est.duplicated)
        std::cerr << "warning: fewer distinct box shapes than k; anchor set was cycled\n";
    std::cerr << "mean_distortion=" << fmt6(est.mean_distortion) << "\n";
    for (const auto& [w, h] : est.anchors) std::cout << fmt_g(w) << "," << fmt_g(h) << "\n";
    return 0;
}

struct SurgeryOpts {
    std::string weights, config, anchors, out, out_config;
    int classes = 0;
    std::uint64_t seed = 0;
};

int run_surgery(const SurgeryOpts& o, int threads, const std::string& run_log) {
    RunConfig source_rc = load_run_config(o.config);
    if (!source_rc.has_network)
        throw ConfigError("config '" + o.config + "' holds no network sections");
    const NetworkConfig& source_cfg = source_rc.network;
    std::vector<std::pair<float, float>> anchors;
    if (o.anchors.find(',') != std::string::npos) {
        anchors = parse_anchor_pairs(o.anchors);
    } else {
        int count = std::atoi(o.anchors.c_str());
        if (count < 1) throw ConfigError("--anchors needs a count or comma-separated pairs");
        if (count != source_cfg.head.num_anchors())
            throw ConfigError("anchor count " + std::to_string(count) + " differs from the source's " +
                              std::to_string(source_cfg.head.num_anchors()) +
                              "; pass explicit anchor pairs");
        anchors = source_cfg.head.anchors;
    }
    NetworkConfig target_cfg = retarget_config(source_cfg, o.classes, anchors);

    RunConfig rc;
    rc.has_network = true;
    rc.network = target_cfg;
    rc.paths.weights = o.weights;
    rc.paths.out = o.out;
    emit_run_log("surgery", threads, rc, run_log);

    WeightsFile source = read_weights_file(o.weights, source_cfg);
    SurgeryPlan plan = make_surgery_plan(target_cfg, source_cfg.head.num_classes);
    Network net = apply_surgery(source, target_cfg, plan, o.seed);
    if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
    save_weights(net, o.out);
    std::string out_config = o.out_config;
    if (out_config.empty()) out_config = fs::path(o.out).replace_extension(".cfg").string();
    save_network_config(target_cfg, out_config);

    int src_filters = source_cfg.layers[source_cfg.final_conv_index()].filters;
    int dst_filters = target_cfg.layers[target_cfg.final_conv_index()].filters;
    std::cout << "final filters " << src_filters << " → " << dst_filters << "\n";
    return 0;
}

struct TrainOpts {
    std::string config, manifest, names, out, weights;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* batch_opt = nullptr;
    CLI::Option* iters_opt = nullptr;
    CLI::Option* lr_opt = nullptr;
    CLI::Option* cap_opt = nullptr;
    CLI::Option* spike_iter_opt = nullptr;
    CLI::Option* spike_factor_opt = nullptr;
    CLI::Option* multiscale_opt = nullptr;
    std::uint64_t seed = 0;
    int batch_size = 0, max_iterations = 0;
    float learning_rate = 0, hard_negative_cap = 0, lr_spike_factor = 0;
    int lr_spike_iteration = -1;
    bool multiscale = true;
};

int run_train(TrainOpts& o, int threads, const std::string& run_log) {
    RunConfig rc = load_run_config(o.config);
    if (!rc.has_network)
        throw ConfigError("config '" + o.config + "' holds no network sections");
    if (!o.manifest.empty()) rc.paths.manifest = o.manifest;
    if (!o.names.empty()) rc.paths.names = o.names;
    if (!o.out.empty()) rc.paths.out = o.out;
    if (!o.weights.empty()) rc.paths.weights = o.weights;
    if (o.seed_opt->count()) rc.training.seed = o.seed;
    if (o.batch_opt->count()) rc.training.batch_size = o.batch_size;
    if (o.iters_opt->count()) rc.training.max_iterations = o.max_iterations;
    if (o.lr_opt->count()) rc.training.learning_rate = o.learning_rate;
    if (o.cap_opt->count()) rc.training.hard_negative_cap = o.hard_negative_cap;
    if (o.spike_iter_opt->count()) rc.training.lr_spike_iteration = o.lr_spike_iteration;
    if (o.spike_factor_opt->count()) rc.training.lr_spike_factor = o.lr_spike_factor;
    if (o.multiscale_opt->count()) rc.training.multiscale = o.multiscale;
    if (rc.paths.manifest.empty()) throw ConfigError("no manifest given (flag or [paths])");
    if (rc.paths.out.empty()) throw ConfigError("no output directory given (flag or [paths])");
    if (rc.paths.names.empty()) rc.paths.names = default_names_path(rc.paths.manifest);

    fs::create_directories(rc.paths.out);
    std::string log = run_log.empty() ? (fs::path(rc.paths.out) / "run.log").string() : run_log;
    emit_run_log("train", threads, rc, log);

    Dataset data = load_dataset(load_manifest(rc.paths.manifest, rc.paths.names));
    if (static_cast<int>(data.class_names.size()) != rc.network.head.num_classes)
        throw ConfigError("names file lists " + std::to_string(data.class_names.size()) +
                          " classes, network head expects " +
                          std::to_string(rc.network.head.num_classes));
    Network net = rc.paths.weights.empty() ? Network(rc.network, rc.training.seed)
                                           : load_weights(rc.paths.weights, rc.network);
    TrainResult result = train(net, data, rc.training, rc.augment, rc.paths.out);

    const TrainingState& st = result.state;
    const char* reason = st.stopped_by_loss ? "loss_threshold" : "iteration_budget";
    std::string state_csv = "iteration,last_loss,avg_loss,current_lr,backoffs,stop_reason\n";
    state_csv += std::to_string(st.iteration) + "," + fmt6(st.last_loss) + "," +
                 fmt6(st.avg_loss) + "," + fmt_g(st.current_lr) + "," +
                 std::to_string(st.backoffs) + "," + reason + "\n";
    std::ofstream sf(fs::path(rc.paths.out) / "state.csv", std::ios::binary);
    sf << state_csv;
    std::cout << state_csv;
    return 0;
}

struct EvalOpts {
    std::string config, weights, manifest, names, report;
    float floor = kEvalFloorThreshold;
};

Dataset load_named_dataset(const std::string& manifest, std::string names) {
    if (names.empty()) names = default_names_path(manifest);
    return load_dataset(load_manifest(manifest, names));
}

int run_eval(const EvalOpts& o, int threads, const std::string& run_log) {
    RunConfig rc = load_run_config(o.config);
    if (!rc.has_network) throw ConfigError("config '" + o.config + "' holds no network sections");
    rc.paths.manifest = o.manifest;
    rc.paths.weights = o.weights;
    rc.paths.report = o.report;
    std::string log = run_log.empty() ? (fs::path(o.report) / "run.log").string() : run_log;
    fs::create_directories(o.report);
    emit_run_log("eval", threads, rc, log);

    Dataset data = load_named_dataset(o.manifest, o.names);
    Network net = load_weights(o.weights, rc.network);
    EvalReport report = evaluate(net, data, rc.network.head, o.floor);
    write_eval_report(report, data.class_names, o.report);
    std::cout << ap_summary_csv(report, data.class_names);
    std::cout << "recommended_threshold," << fmt6(report.recommended_threshold) << "\n";
    return 0;
}

struct SelectOpts {
    std::string config, checkpoints, manifest, names;
};

int run_select(const SelectOpts& o, int threads, const std::string& run_log) {
    RunConfig rc = load_run_config(o.config);
    if (!rc.has_network) throw ConfigError("config '" + o.config + "' holds no network sections");
    rc.paths.checkpoints = o.checkpoints;
    rc.paths.manifest = o.manifest;
    emit_run_log("select", threads, rc, run_log);

    std::vector<CheckpointRecord> records;
    for (const auto& entry : fs::directory_iterator(o.checkpoints)) {
        const std::string name = entry.path().filename().string();
        if (name.size() <= 10 || name.rfind("model_", 0) != 0 ||
            name.substr(name.size() - 4) != ".ylw")
            continue;
        const std::string digits = name.substr(6, name.size() - 10);
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            continue;
        records.push_back({std::stoi(digits), entry.path().string(), -1.0});
    }
    if (records.empty()) throw DataError("no model_<iteration>.ylw files in '" + o.checkpoints + "'");
    std::sort(records.begin(), records.end(),
              [](const CheckpointRecord& a, const CheckpointRecord& b) {
                  return a.iteration < b.iteration;
              });

    Dataset data = load_named_dataset(o.manifest, o.names);
    std::cout << "iteration,ap,path\n";
    for (CheckpointRecord& r : records) {
        Network net = load_weights(r.weights_path, rc.network);
        EvalReport report = evaluate(net, data, rc.network.head);
        r.validation_ap = report.combined.ap;
        std::cout << r.iteration << "," << fmt6(r.validation_ap) << "," << r.weights_path << "\n";
    }
    const CheckpointRecord& best = select_best_checkpoint(records);
    std::cout << "selected," << fmt6(best.validation_ap) << "," << best.weights_path << "\n";
    return 0;
}

struct DetectOpts {
    std::string config, weights, image;
    float threshold = 0.25f;
};

int run_detect(const DetectOpts& o, int threads, const std::string& run_log) {
    RunConfig rc = load_run_config(o.config);
    if (!rc.has_network) throw ConfigError("config '" + o.config + "' holds no network sections");
    rc.paths.weights = o.weights;
    rc.paths.image = o.image;
    emit_run_log("detect", threads, rc, run_log);

    Network net = load_weights(o.weights, rc.network);
    Tensor image = read_png(o.image);
    for (const Detection& d : forward_detect(net, image, rc.network.head, o.threshold))
        std::cout << d.class_id << "," << fmt6(d.probability) << "," << fmt6(d.cx) << ","
                  << fmt6(d.cy) << "," << fmt6(d.w) << "," << fmt6(d.h) << "\n";
    return 0;
}

struct GapOpts {
    std::string config, weights, known, unknown, names, report;
};

int run_gap(const GapOpts& o, int threads, const std::string& run_log) {
    RunConfig rc = load_run_config(o.config);
    if (!rc.has_network) throw ConfigError("config '" + o.config + "' holds no network sections");
    rc.paths.weights = o.weights;
    rc.paths.known = o.known;
    rc.paths.unknown = o.unknown;
    rc.paths.report = o.report;
    std::string log = run_log.empty() ? (fs::path(o.report) / "run.log").string() : run_log;
    fs::create_directories(o.report);
    emit_run_log("gap", threads, rc, log);

    Dataset known = load_named_dataset(o.known, o.names);
    Network net = load_weights(o.weights, rc.network);

    std::vector<std::pair<int, double>> known_tp;
    for (const AnnotatedImage& sample : known.samples) {
        std::vector<Detection> dets =
            forward_detect(net, sample.pixels, rc.network.head, kEvalFloorThreshold);
        std::vector<char> labels = match_detections(dets, sample.boxes);
        for (std::size_t i = 0; i < dets.size(); ++i)
            if (labels[i]) known_tp.emplace_back(dets[i].class_id, dets[i].probability);
    }
    std::vector<double> unknown_probs;
    for (const std::string& path : manifest_image_paths(o.unknown)) {
        AnnotatedImage sample = load_sample(path);
        for (const Detection& d :
             forward_detect(net, sample.pixels, rc.network.head, kEvalFloorThreshold))
            unknown_probs.push_back(d.probability);
    }

    GapAnalysis gap = probability_gap_analysis(known_tp, unknown_probs);
    write_gap_report(gap, known.class_names, o.report);
    std::cout << gap_summary_csv(gap);
    if (gap.overlap)
        std::cerr << "warning: probability populations overlap; no usable threshold\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-pass detector toolkit"};
    app.require_subcommand(1);
    int threads = 1;
    std::string run_log;
    app.add_option("--threads", threads, "worker threads (1 = bit-reproducible)")
        ->check(CLI::PositiveNumber);
    app.add_option("--run-log", run_log, "write the effective-config log to this file");

    int rc_out = 0;

    SynthOpts synth_o;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--out", synth_o.out, "output directory")->required();
    synth->add_option("--classes", synth_o.spec.classes)->check(CLI::PositiveNumber);
    synth->add_option("--train-per-class", synth_o.spec.train_per_class)
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--val-per-class", synth_o.spec.val_per_class)
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--hard-negatives", synth_o.spec.hard_negative_train)
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--distractors", synth_o.spec.unknown_scenes,
                      "distractor-only scenes for gap analysis")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--distractors-per-scene", synth_o.spec.distractors_per_negative)
        ->check(CLI::PositiveNumber);
    synth->add_option("--canvas", synth_o.spec.canvas)->check(CLI::PositiveNumber);
    synth->add_option("--max-boxes", synth_o.spec.max_boxes_per_scene)->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_o.spec.seed);
    synth->callback([&] { rc_out = run_synth(synth_o, threads, run_log); });

    AnchorsOpts anchors_o;
    auto* anchors = app.add_subcommand("anchors", "estimate anchor shapes from a manifest");
    anchors->add_option("--manifest", anchors_o.manifest)->required();
    anchors->add_option("--k", anchors_o.k)->check(CLI::PositiveNumber);
    anchors->add_option("--grid", anchors_o.grid, "grid size the anchors are scaled to")
        ->check(CLI::PositiveNumber);
    anchors->add_option("--seed", anchors_o.seed);
    anchors->callback([&] { rc_out = run_anchors(anchors_o, threads, run_log); });

    SurgeryOpts surgery_o;
    auto* surgery = app.add_subcommand("surgery", "re-head pretrained weights for new classes");
    surgery->add_option("--weights", surgery_o.weights)->required();
    surgery->add_option("--config", surgery_o.config, "source network config")->required();
    surgery->add_option("--classes", surgery_o.classes)->required()->check(CLI::PositiveNumber);
    surgery->add_option("--anchors", surgery_o.anchors,
                        "anchor count (reuses source anchors) or explicit w,h pairs")
        ->required();
    surgery->add_option("--out", surgery_o.out)->required();
    surgery->add_option("--out-config", surgery_o.out_config,
                        "target config path (default: --out with .cfg)");
    surgery->add_option("--seed", surgery_o.seed);
    surgery->callback([&] { rc_out = run_surgery(surgery_o, threads, run_log); });

    TrainOpts train_o;
    auto* train_cmd = app.add_subcommand("train", "train a detector");
    train_cmd->add_option("--config", train_o.config)->required();
    train_cmd->add_option("--manifest", train_o.manifest);
    train_cmd->add_option("--names", train_o.names);
    train_cmd->add_option("--out", train_o.out);
    train_cmd->add_option("--weights", train_o.weights, "initial weights");
    train_o.seed_opt = train_cmd->add_option("--seed", train_o.seed);
    train_o.batch_opt = train_cmd->add_option("--batch-size", train_o.batch_size)
                            ->check(CLI::PositiveNumber);
    train_o.iters_opt = train_cmd->add_option("--max-iterations", train_o.max_iterations)
                            ->check(CLI::NonNegativeNumber);
    train_o.lr_opt = train_cmd->add_option("--learning-rate", train_o.learning_rate);
    train_o.cap_opt = train_cmd->add_option("--hard-negative-cap", train_o.hard_negative_cap);
    train_o.spike_iter_opt =
        train_cmd->add_option("--lr-spike-iteration", train_o.lr_spike_iteration);
    train_o.spike_factor_opt = train_cmd->add_option("--lr-spike-factor", train_o.lr_spike_factor);
    train_o.multiscale_opt = train_cmd->add_flag("--multiscale,!--no-multiscale",
                                                 train_o.multiscale, "multi-scale input resizing");
    train_cmd->callback([&] { rc_out = run_train(train_o, threads, run_log); });

    EvalOpts eval_o;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate weights on a manifest");
    eval_cmd->add_option("--config", eval_o.config)->required();
    eval_cmd->add_option("--weights", eval_o.weights)->required();
    eval_cmd->add_option("--manifest", eval_o.manifest)->required();
    eval_cmd->add_option("--names", eval_o.names);
    eval_cmd->add_option("--report", eval_o.report)->required();
    eval_cmd->add_option("--floor-threshold", eval_o.floor);
    eval_cmd->callback([&] { rc_out = run_eval(eval_o, threads, run_log); });

    SelectOpts select_o;
    auto* select_cmd = app.add_subcommand("select", "pick the best checkpoint by validation AP");
    select_cmd->add_option("--config", select_o.config)->required();
    select_cmd->add_option("--checkpoints", select_o.checkpoints)->required();
    select_cmd->add_option("--manifest", select_o.manifest)->required();
    select_cmd->add_option("--names", select_o.names);
    select_cmd->callback([&] { rc_out = run_select(select_o, threads, run_log); });

    DetectOpts detect_o;
    auto* detect_cmd = app.add_subcommand("detect", "run detection on one image");
    detect_cmd->add_option("--config", detect_o.config)->required();
    detect_cmd->add_option("--weights", detect_o.weights)->required();
    detect_cmd->add_option("--image", detect_o.image)->required();
    detect_cmd->add_option("--prob-threshold", detect_o.threshold);
    detect_cmd->callback([&] { rc_out = run_detect(detect_o, threads, run_log); });

    GapOpts gap_o;
    auto* gap_cmd = app.add_subcommand("gap", "probability-gap analysis known vs unknown");
    gap_cmd->add_option("--config", gap_o.config)->required();
    gap_cmd->add_option("--weights", gap_o.weights)->required();
    gap_cmd->add_option("--known", gap_o.known, "manifest of annotated known-class images")
        ->required();
    gap_cmd->add_option("--unknown", gap_o.unknown, "manifest of unknown/distractor images")
        ->required();
    gap_cmd->add_option("--names", gap_o.names);
    gap_cmd->add_option("--report", gap_o.report)->required();
    gap_cmd->callback([&] { rc_out = run_gap(gap_o, threads, run_log); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc_out;
}
