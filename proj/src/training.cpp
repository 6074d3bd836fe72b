#include "ylt/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ylt/errors.hpp"
#include "ylt/region.hpp"
#include "ylt/rng.hpp"
#include "ylt/weights.hpp"

namespace ylt {

namespace {

std::string fmt_loss(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << text;
}

std::string checkpoint_path(const std::string& out_dir, int iteration) {
    return out_dir + "/model_" + std::to_string(iteration) + ".ylw";
}

} // namespace

void validate_training_config(const TrainingConfig& cfg) {
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
    if (!(cfg.learning_rate > 0.0f)) throw ConfigError("learning_rate must be > 0");
    if (!(cfg.loss_stop_threshold > 0.0f)) throw ConfigError("loss_stop_threshold must be > 0");
    if (!(cfg.ema_factor >= 0.0f && cfg.ema_factor < 1.0f))
        throw ConfigError("ema_factor must be in [0, 1)");
    if (!(cfg.divergence_ratio > 1.0f)) throw ConfigError("divergence_ratio must be > 1");
    if (!(cfg.lr_backoff_factor > 0.0f && cfg.lr_backoff_factor < 1.0f))
        throw ConfigError("lr_backoff_factor must be in (0, 1)");
    if (cfg.backoff_budget < 1) throw ConfigError("backoff_budget must be >= 1");
    if (cfg.warmup_iterations < 0) throw ConfigError("warmup_iterations must be >= 0");
    if (!(cfg.hard_negative_cap >= 0.0f && cfg.hard_negative_cap < 1.0f))
        throw ConfigError("hard_negative_cap must be in [0, 1)");
    if (cfg.multiscale_interval < 1) throw ConfigError("multiscale_interval must be >= 1");
    for (std::size_t i = 0; i < cfg.checkpoint_iterations.size(); ++i) {
        if (cfg.checkpoint_iterations[i] < 1)
            throw ConfigError("checkpoint iterations must be >= 1");
        if (i > 0 && cfg.checkpoint_iterations[i] <= cfg.checkpoint_iterations[i - 1])
            throw ConfigError("checkpoint iterations must be strictly increasing");
    }
    if (cfg.lr_spike_iteration >= 0 && !(cfg.lr_spike_factor > 0.0f))
        throw ConfigError("lr_spike_factor must be > 0");
}

double update_avg_loss(double avg, double loss, double ema_factor) {
    if (avg < 0.0) return loss;
    return ema_factor * avg + (1.0 - ema_factor) * loss;
}

bool should_stop(const TrainingState& state, const TrainingConfig& cfg) {
    return state.avg_loss >= 0.0 && state.avg_loss < cfg.loss_stop_threshold &&
           state.iteration >= cfg.warmup_iterations;
}

bool detect_divergence(const TrainingState& state, double loss, const TrainingConfig& cfg) {
    if (!std::isfinite(loss)) return true;
    return state.avg_loss >= 0.0 && loss > cfg.divergence_ratio * state.avg_loss;
}

const CheckpointRecord& select_best_checkpoint(const std::vector<CheckpointRecord>& checkpoints) {
    if (checkpoints.empty()) throw ConfigError("no checkpoints to select from");
    for (const CheckpointRecord& c : checkpoints)
        if (c.validation_ap < 0.0)
            throw ConfigError("checkpoint " + std::to_string(c.iteration) +
                              " has no validation AP");
    for (std::size_t i = 1; i < checkpoints.size(); ++i)
        if (checkpoints[i].validation_ap < checkpoints[i - 1].validation_ap)
            return checkpoints[i - 1];
    return checkpoints.back();
}

TrainResult train(Network& net, const Dataset& dataset, const TrainingConfig& cfg,
                  const AugmentationConfig& aug, const std::string& out_dir) {
    validate_training_config(cfg);
    if (dataset.samples.empty()) throw ConfigError("dataset is empty");
    std::filesystem::create_directories(out_dir);

    const NetworkConfig& net_cfg = net.config();
    const int stride = net_cfg.total_stride();
    const int base_dim = net_cfg.input_width;
    if (net_cfg.input_width != net_cfg.input_height)
        throw ConfigError("training expects a square input");

    TrainResult result;
    TrainingState& state = result.state;
    state.current_lr = cfg.learning_rate;

    WeightsFile last_good = snapshot_weights(net); // counts as the iteration-0 checkpoint
    double avg_at_backoff = std::numeric_limits<double>::infinity();
    bool spike_active = false;
    int dim = base_dim;
    Rng dim_rng(cfg.seed ^ 0xd1b54a32d192ed03ull);

    std::string csv = "iteration,loss,avg_loss\n";
    auto flush_csv = [&] { write_text_file(out_dir + "/loss.csv", csv); };

    auto save_checkpoint = [&](int iteration) {
        const std::string path = checkpoint_path(out_dir, iteration);
        save_weights(net, path);
        result.checkpoints.push_back({iteration, path, -1.0});
        last_good = snapshot_weights(net);
    };

    for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
        if (iter == cfg.lr_spike_iteration) spike_active = true;
        if (cfg.multiscale && (iter - 1) % cfg.multiscale_interval == 0)
            dim = choose_input_dim(base_dim, aug.scale_jitter, stride, dim_rng);

        std::int64_t first_index = static_cast<std::int64_t>(iter - 1) * cfg.batch_size;
        std::vector<AnnotatedImage> samples =
            compose_batch(dataset, aug, cfg.batch_size, cfg.hard_negative_cap, cfg.seed,
                          first_index);
        Batch batch = stack_batch(samples, dim);

        Tensor out = net.forward(batch.images, Mode::train);
        Tensor d_out(out.shape);
        double loss = region_forward_backward(out, batch.truths, net_cfg.head, &d_out);

        bool rejected = detect_divergence(state, loss, cfg);
        if (!rejected) {
            net.backward(d_out);
            float lr_eff = state.current_lr * (spike_active ? cfg.lr_spike_factor : 1.0f);
            rejected = !sgd_momentum_step(net.trainable_parameters(), lr_eff, cfg.momentum,
                                          cfg.weight_decay);
        }

        if (rejected) {
            ++state.backoffs;
            restore_weights(net, last_good);
            net.reset_momentum();
            net.zero_gradients();
            spike_active = false; // the guard firing ends any transient override
            if (state.backoffs >= cfg.backoff_budget) {
                flush_csv();
                throw DivergenceError("training diverged at iteration " + std::to_string(iter) +
                                      " (loss " + fmt_loss(loss) + ", avg " +
                                      fmt_loss(state.avg_loss) + "); recovery budget of " +
                                      std::to_string(cfg.backoff_budget) + " backoffs spent");
            }
            state.current_lr *= cfg.lr_backoff_factor;
            avg_at_backoff = state.avg_loss;
        } else {
            state.avg_loss = update_avg_loss(state.avg_loss, loss, cfg.ema_factor);
            state.last_loss = loss;
            state.history.push_back({static_cast<double>(iter), loss, state.avg_loss});
            csv += std::to_string(iter) + "," + fmt_loss(loss) + "," + fmt_loss(state.avg_loss) +
                   "\n";
            if (state.backoffs > 0 && state.avg_loss < avg_at_backoff) state.backoffs = 0;
        }

        state.iteration = iter;
        if (std::binary_search(cfg.checkpoint_iterations.begin(), cfg.checkpoint_iterations.end(),
                               iter))
            save_checkpoint(iter);
        if (should_stop(state, cfg)) {
            state.stopped_by_loss = true;
            break;
        }
    }

    if (state.iteration > 0 &&
        (result.checkpoints.empty() || result.checkpoints.back().iteration != state.iteration))
        save_checkpoint(state.iteration);
    flush_csv();
    return result;
}

} // namespace ylt
