#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ylt/augment.hpp"
#include "ylt/dataset.hpp"
#include "ylt/network.hpp"

namespace ylt {

struct TrainingConfig {
    int batch_size = 64;
    int max_iterations = 30000;
    float learning_rate = 1e-3f;
    float loss_stop_threshold = 0.5f;
    float ema_factor = 0.9f;
    std::vector<int> checkpoint_iterations = {1000, 5000, 10000, 15000, 20000, 25000, 30000};
    float divergence_ratio = 10.0f;
    float lr_backoff_factor = 0.5f;
    int backoff_budget = 3;
    int warmup_iterations = 1000; // stop rule is inactive before this
    float momentum = 0.9f;
    float weight_decay = 5e-4f;
    float hard_negative_cap = 0.25f;
    bool multiscale = true;
    int multiscale_interval = 10;
    std::uint64_t seed = 0;
    // failure-injection hook: multiply the lr by spike_factor from
    // spike_iteration on, until the divergence guard first fires
    int lr_spike_iteration = -1;
    float lr_spike_factor = 1.0f;
};

void validate_training_config(const TrainingConfig& cfg);

struct TrainingState {
    int iteration = 0;
    double last_loss = 0.0;
    double avg_loss = -1.0; // negative until the first accepted batch
    float current_lr = 0.0f;
    int backoffs = 0;
    bool stopped_by_loss = false;
    std::vector<std::array<double, 3>> history; // iteration, loss, avg_loss
};

struct CheckpointRecord {
    int iteration = 0;
    std::string weights_path;
    double validation_ap = -1.0; // negative = not evaluated
};

// avg' = f*avg + (1-f)*loss; a negative avg means uninitialized and yields
// loss itself.
double update_avg_loss(double avg, double loss, double ema_factor = 0.9);

// true iff the average is initialized, below the threshold, and the warm-up
// is over.
bool should_stop(const TrainingState& state, const TrainingConfig& cfg);

// true iff loss is non-finite, or exceeds divergence_ratio * avg_loss once the
// average is initialized.
bool detect_divergence(const TrainingState& state, double loss, const TrainingConfig& cfg);

// The checkpoint immediately before the first strict AP drop; the last one if
// AP never drops. All records must carry a validation AP.
const CheckpointRecord& select_best_checkpoint(const std::vector<CheckpointRecord>& checkpoints);

struct TrainResult {
    TrainingState state;
    std::vector<CheckpointRecord> checkpoints;
};

// Per iteration: compose_batch -> forward -> region loss -> backward -> SGD,
// EMA update, divergence guard (restore last checkpoint, halve lr, abort after
// backoff_budget unrecovered divergences), checkpoints model_<iteration>.ylw
// at the scheduled iterations plus the final one, loss curve in
// out_dir/loss.csv. Throws DivergenceError when the recovery budget is spent.
TrainResult train(Network& net, const Dataset& dataset, const TrainingConfig& cfg,
                  const AugmentationConfig& aug, const std::string& out_dir);

} // namespace ylt
