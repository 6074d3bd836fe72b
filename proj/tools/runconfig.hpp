#pragma once

#include <string>

#include "ylt/augment.hpp"
#include "ylt/config.hpp"
#include "ylt/training.hpp"

namespace ylt {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunPaths {
    std::string manifest, names, out, weights, image, known, unknown, checkpoints, report;
};

// Merged view of everything a command may need, loaded from one sectioned
// key=value file: the network sections plus [training], [augmentation], and
// [paths]. Any value can then be overridden by a command-line flag.
struct RunConfig {
    bool has_network = false;
    NetworkConfig network;
    TrainingConfig training;
    AugmentationConfig augment;
    RunPaths paths;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Every effective value, in the same format the parser accepts, so a run can
// be replayed from its log alone.
std::string run_config_echo(const RunConfig& rc);

} // namespace ylt
