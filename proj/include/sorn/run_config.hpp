#pragma once

#include <string>

#include "sorn/synthgen.hpp"
#include "sorn/trainer.hpp"

namespace sorn::config {

/// Flat key-value run configuration covering training, generation, scheme and
/// thresholding. Loadable from JSON with command-line overrides; unknown keys
/// are rejected. Every command dumps its fully-resolved config beside its
/// outputs.
struct RunConfig {
    train::TrainConfig train;
    synth::SynthSpec synth;
    double train_fraction = 0.7;
    bool point_adjust = false;
    bool explicit_segments = false;  // segments came from a config file

    void validate() const;
};

RunConfig load_run_config(const std::string& path, RunConfig base = {});
std::string run_config_json(const RunConfig& cfg);
void write_resolved_config(const std::string& path, const RunConfig& cfg);

}  // namespace sorn::config
