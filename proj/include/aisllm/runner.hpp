#pragma once

// Directory-level run orchestration shared by the CLI and the python
// bindings: train into an output directory, producing metrics.log,
// checkpoint.ailm and train_report.json.

#include "aisllm/config.hpp"
#include "aisllm/synth.hpp"

#include <string>

namespace aisllm {

struct TrainSummary {
    std::size_t epochs_run = 0;
    std::size_t best_epoch = 0;
    double best_val = 0.0;
    bool stopped_early = false;
    std::size_t aborted_steps = 0;
    std::string checkpoint_path;
};

/// Train per the config (train.precision selects float32/float64 math) and
/// write metrics.log, checkpoint.ailm and train_report.json under out_dir.
TrainSummary train_into_dir(const DatasetDir& data, const Config& cfg, std::uint64_t seed,
                            const std::string& out_dir);

} // namespace aisllm
