#include "aisllm/runner.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace aisllm {

namespace {

using nlohmann::json;

template <typename T>
TrainSummary run_training(const DatasetDir& data, const Config& cfg, std::uint64_t seed,
                          const std::string& out_dir) {
    const ModelConfig mc = model_config_from(cfg);
    const FitConfig fc = fit_config_from(cfg, seed);
    ModelT<T> model(mc, seed);
    const auto train = prepare_samples<T>(data.ds.windows, data.ds.train_idx, data.ds.stats, mc);
    const auto val = prepare_samples<T>(data.ds.windows, data.ds.val_idx, data.ds.stats, mc);

    std::filesystem::create_directories(out_dir);
    std::ofstream log(out_dir + "/metrics.log");
    log << "# epoch, lr, train_total, val_total, val_traj, val_anom, val_coll, val_expl\n";
    const FitResult result = fit(model, train, val, fc, &log);
    model.save(out_dir + "/checkpoint.ailm");

    json config_echo;
    for (const auto& [k, v] : cfg.values()) config_echo[k] = v;
    json report{{"best_epoch", result.best_epoch},
                {"best_val_total", result.best_val},
                {"epochs_run", result.log.size()},
                {"stopped_early", result.stopped_early},
                {"aborted_steps", result.aborted_steps},
                {"seed", seed},
                {"precision", cfg.str("train.precision")},
                {"train_windows", train.size()},
                {"val_windows", val.size()},
                {"dataset_shard_hash", data.manifest.shard_hash},
                {"config", config_echo}};
    std::ofstream(out_dir + "/train_report.json") << report.dump(2) << "\n";

    TrainSummary s;
    s.epochs_run = result.log.size();
    s.best_epoch = result.best_epoch;
    s.best_val = result.best_val;
    s.stopped_early = result.stopped_early;
    s.aborted_steps = result.aborted_steps;
    s.checkpoint_path = out_dir + "/checkpoint.ailm";
    return s;
}

} // namespace

TrainSummary train_into_dir(const DatasetDir& data, const Config& cfg, std::uint64_t seed,
                            const std::string& out_dir) {
    const std::string precision = cfg.str("train.precision");
    if (precision == "float64") return run_training<double>(data, cfg, seed, out_dir);
    if (precision == "float32") return run_training<float>(data, cfg, seed, out_dir);
    throw std::invalid_argument("train.precision must be float32 or float64");
}

} // namespace aisllm
