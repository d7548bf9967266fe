// Command-line entry point: preprocess, synthesize, train, evaluate,
// predict, brief and ablate subcommands over the aisllm library.
//
// Exit codes: 0 success, 2 usage/input error, 3 numeric failure.

#include "aisllm/briefing.hpp"
#include "aisllm/config.hpp"
#include "aisllm/runner.hpp"
#include "aisllm/checkpoint.hpp"
#include "aisllm/metrics.hpp"
#include "aisllm/model.hpp"
#include "aisllm/pipeline.hpp"
#include "aisllm/synth.hpp"
#include "aisllm/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aisllm;

namespace {

std::uint64_t seed_from_env_or(std::uint64_t fallback) {
    const char* env = std::getenv("AISLLM_SEED");
    if (env == nullptr || *env == '\0') return fallback;
    return std::strtoull(env, nullptr, 10);
}

json eval_report_json(const EvalReport& r) {
    return json{{"ade_nm", r.ade_nm},
                {"fde_nm", r.fde_nm},
                {"mse", r.mse},
                {"mae", r.mae},
                {"baseline_ade_nm", r.baseline_ade_nm},
                {"baseline_fde_nm", r.baseline_fde_nm},
                {"anomaly",
                 {{"precision", r.anomaly.precision},
                  {"recall", r.anomaly.recall},
                  {"f1", r.anomaly.f1},
                  {"tp", r.anomaly.tp},
                  {"fp", r.anomaly.fp},
                  {"fn", r.anomaly.fn},
                  {"tn", r.anomaly.tn},
                  {"zero_division", r.anomaly.zero_division}}},
                {"cri_mae", r.cri_mae},
                {"cri_rmse", r.cri_rmse},
                {"expl_ce", r.expl_ce},
                {"bleu4", r.bleu4_avg},
                {"rouge_l", r.rouge_l_avg},
                {"bertscore", "n/a"},
                {"text_samples", r.text_samples},
                {"windows", r.windows}};
}

int dispatch_training(const DatasetDir& data, const Config& cfg, std::uint64_t seed,
                      const std::string& out_dir) {
    const TrainSummary s = train_into_dir(data, cfg, seed, out_dir);
    std::cout << "trained " << s.epochs_run << " epochs, best val " << s.best_val
              << " at epoch " << s.best_epoch << "\n"
              << "checkpoint: " << s.checkpoint_path << "\n";
    return 0;
}

struct PredictOutputs {
    std::vector<GeoPoint> history, truth, prediction;
    TaskOutputs outputs;
    ForwardResultT<double> fwd;
    LabeledWindow lw;
};

PredictOutputs run_predict(const Model& model, const DatasetDir& data, std::size_t window_idx) {
    if (window_idx >= data.ds.windows.size())
        throw std::invalid_argument("window index " + std::to_string(window_idx) +
                                    " out of range (dataset has " +
                                    std::to_string(data.ds.windows.size()) + ")");
    const ModelConfig& mc = model.config();
    PredictOutputs out;
    out.lw = data.ds.windows[window_idx];
    const std::vector<std::uint32_t> one{static_cast<std::uint32_t>(window_idx)};
    const auto samples = prepare_samples<double>(data.ds.windows, one, data.ds.stats, mc);
    Graph g;
    g.recording = false;
    out.fwd = model.forward(g, samples[0].input, samples[0].enc_prompt, false, 0);

    out.history = window_positions(out.lw.window, 0, mc.seq_in);
    out.truth = window_positions(out.lw.window, mc.seq_in, mc.pred_len);
    for (std::size_t r = 0; r < mc.pred_len; ++r) {
        const double lat = std::clamp(
            invert_minmax_value(out.fwd.traj.at(r, 0), data.ds.stats, 0), -90.0, 90.0);
        const double lon = std::clamp(
            invert_minmax_value(out.fwd.traj.at(r, 1), data.ds.stats, 1), -180.0, 180.0);
        out.prediction.emplace_back(lat, lon);
    }
    const std::size_t last = mc.pred_len - 1;
    out.outputs.pred_lat = out.prediction.back().lat;
    out.outputs.pred_lon = out.prediction.back().lon;
    out.outputs.pred_sog = invert_minmax_value(out.fwd.traj.at(last, 2), data.ds.stats, 2);
    out.outputs.pred_cog = invert_minmax_value(out.fwd.traj.at(last, 3), data.ds.stats, 3);
    out.outputs.anomalous = out.fwd.anomaly[1] > out.fwd.anomaly[0];
    out.outputs.cri = out.fwd.cri[0];
    return out;
}

struct AblationVariant {
    const char* name;
    const char* label;
    const char* key;
    const char* value;
};

const AblationVariant kVariants[] = {
    {"no_multiscale", "w/o Multi-scale (Single)", "model.use_multiscale", "false"},
    {"short_scales", "Short-term only ([1, 4])", "model.scales", "1,4"},
    {"long_scales", "Long-term only ([16, 32])", "model.scales", "16,32"},
    {"no_alignment", "w/o Cross-modal", "model.use_alignment", "false"},
    {"concat_fusion", "Simple Concatenation", "model.fusion", "concat"},
    {"add_fusion", "Element-wise Addition", "model.fusion", "add"},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale maritime traffic analysis: preprocessing, synthetic data, "
                 "multi-task forecasting and briefing generation"};
    app.footer(config_help());
    app.require_subcommand(1);

    std::uint64_t seed = seed_from_env_or(42);
    std::size_t threads = 1;
    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("--seed", seed, "deterministic seed (env AISLLM_SEED as fallback)");
    app.add_option("--threads", threads, "worker-count cap");
    app.add_option("--config", config_path, "config file with flat dotted keys");
    app.add_option("--set", overrides, "override a config key, e.g. --set opt.max_epochs=10");

    // global options stay usable after a subcommand name
    app.fallthrough();

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "CSV -> filtered/resampled window shards");
    std::string pre_csv, pre_schema = "piraeus", pre_out, pre_coast;
    pre->add_option("--csv", pre_csv, "input AIS CSV")->required();
    pre->add_option("--schema", pre_schema, "column schema: piraeus|dma");
    pre->add_option("--out", pre_out, "output dataset directory")->required();
    pre->add_option("--coastline", pre_coast, "optional 'lon lat' polyline file");

    // synthesize
    auto* syn = app.add_subcommand("synthesize", "generate labeled synthetic traffic");
    std::string syn_out;
    std::size_t syn_segments = 200;
    double syn_ratio = 0.3;
    std::vector<double> syn_region;
    syn->add_option("--out", syn_out, "output dataset directory")->required();
    syn->add_option("--segments", syn_segments, "number of voyage segments");
    syn->add_option("--anomaly-ratio", syn_ratio, "fraction of windows injected");
    syn->add_option("--region", syn_region, "lat_min lon_min lat_max lon_max")->expected(4);

    // train
    auto* tr = app.add_subcommand("train", "train the multi-task model on a dataset directory");
    std::string tr_data, tr_out;
    tr->add_option("--data", tr_data, "dataset directory")->required();
    tr->add_option("--out", tr_out, "output directory")->required();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "metrics report for a checkpoint");
    std::string ev_data, ev_ckpt, ev_out;
    std::size_t ev_text_limit = 16;
    ev->add_option("--data", ev_data, "dataset directory")->required();
    ev->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
    ev->add_option("--out", ev_out, "write the JSON report here (stdout otherwise)");
    ev->add_option("--text-samples", ev_text_limit, "briefing-generation sample cap");

    // predict
    auto* pr = app.add_subcommand("predict", "trajectory/anomaly/risk outputs for one window");
    std::string pr_data, pr_ckpt, pr_out;
    std::size_t pr_window = 0;
    pr->add_option("--data", pr_data, "dataset directory")->required();
    pr->add_option("--checkpoint", pr_ckpt, "model checkpoint")->required();
    pr->add_option("--window", pr_window, "window index")->required();
    pr->add_option("--out", pr_out, "GeoJSON output path (stdout otherwise)");

    // brief
    auto* br = app.add_subcommand("brief", "generated briefing for one window");
    std::string br_data, br_ckpt;
    std::size_t br_window = 0;
    br->add_option("--data", br_data, "dataset directory")->required();
    br->add_option("--checkpoint", br_ckpt, "model checkpoint")->required();
    br->add_option("--window", br_window, "window index")->required();

    // ablate
    auto* ab = app.add_subcommand("ablate", "train an architecture variant and log its row");
    std::string ab_data, ab_out, ab_variant;
    ab->add_option("--data", ab_data, "dataset directory")->required();
    ab->add_option("--out", ab_out, "output directory")->required();
    ab->add_option("--variant", ab_variant, "variant name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Config cfg;
        if (!config_path.empty()) cfg.load_file(config_path);
        for (const std::string& kv : overrides) cfg.set_kv(kv);
        if (threads < 1) threads = 1; // all pipelines are deterministic at any cap

        if (*pre) {
            std::ifstream csv(pre_csv, std::ios::binary);
            if (!csv) throw IoError("cannot open csv: " + pre_csv);
            std::vector<Polyline> coast;
            if (!pre_coast.empty()) {
                std::ifstream cf(pre_coast);
                if (!cf) throw IoError("cannot open coastline: " + pre_coast);
                coast = load_coastline(cf);
            }
            const PipelineProfile profile =
                pre_schema == "dma" ? PipelineProfile::dma() : PipelineProfile::piraeus();
            PipelineOutput out =
                run_pipeline(csv, profile, builtin_column_map(pre_schema), seed,
                             coast.empty() ? nullptr : &coast);

            LabeledDataset ds;
            const CriWeights weights = cri_weights_from(cfg);
            for (Window& w : out.windows) {
                LabeledWindow lw;
                lw.window = std::move(w);
                lw.cri_target = label_cri(lw.window, out.segments, weights,
                                          profile.resample_interval_min);
                lw.explanation = generate_target_explanation(lw);
                ds.windows.push_back(std::move(lw));
            }
            ds.train_idx = out.manifest.train_windows;
            ds.val_idx = out.manifest.val_windows;
            ds.stats = out.manifest.stats;
            fs::create_directories(pre_out);
            write_dataset_dir(pre_out, ds, out.manifest);
            std::cout << "parsed " << out.manifest.n_records_parsed << " records ("
                      << out.manifest.n_records_skipped << " malformed skipped)\n"
                      << "filtered " << out.manifest.n_records_filtered << " records\n"
                      << "segments " << out.manifest.n_segments << " (train "
                      << out.manifest.n_train_segments << ", val " << out.manifest.n_val_segments
                      << ")\n"
                      << "windows " << out.manifest.n_windows << " (train "
                      << out.manifest.train_windows.size() << ", val "
                      << out.manifest.val_windows.size() << ")\n"
                      << "manifest: " << pre_out << "/manifest.json\n";
            return 0;
        }

        if (*syn) {
            Region region;
            if (!syn_region.empty()) {
                region.lat_min = syn_region[0];
                region.lon_min = syn_region[1];
                region.lat_max = syn_region[2];
                region.lon_max = syn_region[3];
            }
            const SyntheticTraffic traffic = generate_synthetic_traffic(seed, syn_segments, region);
            const LabeledDataset ds = build_labeled_dataset(traffic, syn_ratio, seed,
                                                            PipelineProfile::piraeus(),
                                                            cri_weights_from(cfg));
            DatasetManifest manifest;
            manifest.profile = PipelineProfile::piraeus();
            manifest.split_seed = seed;
            const std::string descriptor = "synthetic:" + std::to_string(seed) + ":" +
                                           std::to_string(syn_segments) + ":" +
                                           std::to_string(syn_ratio);
            manifest.source_hash = fnv1a64(descriptor.data(), descriptor.size());
            manifest.n_segments = traffic.segments.size();
            manifest.n_train_segments = traffic.segments.size() - traffic.segments.size() / 5;
            manifest.n_val_segments = traffic.segments.size() / 5;
            fs::create_directories(syn_out);
            write_dataset_dir(syn_out, ds, manifest);
            std::size_t anomalous = 0;
            for (const LabeledWindow& lw : ds.windows) anomalous += lw.label;
            std::cout << "segments " << traffic.segments.size() << ", windows "
                      << ds.windows.size() << " (" << anomalous << " anomalous, train "
                      << ds.train_idx.size() << ", val " << ds.val_idx.size() << ")\n"
                      << "dataset: " << syn_out << "\n";
            return 0;
        }

        if (*tr) {
            const DatasetDir data = read_dataset_dir(tr_data);
            return dispatch_training(data, cfg, seed, tr_out);
        }

        if (*ev) {
            const DatasetDir data = read_dataset_dir(ev_data);
            const Model model = Model::load(ev_ckpt);
            const EvalReport rep = evaluate_model(model, data.ds.windows, data.ds.val_idx,
                                                  data.ds.stats, ev_text_limit);
            json j = eval_report_json(rep);
            j["dataset_shard_hash"] = data.manifest.shard_hash;
            j["config"] = json::parse(model.config().to_json());
            const std::string text = j.dump(2);
            if (ev_out.empty()) {
                std::cout << text << "\n";
            } else {
                std::ofstream(ev_out) << text << "\n";
                std::cout << "report: " << ev_out << "\n";
            }
            return 0;
        }

        if (*pr) {
            const DatasetDir data = read_dataset_dir(pr_data);
            const Model model = Model::load(pr_ckpt);
            const PredictOutputs out = run_predict(model, data, pr_window);
            const std::string geo = tracks_to_geojson(out.history, out.truth, out.prediction);
            json numbers{{"window", pr_window},
                         {"mmsi", out.lw.window.mmsi},
                         {"anomaly_probability", out.fwd.anomaly[1]},
                         {"anomaly_label", out.lw.label},
                         {"cri", out.outputs.cri},
                         {"cri_target", out.lw.cri_target},
                         {"pred_final",
                          {{"lat", out.outputs.pred_lat},
                           {"lon", out.outputs.pred_lon},
                           {"sog", out.outputs.pred_sog},
                           {"cog", out.outputs.pred_cog}}}};
            if (pr_out.empty()) {
                std::cout << geo << "\n" << numbers.dump(2) << "\n";
            } else {
                std::ofstream(pr_out) << geo << "\n";
                std::cout << numbers.dump(2) << "\n"
                          << "geojson: " << pr_out << "\n";
            }
            return 0;
        }

        if (*br) {
            const DatasetDir data = read_dataset_dir(br_data);
            const Model model = Model::load(br_ckpt);
            const PredictOutputs out = run_predict(model, data, br_window);
            const std::vector<int> prompt =
                tokenize_bytes(build_prompt(out.lw.window, out.outputs));
            const std::vector<int> generated =
                model.lm_generate(prompt, out.fwd.pooled, out.lw.explanation.size() + 64);
            const SituationSummary summary = summarize(out.lw, out.outputs, 0.2);
            std::cout << "generated briefing:\n  " << detokenize_bytes(generated) << "\n"
                      << "rule-based reference:\n  " << out.lw.explanation << "\n"
                      << "situation briefing:\n  " << render_briefing(summary) << "\n";
            return 0;
        }

        if (*ab) {
            const AblationVariant* variant = nullptr;
            for (const AblationVariant& v : kVariants)
                if (ab_variant == v.name) variant = &v;
            if (variant == nullptr) {
                std::string names;
                for (const AblationVariant& v : kVariants) names += std::string(" ") + v.name;
                std::cerr << "unknown variant '" << ab_variant << "'; valid:" << names << "\n";
                return 2;
            }
            cfg.set(variant->key, variant->value);
            const DatasetDir data = read_dataset_dir(ab_data);
            const std::string run_dir = ab_out + "/" + variant->name;
            const int rc = dispatch_training(data, cfg, seed, run_dir);
            if (rc != 0) return rc;
            const Model model = Model::load(run_dir + "/checkpoint.ailm");
            const EvalReport rep =
                evaluate_model(model, data.ds.windows, data.ds.val_idx, data.ds.stats, 0);
            const std::string report_path = ab_out + "/ablation_report.csv";
            const bool fresh = !fs::exists(report_path);
            std::ofstream row(report_path, std::ios::app);
            if (fresh) row << "label,variant,val_mse,val_mae,val_ade_nm,val_fde_nm\n";
            row << '"' << variant->label << "\"," << variant->name << "," << rep.mse << ","
                << rep.mae << "," << rep.ade_nm << "," << rep.fde_nm << "\n";
            std::cout << "variant '" << variant->label << "': val MSE " << rep.mse << ", MAE "
                      << rep.mae << "\n"
                      << "report row appended: " << report_path << "\n";
            return 0;
        }
    } catch (const NonFiniteLoss& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const NonFiniteGradient& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
