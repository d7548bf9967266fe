// Python bindings over the main library operations: geodesy/CPA/CRI,
// text and trajectory metrics, synthetic data, preprocessing, training
// and checkpoint evaluation.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "aisllm/briefing.hpp"
#include "aisllm/config.hpp"
#include "aisllm/metrics.hpp"
#include "aisllm/model.hpp"
#include "aisllm/pipeline.hpp"
#include "aisllm/runner.hpp"
#include "aisllm/synth.hpp"
#include "aisllm/train.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace aisllm;

namespace {

KinematicState state_of(double lat, double lon, double sog, double cog) {
    return KinematicState(GeoPoint(lat, lon), sog, cog);
}

Config config_from_overrides(const std::map<std::string, std::string>& overrides) {
    Config cfg;
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    return cfg;
}

py::dict eval_to_dict(const EvalReport& r) {
    py::dict d;
    d["ade_nm"] = r.ade_nm;
    d["fde_nm"] = r.fde_nm;
    d["mse"] = r.mse;
    d["mae"] = r.mae;
    d["baseline_ade_nm"] = r.baseline_ade_nm;
    d["baseline_fde_nm"] = r.baseline_fde_nm;
    d["precision"] = r.anomaly.precision;
    d["recall"] = r.anomaly.recall;
    d["f1"] = r.anomaly.f1;
    d["cri_mae"] = r.cri_mae;
    d["cri_rmse"] = r.cri_rmse;
    d["expl_ce"] = r.expl_ce;
    d["bleu4"] = r.bleu4_avg;
    d["rouge_l"] = r.rouge_l_avg;
    d["windows"] = r.windows;
    return d;
}

} // namespace

PYBIND11_MODULE(_aisllm, m) {
    m.doc() = "Maritime AIS analysis: kinematics, preprocessing, multi-task forecasting";

    // --- geodesy & encounter kinematics ---
    m.def(
        "haversine_nm",
        [](double lat1, double lon1, double lat2, double lon2) {
            return haversine_nm(GeoPoint(lat1, lon1), GeoPoint(lat2, lon2));
        },
        py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"),
        "Great-circle distance in nautical miles");
    m.def(
        "initial_bearing",
        [](double lat1, double lon1, double lat2, double lon2) {
            return initial_bearing(GeoPoint(lat1, lon1), GeoPoint(lat2, lon2));
        },
        py::arg("lat1"), py::arg("lon1"), py::arg("lat2"), py::arg("lon2"));
    m.def(
        "dcpa_tcpa",
        [](double lat1, double lon1, double sog1, double cog1, double lat2, double lon2,
           double sog2, double cog2) {
            const CpaResult r = dcpa_tcpa(
                encounter_geometry(state_of(lat1, lon1, sog1, cog1),
                                   state_of(lat2, lon2, sog2, cog2)));
            return py::make_tuple(r.dcpa_nm, r.tcpa_min);
        },
        "Analytic (DCPA NM, TCPA minutes) for an own/target state pair");
    m.def(
        "cri",
        [](double lat1, double lon1, double sog1, double cog1, double lat2, double lon2,
           double sog2, double cog2) {
            return cri(encounter_geometry(state_of(lat1, lon1, sog1, cog1),
                                          state_of(lat2, lon2, sog2, cog2)),
                       CriWeights{});
        },
        "Collision risk index in [0, 1] with the default weight table");

    // --- metrics ---
    m.def("bleu4", &bleu4, py::arg("candidate"), py::arg("reference"), py::arg("smooth") = true);
    m.def("rouge_l", &rouge_l, py::arg("candidate"), py::arg("reference"), py::arg("beta") = 1.2);
    m.def(
        "prf1",
        [](const std::vector<int>& pred, const std::vector<int>& truth) {
            const ClassificationMetrics c = prf1(pred, truth);
            py::dict d;
            d["precision"] = c.precision;
            d["recall"] = c.recall;
            d["f1"] = c.f1;
            d["tp"] = c.tp;
            d["fp"] = c.fp;
            d["fn"] = c.fn;
            d["tn"] = c.tn;
            return d;
        });
    m.def(
        "ade_fde",
        [](const std::vector<std::pair<double, double>>& pred,
           const std::vector<std::pair<double, double>>& truth) {
            std::vector<GeoPoint> p, t;
            for (const auto& [lat, lon] : pred) p.emplace_back(lat, lon);
            for (const auto& [lat, lon] : truth) t.emplace_back(lat, lon);
            const auto [ade, fde] = ade_fde(p, t);
            return py::make_tuple(ade, fde);
        },
        "ADE/FDE in NM from (lat, lon) sequences");
    m.def(
        "lr_schedule",
        [](std::size_t epoch) { return lr_at(epoch, OptimizerConfig{}); },
        "Cosine-annealing learning rate at an epoch (default optimizer config)");

    // --- datasets ---
    m.def(
        "synthesize_dataset",
        [](const std::string& out_dir, std::uint64_t seed, std::size_t segments, double ratio) {
            const SyntheticTraffic traffic = generate_synthetic_traffic(seed, segments);
            const LabeledDataset ds =
                build_labeled_dataset(traffic, ratio, seed, PipelineProfile::piraeus());
            DatasetManifest manifest;
            manifest.profile = PipelineProfile::piraeus();
            manifest.split_seed = seed;
            manifest.n_segments = traffic.segments.size();
            std::filesystem::create_directories(out_dir);
            write_dataset_dir(out_dir, ds, manifest);
            std::size_t anomalous = 0;
            for (const LabeledWindow& lw : ds.windows) anomalous += lw.label;
            py::dict d;
            d["segments"] = traffic.segments.size();
            d["windows"] = ds.windows.size();
            d["anomalous"] = anomalous;
            d["train_windows"] = ds.train_idx.size();
            d["val_windows"] = ds.val_idx.size();
            return d;
        },
        py::arg("out_dir"), py::arg("seed") = 42, py::arg("segments") = 40,
        py::arg("anomaly_ratio") = 0.3);
    m.def(
        "preprocess_csv",
        [](const std::string& csv_text, const std::string& schema) {
            std::istringstream in(csv_text);
            const PipelineProfile profile =
                schema == "dma" ? PipelineProfile::dma() : PipelineProfile::piraeus();
            const PipelineOutput out = run_pipeline(in, profile, builtin_column_map(schema), 42);
            py::dict d;
            d["records_parsed"] = out.manifest.n_records_parsed;
            d["records_skipped"] = out.manifest.n_records_skipped;
            d["records_filtered"] = out.manifest.n_records_filtered;
            d["segments"] = out.manifest.n_segments;
            d["windows"] = out.manifest.n_windows;
            return d;
        },
        py::arg("csv_text"), py::arg("schema") = "piraeus",
        "Run the preprocessing pipeline over CSV text and report stage counts");

    // --- training / evaluation ---
    m.def(
        "train_model",
        [](const std::string& data_dir, const std::string& out_dir, std::uint64_t seed,
           const std::map<std::string, std::string>& overrides) {
            const DatasetDir data = read_dataset_dir(data_dir);
            const Config cfg = config_from_overrides(overrides);
            const TrainSummary s = train_into_dir(data, cfg, seed, out_dir);
            py::dict d;
            d["epochs_run"] = s.epochs_run;
            d["best_epoch"] = s.best_epoch;
            d["best_val_total"] = s.best_val;
            d["checkpoint"] = s.checkpoint_path;
            return d;
        },
        py::arg("data_dir"), py::arg("out_dir"), py::arg("seed") = 42,
        py::arg("overrides") = std::map<std::string, std::string>{});
    m.def(
        "evaluate_checkpoint",
        [](const std::string& data_dir, const std::string& checkpoint, std::size_t text_samples) {
            const DatasetDir data = read_dataset_dir(data_dir);
            const Model model = Model::load(checkpoint);
            return eval_to_dict(evaluate_model(model, data.ds.windows, data.ds.val_idx,
                                               data.ds.stats, text_samples));
        },
        py::arg("data_dir"), py::arg("checkpoint"), py::arg("text_samples") = 4);
    m.def(
        "predict_window",
        [](const std::string& data_dir, const std::string& checkpoint, std::size_t window) {
            const DatasetDir data = read_dataset_dir(data_dir);
            const Model model = Model::load(checkpoint);
            if (window >= data.ds.windows.size())
                throw std::out_of_range("window index out of range");
            const ModelConfig& mc = model.config();
            const std::vector<std::uint32_t> one{static_cast<std::uint32_t>(window)};
            const auto samples = prepare_samples<double>(data.ds.windows, one, data.ds.stats, mc);
            Graph g;
            g.recording = false;
            const ForwardResultT<double> fwd =
                model.forward(g, samples[0].input, samples[0].enc_prompt, false, 0);
            py::list track;
            for (std::size_t r = 0; r < mc.pred_len; ++r)
                track.append(py::make_tuple(
                    invert_minmax_value(fwd.traj.at(r, 0), data.ds.stats, 0),
                    invert_minmax_value(fwd.traj.at(r, 1), data.ds.stats, 1)));
            py::dict d;
            d["prediction"] = track;
            d["anomaly_probability"] = fwd.anomaly[1];
            d["cri"] = fwd.cri[0];
            d["label"] = data.ds.windows[window].label;
            d["cri_target"] = data.ds.windows[window].cri_target;
            return d;
        },
        py::arg("data_dir"), py::arg("checkpoint"), py::arg("window") = 0);

    m.def("config_help", &config_help, "Every config key with its default value");
}
