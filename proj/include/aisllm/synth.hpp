#pragma once

// Synthetic traffic generation and labeled-anomaly injection. Scenarios are
// staggered in time so only scripted crossing pairs are ever co-temporal,
// and crossings happen near a fixed junction so collision risk stays
// inferable from a single vessel's own track.

#include "aisllm/geo.hpp"
#include "aisllm/pipeline.hpp"

#include <optional>
#include <string>
#include <vector>

namespace aisllm {

struct SpanOutOfBounds : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MagnitudeOutOfBounds : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class AnomalyKind { shift, heading, speed };

std::string anomaly_kind_name(AnomalyKind k);
AnomalyKind anomaly_kind_from_name(const std::string& name);

/// Magnitude bound table; injection rejects magnitudes outside it.
struct AnomalyBounds {
    double shift_min_deg = 0.005;
    double shift_max_deg = 0.02;
    double heading_min_deg = 30.0;
    double heading_max_deg = 90.0;
    double speed_up_min = 1.8;
    double speed_up_max = 2.5;
    double speed_down_min = 0.1;
    double speed_down_max = 0.4;
};

struct AnomalySpec {
    AnomalyKind kind = AnomalyKind::shift;
    std::size_t begin = 1; // must leave an unmodified anchor point before it
    std::size_t len = 8;
    double magnitude = 0.01; // shift: degrees offset; heading: degrees; speed: factor
    std::uint64_t seed = 0;
};

struct LabeledWindow {
    Window window; // physical units
    int label = 0; // 1 iff spec present
    std::optional<AnomalySpec> spec;
    double cri_target = 0.0;
    std::string explanation;
};

struct Region {
    double lat_min = 37.0;
    double lat_max = 38.0;
    double lon_min = 23.0;
    double lon_max = 24.0;

    double center_lat() const { return (lat_min + lat_max) / 2.0; }
    double center_lon() const { return (lon_min + lon_max) / 2.0; }
};

enum class ScenarioKind { straight, turn, crossing };

struct ScenarioInfo {
    ScenarioKind kind = ScenarioKind::straight;
    std::size_t partner = static_cast<std::size_t>(-1); // crossing pair index
};

struct SyntheticTraffic {
    std::vector<VoyageSegment> segments;
    std::vector<ScenarioInfo> info; // parallel to segments
};

/// Deterministic mixture of straight transits, constant-rate turns and
/// two-vessel crossing encounters at 1-minute resolution, each segment
/// at least 42 points and kinematically consistent.
SyntheticTraffic generate_synthetic_traffic(std::uint64_t seed, std::size_t n_segments,
                                            const Region& region = {});

/// Perturb a window according to the spec. Heading and speed anomalies
/// re-integrate positions by dead reckoning from the point before the span
/// so all four variables stay mutually consistent.
LabeledWindow inject_anomaly(const Window& window, const AnomalySpec& spec,
                             const AnomalyBounds& bounds = {}, double dt_min = 1.0);

/// Max collision risk against co-temporal other vessels at the window's
/// last input step; 0 when none lies within 10 NM.
double label_cri(const Window& window, const std::vector<VoyageSegment>& all_segments,
                 const CriWeights& weights = {}, double dt_min = 1.0);

struct LabeledDataset {
    std::vector<LabeledWindow> windows;
    std::vector<std::uint32_t> train_idx;
    std::vector<std::uint32_t> val_idx;
    NormalizationStats stats; // fit on the training windows
};

/// Windows from all segments, a seeded anomaly quota (round(ratio * n)),
/// CRI targets against the full traffic picture and rule-based explanation
/// targets. Pure function of (traffic, ratio, seed).
LabeledDataset build_labeled_dataset(const SyntheticTraffic& traffic, double anomaly_ratio,
                                     std::uint64_t seed, const PipelineProfile& profile,
                                     const CriWeights& weights = {});

// Label sidecar: JSON array of {label, cri, spec|null} parallel to the shard.
void write_labels(const std::string& path, const std::vector<LabeledWindow>& windows);
struct LabelEntry {
    int label = 0;
    double cri = 0.0;
    std::optional<AnomalySpec> spec;
};
std::vector<LabelEntry> read_labels(const std::string& path);

/// Dataset directory layout: windows.aisw + manifest.json + labels.json.
/// The manifest's split indices and stats mirror the LabeledDataset.
void write_dataset_dir(const std::string& dir, const LabeledDataset& ds,
                       DatasetManifest manifest);

struct DatasetDir {
    LabeledDataset ds;
    DatasetManifest manifest;
};

/// Load a dataset directory; explanations are regenerated (they are a pure
/// function of window and labels). Verifies the shard hash.
DatasetDir read_dataset_dir(const std::string& dir);

} // namespace aisllm
