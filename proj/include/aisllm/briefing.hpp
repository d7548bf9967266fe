#pragma once

// Rule-based natural-language targets and situation briefings. All numeric
// slots render at fixed width/precision so the byte-level decoder sees
// stable offsets it can learn to copy from the prompt.

#include "aisllm/pipeline.hpp"
#include "aisllm/synth.hpp"

#include <string>

namespace aisllm {

struct MissingSlot : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fixed-width field formats shared by prompts, explanations and briefings:
/// lat/lon %08.4f, speed %04.1f, course %05.1f, cri %.2f, mmsi %09d.
std::string fmt_lat(double v);
std::string fmt_lon(double v);
std::string fmt_sog(double v);
std::string fmt_cog(double v);
std::string fmt_cri(double v);
std::string fmt_mmsi(std::int64_t v);

/// low < 0.33 <= medium < 0.66 <= high
std::string risk_category(double cri);
/// minimal / moderate / high, same cutoffs; used inside explanation text
std::string risk_phrase(double cri);

/// Task outputs embedded in the decoder prompt: ground truth during
/// training, model predictions at inference.
struct TaskOutputs {
    double pred_lat = 0.0;
    double pred_lon = 0.0;
    double pred_sog = 0.0;
    double pred_cog = 0.0;
    bool anomalous = false;
    double cri = 0.0;
};

/// Observation-only prompt (feeds the prompt encoder). Starts with
/// "MARITIME TRAFFIC ANALYSIS".
std::string build_prompt(const Window& window);

/// Prompt including task outputs (feeds the text decoder).
std::string build_prompt(const Window& window, const TaskOutputs& outputs);

TaskOutputs truth_outputs(const LabeledWindow& lw);

/// Deterministic self-supervision target covering current/predicted
/// position, speed and course change, anomaly status and risk level.
/// Pass stats when the window is min-max normalized.
std::string generate_target_explanation(const LabeledWindow& lw,
                                        const NormalizationStats* stats = nullptr);

struct SituationSummary {
    std::int64_t mmsi = 0;
    std::int64_t t_begin = 0;
    std::int64_t t_end = 0;
    double cur_lat = 0, cur_lon = 0, cur_sog = 0, cur_cog = 0;
    double pred_lat = 0, pred_lon = 0, pred_sog = 0, pred_cog = 0;
    bool anomalous = false;
    std::string anomaly_type; // e.g. "abnormal heading"; empty only when normal
    std::int64_t anomaly_ts = 0;
    double cri = 0.0;
    std::string confidence; // from the validation-ADE bucket
    std::int64_t target_mmsi = 0; // 0 = no vessel nearby
};

SituationSummary summarize(const LabeledWindow& lw, const TaskOutputs& outputs,
                           double validation_ade_nm, std::int64_t target_mmsi = 0);

/// Confidence bucket from validation ADE: high < 0.1 NM <= medium < 0.5 <= low.
std::string confidence_level(double validation_ade_nm);

/// Render the full briefing template. Throws MissingSlot when a required
/// slot has no producer.
std::string render_briefing(const SituationSummary& s);

/// GeoJSON FeatureCollection with one LineString per track; properties
/// carry role = history | truth | prediction.
std::string tracks_to_geojson(const std::vector<GeoPoint>& history,
                              const std::vector<GeoPoint>& truth,
                              const std::vector<GeoPoint>& prediction);

} // namespace aisllm
