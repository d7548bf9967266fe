#include "aisllm/briefing.hpp"

#include <cstdio>
#include <ctime>

#include <json.hpp>

namespace aisllm {

namespace {

std::string fixed(const char* fmt, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string utc_minute(std::int64_t epoch_s) {
    const std::time_t t = static_cast<std::time_t>(epoch_s);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min);
    return buf;
}

} // namespace

std::string fmt_lat(double v) { return fixed("%08.4f", v); }
std::string fmt_lon(double v) { return fixed("%08.4f", v); }
std::string fmt_sog(double v) { return fixed("%04.1f", v); }
std::string fmt_cog(double v) { return fixed("%05.1f", v); }
std::string fmt_cri(double v) { return fixed("%.2f", v); }

std::string fmt_mmsi(std::int64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%09lld", static_cast<long long>(v));
    return buf;
}

std::string risk_category(double cri) {
    if (cri < 0.33) return "low";
    if (cri < 0.66) return "medium";
    return "high";
}

std::string risk_phrase(double cri) {
    if (cri < 0.33) return "minimal";
    if (cri < 0.66) return "moderate";
    return "high";
}

std::string confidence_level(double ade_nm) {
    if (ade_nm < 0.1) return "high";
    if (ade_nm < 0.5) return "medium";
    return "low";
}

namespace {

struct WindowView {
    double cur_lat, cur_lon, cur_sog, cur_cog;
    double end_lat, end_lon, end_sog, end_cog;
};

WindowView view(const Window& w, const NormalizationStats* stats) {
    auto value = [&](std::size_t step, std::size_t var) {
        const double x = w.at(step, var);
        return stats ? invert_minmax_value(x, *stats, var) : x;
    };
    const std::size_t cur = w.n_in - 1;
    const std::size_t last = w.steps() - 1;
    return WindowView{value(cur, 0),  value(cur, 1),  value(cur, 2),  value(cur, 3),
                      value(last, 0), value(last, 1), value(last, 2), value(last, 3)};
}

} // namespace

// Field order keeps every numeric slot at a fixed byte offset; the
// variable-width status word comes last so the decoder can learn plain
// positional copying for the digits.
std::string build_prompt(const Window& w) {
    const WindowView v = view(w, nullptr);
    std::string p = "MARITIME TRAFFIC ANALYSIS";
    p += " POS " + fmt_lat(v.cur_lat) + " " + fmt_lon(v.cur_lon);
    p += " SOG " + fmt_sog(v.cur_sog) + " COG " + fmt_cog(v.cur_cog);
    return p;
}

std::string build_prompt(const Window& w, const TaskOutputs& o) {
    std::string p = build_prompt(w);
    p += " PRED " + fmt_lat(o.pred_lat) + " " + fmt_lon(o.pred_lon);
    p += " SOG " + fmt_sog(o.pred_sog) + " COG " + fmt_cog(o.pred_cog);
    p += " CRI " + fmt_cri(o.cri);
    p += " ANOM " + std::string(o.anomalous ? "anomalous" : "normal");
    return p;
}

TaskOutputs truth_outputs(const LabeledWindow& lw) {
    const WindowView v = view(lw.window, nullptr);
    TaskOutputs o;
    o.pred_lat = v.end_lat;
    o.pred_lon = v.end_lon;
    o.pred_sog = v.end_sog;
    o.pred_cog = v.end_cog;
    o.anomalous = lw.label == 1;
    o.cri = lw.cri_target;
    return o;
}

namespace {

std::string pattern_phrase(const LabeledWindow& lw) {
    if (lw.label == 0) return "normal navigation pattern";
    switch (lw.spec ? lw.spec->kind : AnomalyKind::shift) {
        case AnomalyKind::shift: return "shift deviation";
        case AnomalyKind::heading: return "abnormal heading";
        case AnomalyKind::speed: return "abnormal speed";
    }
    return "shift deviation";
}

} // namespace

std::string generate_target_explanation(const LabeledWindow& lw, const NormalizationStats* stats) {
    const WindowView v = view(lw.window, stats);
    std::string t = "From (" + fmt_lat(v.cur_lat) + ", " + fmt_lon(v.cur_lon) + ")";
    t += " toward (" + fmt_lat(v.end_lat) + ", " + fmt_lon(v.end_lon) + ")";
    t += ", speed " + fmt_sog(v.cur_sog) + " to " + fmt_sog(v.end_sog) + " knots";
    t += ", course " + fmt_cog(v.cur_cog) + " to " + fmt_cog(v.end_cog);
    t += ", CRI " + fmt_cri(lw.cri_target) + ".";
    t += " Vessel shows " + pattern_phrase(lw) + " with " + risk_phrase(lw.cri_target) +
         " collision risk.";
    return t;
}

SituationSummary summarize(const LabeledWindow& lw, const TaskOutputs& o, double validation_ade_nm,
                           std::int64_t target_mmsi) {
    const WindowView v = view(lw.window, nullptr);
    SituationSummary s;
    s.mmsi = lw.window.mmsi;
    s.t_begin = lw.window.start_ts;
    s.t_end = lw.window.start_ts + static_cast<std::int64_t>(lw.window.n_in - 1) * 60;
    s.cur_lat = v.cur_lat;
    s.cur_lon = v.cur_lon;
    s.cur_sog = v.cur_sog;
    s.cur_cog = v.cur_cog;
    s.pred_lat = o.pred_lat;
    s.pred_lon = o.pred_lon;
    s.pred_sog = o.pred_sog;
    s.pred_cog = o.pred_cog;
    s.anomalous = o.anomalous;
    if (lw.spec) {
        s.anomaly_type = pattern_phrase(lw);
        s.anomaly_ts =
            lw.window.start_ts + static_cast<std::int64_t>(lw.spec->begin) * 60;
    } else if (o.anomalous) {
        s.anomaly_type = "trajectory deviation";
        s.anomaly_ts = s.t_end;
    }
    s.cri = o.cri;
    s.confidence = confidence_level(validation_ade_nm);
    s.target_mmsi = target_mmsi;
    return s;
}

std::string render_briefing(const SituationSummary& s) {
    if (s.confidence.empty()) throw MissingSlot("confidence_level has no producer");
    if (s.anomalous && s.anomaly_type.empty())
        throw MissingSlot("anomaly flagged but behavior_type is empty");

    const std::string pattern = s.anomalous ? s.anomaly_type : "a normal navigation pattern";
    std::string b = "Based on AIS data analysis from " + utc_minute(s.t_begin) + " to " +
                    utc_minute(s.t_end) + ", vessel " + fmt_mmsi(s.mmsi) + " shows " + pattern +
                    ". Trajectory prediction indicates movement toward (" + fmt_lat(s.pred_lat) +
                    ", " + fmt_lon(s.pred_lon) + ") with " + s.confidence +
                    " confidence. Anomaly assessment: " +
                    (s.anomalous ? "abnormal" : "normal") +
                    " behavior detected. Collision risk: " + risk_category(s.cri) +
                    " with nearby vessels.";
    b += " Trajectory: will proceed to coordinates (" + fmt_lat(s.pred_lat) + ", " +
         fmt_lon(s.pred_lon) + ") at " + fmt_sog(s.pred_sog) + " knots.";
    if (s.anomalous)
        b += " Anomaly: unusual " + s.anomaly_type + " detected at " + utc_minute(s.anomaly_ts) +
             ".";
    b += " Collision: CRI of " + fmt_cri(s.cri) + " indicates " + risk_category(s.cri) +
         " with vessel " + (s.target_mmsi > 0 ? fmt_mmsi(s.target_mmsi) : "none") + ".";
    return b;
}

std::string tracks_to_geojson(const std::vector<GeoPoint>& history,
                              const std::vector<GeoPoint>& truth,
                              const std::vector<GeoPoint>& prediction) {
    using json = nlohmann::json;
    auto line = [](const std::vector<GeoPoint>& pts, const char* role) {
        json coords = json::array();
        for (const GeoPoint& p : pts) coords.push_back({p.lon, p.lat});
        return json{{"type", "Feature"},
                    {"properties", {{"role", role}}},
                    {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}};
    };
    json fc{{"type", "FeatureCollection"},
            {"features", json::array({line(history, "history"), line(truth, "truth"),
                                      line(prediction, "prediction")})}};
    return fc.dump(2);
}

} // namespace aisllm
