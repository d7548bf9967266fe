#include <doctest.h>

#include "aisllm/briefing.hpp"
#include "aisllm/metrics.hpp"
#include "aisllm/synth.hpp"

#include <json.hpp>
#include <regex>

using namespace aisllm;

namespace {

LabeledWindow sample_window(int label = 0, double cri = 0.02) {
    Window w;
    w.mmsi = 200000007;
    w.start_ts = 1700000040;
    w.values.resize(42 * 4);
    GeoPoint p(37.5665, 23.4821);
    double sog = 12.3, cog = 48.0;
    for (std::size_t i = 0; i < 42; ++i) {
        w.at(i, 0) = p.lat;
        w.at(i, 1) = p.lon;
        w.at(i, 2) = sog;
        w.at(i, 3) = cog;
        p = dead_reckon(p, sog, cog, 1.0);
        cog = wrap360(cog + 0.2);
        sog = std::max(0.0, sog - 0.02);
    }
    LabeledWindow lw;
    lw.window = std::move(w);
    lw.label = label;
    if (label == 1) {
        AnomalySpec spec;
        spec.kind = AnomalyKind::heading;
        spec.begin = 6;
        spec.len = 9;
        spec.magnitude = 40.0;
        lw.spec = spec;
    }
    lw.cri_target = cri;
    return lw;
}

} // namespace

TEST_SUITE_BEGIN("briefing");

TEST_CASE("target explanation phrasing") {
    const LabeledWindow normal = sample_window(0, 0.02);
    const std::string text = generate_target_explanation(normal);
    CHECK(text.find("normal navigation pattern") != std::string::npos);
    CHECK(text.find("minimal collision risk") != std::string::npos);
    CHECK(generate_target_explanation(normal) == text);

    const LabeledWindow anomalous = sample_window(1, 0.5);
    const std::string atext = generate_target_explanation(anomalous);
    CHECK(atext.find("abnormal heading") != std::string::npos);
    CHECK(atext.find("moderate collision risk") != std::string::npos);
}

TEST_CASE("prompt format") {
    const LabeledWindow lw = sample_window();
    const std::string obs = build_prompt(lw.window);
    CHECK(obs.rfind("MARITIME TRAFFIC ANALYSIS", 0) == 0);
    CHECK(obs == build_prompt(lw.window));
    const std::string full = build_prompt(lw.window, truth_outputs(lw));
    CHECK(full.rfind("MARITIME TRAFFIC ANALYSIS", 0) == 0);
    CHECK(full.find(" PRED ") != std::string::npos);
    CHECK(full.find(" CRI 0.02") != std::string::npos);
    // trailing status word keeps every numeric slot at a fixed offset
    CHECK(full.rfind(" ANOM normal") == full.size() - 12);
}

TEST_CASE("prompt length stays under the encoder limit across a corpus") {
    const SyntheticTraffic traffic = generate_synthetic_traffic(42, 16);
    const LabeledDataset ds = build_labeled_dataset(traffic, 0.3, 42, PipelineProfile::piraeus());
    for (const LabeledWindow& lw : ds.windows) {
        CHECK(build_prompt(lw.window, truth_outputs(lw)).size() <= 2048);
        CHECK(lw.explanation.size() <= 2048);
    }
}

TEST_CASE("risk and confidence buckets") {
    CHECK(risk_category(0.0) == "low");
    CHECK(risk_category(0.32999) == "low");
    CHECK(risk_category(0.33) == "medium");
    CHECK(risk_category(0.6599) == "medium");
    CHECK(risk_category(0.66) == "high");
    CHECK(risk_category(0.70) == "high");
    CHECK(confidence_level(0.05) == "high");
    CHECK(confidence_level(0.3) == "medium");
    CHECK(confidence_level(0.9) == "low");
}

TEST_CASE("briefing rendering") {
    const LabeledWindow lw = sample_window(1, 0.70);
    const SituationSummary s = summarize(lw, truth_outputs(lw), 0.08, 265000001);
    const std::string text = render_briefing(s);
    CHECK(text.rfind("Based on AIS data analysis from", 0) == 0);
    CHECK(text.find("high") != std::string::npos);
    CHECK(text.find("CRI of 0.70 indicates high") != std::string::npos);
    CHECK(text.find("unusual abnormal heading detected") != std::string::npos);
    CHECK(text.find("with vessel 265000001") != std::string::npos);

    const LabeledWindow calm = sample_window(0, 0.0);
    const std::string ctext = render_briefing(summarize(calm, truth_outputs(calm), 0.08));
    CHECK(ctext.find("low") != std::string::npos);
    CHECK(ctext.find("normal behavior detected") != std::string::npos);

    SituationSummary broken = s;
    broken.confidence.clear();
    CHECK_THROWS_AS(render_briefing(broken), MissingSlot);
    SituationSummary broken2 = s;
    broken2.anomaly_type.clear();
    CHECK_THROWS_AS(render_briefing(broken2), MissingSlot);
}

TEST_CASE("rendered numeric slots parse back exactly") {
    const LabeledWindow lw = sample_window(0, 0.41);
    const TaskOutputs out = truth_outputs(lw);
    const std::string text = render_briefing(summarize(lw, out, 0.2));
    std::smatch m;
    std::regex coord_re(R"(movement toward \((\d+\.\d{4}), (\d+\.\d{4})\))");
    REQUIRE(std::regex_search(text, m, coord_re));
    CHECK(m[1].str() == fmt_lat(out.pred_lat));
    CHECK(m[2].str() == fmt_lon(out.pred_lon));
    std::regex cri_re(R"(CRI of (\d\.\d{2}))");
    REQUIRE(std::regex_search(text, m, cri_re));
    CHECK(m[1].str() == fmt_cri(out.cri));
    std::regex knots_re(R"(at (\d+\.\d) knots)");
    REQUIRE(std::regex_search(text, m, knots_re));
    CHECK(m[1].str() == fmt_sog(out.pred_sog));
}

TEST_CASE("geojson export") {
    const LabeledWindow lw = sample_window();
    const std::vector<GeoPoint> hist = window_positions(lw.window, 0, 18);
    const std::vector<GeoPoint> truth = window_positions(lw.window, 18, 24);
    std::vector<GeoPoint> pred = truth;
    const std::string text = tracks_to_geojson(hist, truth, pred);
    const nlohmann::json j = nlohmann::json::parse(text);
    CHECK(j.at("type") == "FeatureCollection");
    REQUIRE(j.at("features").size() == 3);
    CHECK(j["features"][0]["properties"]["role"] == "history");
    CHECK(j["features"][1]["properties"]["role"] == "truth");
    CHECK(j["features"][2]["properties"]["role"] == "prediction");
    for (const auto& f : j["features"]) {
        CHECK(f["geometry"]["type"] == "LineString");
        CHECK(f["geometry"]["coordinates"].size() >= 2);
    }
    // coordinates are [lon, lat] pairs
    CHECK(j["features"][0]["geometry"]["coordinates"][0][0].get<double>() ==
          doctest::Approx(lw.window.at(0, 1)));
}

TEST_SUITE_END();
