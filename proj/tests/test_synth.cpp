#include <doctest.h>

#include "aisllm/briefing.hpp"
#include "aisllm/metrics.hpp"
#include "aisllm/synth.hpp"

#include <cmath>

using namespace aisllm;

namespace {

bool segments_identical(const std::vector<VoyageSegment>& a, const std::vector<VoyageSegment>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].mmsi != b[i].mmsi || a[i].records.size() != b[i].records.size()) return false;
        for (std::size_t r = 0; r < a[i].records.size(); ++r) {
            const AisRecord &ra = a[i].records[r], &rb = b[i].records[r];
            if (ra.timestamp != rb.timestamp || ra.state.position.lat != rb.state.position.lat ||
                ra.state.position.lon != rb.state.position.lon || ra.state.sog != rb.state.sog ||
                ra.state.cog != rb.state.cog)
                return false;
        }
    }
    return true;
}

Window make_straight_window(double sog = 10.0, double cog = 45.0) {
    Window w;
    w.mmsi = 123456789;
    w.start_ts = 1700000040;
    w.values.resize(42 * 4);
    GeoPoint p(37.3, 23.3);
    for (std::size_t i = 0; i < 42; ++i) {
        w.at(i, 0) = p.lat;
        w.at(i, 1) = p.lon;
        w.at(i, 2) = sog;
        w.at(i, 3) = cog;
        p = dead_reckon(p, sog, cog, 1.0);
    }
    return w;
}

} // namespace

TEST_SUITE_BEGIN("synth");

TEST_CASE("generator is deterministic and well-formed") {
    const SyntheticTraffic a = generate_synthetic_traffic(42, 20);
    const SyntheticTraffic b = generate_synthetic_traffic(42, 20);
    CHECK(segments_identical(a.segments, b.segments));
    CHECK(a.segments.size() == 20);
    REQUIRE(a.info.size() == 20);
    for (const VoyageSegment& s : a.segments) {
        CHECK(s.records.size() >= 42);
        for (std::size_t i = 1; i < s.records.size(); ++i)
            CHECK(s.records[i].timestamp - s.records[i - 1].timestamp == doctest::Approx(60.0));
    }
    const SyntheticTraffic c = generate_synthetic_traffic(43, 20);
    CHECK(!segments_identical(a.segments, c.segments));
}

TEST_CASE("straight transit spacing matches speed") {
    const SyntheticTraffic t = generate_synthetic_traffic(7, 30);
    bool found = false;
    for (std::size_t i = 0; i < t.segments.size() && !found; ++i) {
        if (t.info[i].kind != ScenarioKind::straight) continue;
        found = true;
        const VoyageSegment& s = t.segments[i];
        const double expected_nm = s.records[0].state.sog / 60.0;
        for (std::size_t k = 1; k < s.records.size(); ++k) {
            const double d =
                haversine_nm(s.records[k - 1].state.position, s.records[k].state.position);
            CHECK(std::abs(d - expected_nm) < 1e-3);
        }
    }
    CHECK(found);
}

TEST_CASE("tracks are kinematically consistent") {
    const SyntheticTraffic t = generate_synthetic_traffic(11, 12);
    for (const VoyageSegment& s : t.segments) {
        for (std::size_t k = 0; k + 1 < s.records.size(); ++k) {
            const GeoPoint expect = dead_reckon(s.records[k].state.position, s.records[k].state.sog,
                                                s.records[k].state.cog, 1.0);
            CHECK(haversine_nm(expect, s.records[k + 1].state.position) < 2e-3);
        }
    }
}

TEST_CASE("crossing pairs pass close") {
    const SyntheticTraffic t = generate_synthetic_traffic(42, 40);
    std::size_t crossings = 0;
    for (std::size_t i = 0; i < t.segments.size(); ++i) {
        if (t.info[i].kind != ScenarioKind::crossing || t.info[i].partner < i) continue;
        ++crossings;
        const VoyageSegment& a = t.segments[i];
        const VoyageSegment& b = t.segments[t.info[i].partner];
        // evaluate the geometry early in the encounter, while still closing
        const std::size_t k = 2;
        const EncounterGeometry g =
            encounter_geometry(a.records[k].state, b.records[k].state);
        const CpaResult cpa = dcpa_tcpa(g);
        CHECK(cpa.dcpa_nm <= 0.12);
        // both tracks share timestamps
        CHECK(a.records.front().timestamp == b.records.front().timestamp);
    }
    CHECK(crossings > 0);
}

TEST_CASE("anomaly injection validation") {
    const Window w = make_straight_window();
    AnomalySpec spec;
    spec.kind = AnomalyKind::shift;
    spec.begin = 5;
    spec.len = 8;
    spec.magnitude = 0.0; // below the bound table minimum
    CHECK_THROWS_AS(inject_anomaly(w, spec), MagnitudeOutOfBounds);
    spec.magnitude = 0.5;
    CHECK_THROWS_AS(inject_anomaly(w, spec), MagnitudeOutOfBounds);
    spec.magnitude = 0.01;
    spec.begin = 0; // no anchor point before the span
    CHECK_THROWS_AS(inject_anomaly(w, spec), SpanOutOfBounds);
    spec.begin = 40;
    spec.len = 5; // runs past the window
    CHECK_THROWS_AS(inject_anomaly(w, spec), SpanOutOfBounds);

    AnomalySpec sp;
    sp.kind = AnomalyKind::speed;
    sp.begin = 5;
    sp.len = 8;
    sp.magnitude = 1.0; // between the drop and surge ranges
    CHECK_THROWS_AS(inject_anomaly(w, sp), MagnitudeOutOfBounds);
}

TEST_CASE("shift anomaly changes exactly the span") {
    const Window w = make_straight_window();
    AnomalySpec spec;
    spec.kind = AnomalyKind::shift;
    spec.begin = 5;
    spec.len = 8; // steps 5..12
    spec.magnitude = 0.01;
    const LabeledWindow lw = inject_anomaly(w, spec);
    CHECK(lw.label == 1);
    REQUIRE(lw.spec.has_value());
    for (std::size_t i = 0; i < 42; ++i) {
        const bool in_span = i >= 5 && i < 13;
        if (in_span) {
            CHECK(std::abs(lw.window.at(i, 0) - w.at(i, 0) - 0.01) < 1e-12);
            CHECK(std::abs(lw.window.at(i, 1) - w.at(i, 1) - 0.01) < 1e-12);
        } else {
            CHECK(lw.window.at(i, 0) == w.at(i, 0));
            CHECK(lw.window.at(i, 1) == w.at(i, 1));
        }
        CHECK(lw.window.at(i, 2) == w.at(i, 2));
        CHECK(lw.window.at(i, 3) == w.at(i, 3));
    }
}

TEST_CASE("speed anomaly re-integrates positions like a dead-reckoning oracle") {
    const Window w = make_straight_window(9.0, 120.0);
    AnomalySpec spec;
    spec.kind = AnomalyKind::speed;
    spec.begin = 5;
    spec.len = 8;
    spec.magnitude = 2.0;
    const LabeledWindow lw = inject_anomaly(w, spec);

    // independent oracle: rebuild the whole track by dead reckoning
    std::vector<double> sog(42), cog(42);
    for (std::size_t i = 0; i < 42; ++i) {
        sog[i] = w.at(i, 2) * ((i >= 5 && i < 13) ? 2.0 : 1.0);
        cog[i] = w.at(i, 3);
    }
    double lat = w.at(4, 0), lon = w.at(4, 1);
    for (std::size_t i = 5; i < 42; ++i) {
        const GeoPoint p = dead_reckon(GeoPoint(lat, lon), sog[i - 1], cog[i - 1], 1.0);
        lat = p.lat;
        lon = p.lon;
        CHECK(std::abs(lw.window.at(i, 0) - lat) < 1e-6);
        CHECK(std::abs(lw.window.at(i, 1) - lon) < 1e-6);
    }
    // the anchor point before the span is untouched
    CHECK(lw.window.at(4, 0) == w.at(4, 0));
    CHECK(lw.window.at(4, 1) == w.at(4, 1));
    // sog outside the span unchanged, inside doubled
    CHECK(lw.window.at(4, 2) == doctest::Approx(9.0));
    CHECK(lw.window.at(8, 2) == doctest::Approx(18.0));
}

TEST_CASE("heading anomaly rotates cog over the span") {
    const Window w = make_straight_window(10.0, 10.0);
    AnomalySpec spec;
    spec.kind = AnomalyKind::heading;
    spec.begin = 6;
    spec.len = 10;
    spec.magnitude = 45.0;
    const LabeledWindow lw = inject_anomaly(w, spec);
    CHECK(lw.window.at(5, 3) == doctest::Approx(10.0));
    CHECK(lw.window.at(6, 3) == doctest::Approx(55.0));
    CHECK(lw.window.at(15, 3) == doctest::Approx(55.0));
    CHECK(lw.window.at(16, 3) == doctest::Approx(10.0));
    // re-integrated track bends away from the original
    CHECK(haversine_nm(GeoPoint(lw.window.at(20, 0), lw.window.at(20, 1)),
                       GeoPoint(w.at(20, 0), w.at(20, 1))) > 0.1);
}

TEST_CASE("cri labeling") {
    SUBCASE("isolated vessel scores zero") {
        const Window w = make_straight_window();
        CHECK(label_cri(w, {}) == 0.0);
    }
    SUBCASE("scripted collision course scores high, parallel pair matches direct cri") {
        // own vessel northbound, intruder southbound dead ahead
        const Window w = make_straight_window(10.0, 0.0);
        const std::size_t cur = w.n_in - 1;
        const double t_cur = static_cast<double>(w.start_ts) + 60.0 * static_cast<double>(cur);
        const GeoPoint own_pos(w.at(cur, 0), w.at(cur, 1));

        VoyageSegment intruder;
        intruder.mmsi = 999999999;
        GeoPoint p = dead_reckon(own_pos, 0.8 * 60.0, 0.0, 1.0); // 0.8 NM ahead at t_cur
        // build records covering [start_ts, ...] on the same grid
        for (std::int64_t i = 0; i < 42; ++i) {
            const double ts = static_cast<double>(w.start_ts) + 60.0 * static_cast<double>(i);
            const double dt_from_cur = (ts - t_cur) / 60.0;
            AisRecord r;
            r.timestamp = ts;
            r.mmsi = intruder.mmsi;
            r.state = KinematicState(dead_reckon(p, 10.0, 180.0, dt_from_cur), 10.0, 180.0);
            intruder.records.push_back(r);
        }
        const double risk = label_cri(w, {intruder});
        CHECK(risk >= 0.9);

        // parallel vessel 2 NM abeam, same course/speed
        VoyageSegment parallel = intruder;
        parallel.mmsi = 888888888;
        for (std::int64_t i = 0; i < 42; ++i) {
            const double ts = static_cast<double>(w.start_ts) + 60.0 * static_cast<double>(i);
            const double dt_from_cur = (ts - t_cur) / 60.0;
            const GeoPoint base = dead_reckon(own_pos, 2.0 * 60.0, 90.0, 1.0);
            parallel.records[static_cast<std::size_t>(i)].state =
                KinematicState(dead_reckon(base, 10.0, 0.0, dt_from_cur), 10.0, 0.0);
        }
        const double risk_par = label_cri(w, {parallel});
        const KinematicState own(own_pos, w.at(cur, 2), w.at(cur, 3));
        const double direct =
            cri(encounter_geometry(own, parallel.records[cur].state), CriWeights{});
        CHECK(risk_par == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("labeled dataset build") {
    const SyntheticTraffic traffic = generate_synthetic_traffic(42, 24);
    const PipelineProfile profile = PipelineProfile::piraeus();

    SUBCASE("ratio zero leaves everything normal") {
        const LabeledDataset ds = build_labeled_dataset(traffic, 0.0, 1, profile);
        for (const LabeledWindow& lw : ds.windows) {
            CHECK(lw.label == 0);
            CHECK(!lw.spec.has_value());
        }
    }
    SUBCASE("the anomaly quota is exact and deterministic") {
        const LabeledDataset a = build_labeled_dataset(traffic, 0.3, 7, profile);
        const LabeledDataset b = build_labeled_dataset(traffic, 0.3, 7, profile);
        std::size_t anomalous = 0;
        for (const LabeledWindow& lw : a.windows) anomalous += lw.label;
        CHECK(anomalous == static_cast<std::size_t>(
                               std::llround(0.3 * static_cast<double>(a.windows.size()))));
        REQUIRE(a.windows.size() == b.windows.size());
        for (std::size_t i = 0; i < a.windows.size(); ++i) {
            CHECK(a.windows[i].label == b.windows[i].label);
            CHECK(a.windows[i].cri_target == b.windows[i].cri_target);
            CHECK(a.windows[i].explanation == b.windows[i].explanation);
        }
        // label=1 iff spec present, cri in range, explanations non-empty
        for (const LabeledWindow& lw : a.windows) {
            CHECK((lw.label == 1) == lw.spec.has_value());
            CHECK(lw.cri_target >= 0.0);
            CHECK(lw.cri_target <= 1.0);
            CHECK(!lw.explanation.empty());
        }
    }
    SUBCASE("anomalous tracks stay inside the region expanded by one degree") {
        const LabeledDataset ds = build_labeled_dataset(traffic, 0.5, 3, profile);
        const Region reg;
        for (const LabeledWindow& lw : ds.windows)
            for (std::size_t i = 0; i < lw.window.steps(); ++i) {
                CHECK(lw.window.at(i, 0) > reg.lat_min - 1.0);
                CHECK(lw.window.at(i, 0) < reg.lat_max + 1.0);
                CHECK(lw.window.at(i, 1) > reg.lon_min - 1.0);
                CHECK(lw.window.at(i, 1) < reg.lon_max + 1.0);
            }
    }
    SUBCASE("train/val split covers every window exactly once") {
        const LabeledDataset ds = build_labeled_dataset(traffic, 0.3, 7, profile);
        CHECK(ds.train_idx.size() + ds.val_idx.size() == ds.windows.size());
        CHECK(!ds.val_idx.empty());
        CHECK(ds.train_idx.size() > ds.val_idx.size());
    }
}

TEST_CASE("labels sidecar round trip") {
    const SyntheticTraffic traffic = generate_synthetic_traffic(5, 4);
    const LabeledDataset ds = build_labeled_dataset(traffic, 0.4, 9, PipelineProfile::piraeus());
    const std::string path = "test_tmp_labels.json";
    write_labels(path, ds.windows);
    const std::vector<LabelEntry> back = read_labels(path);
    REQUIRE(back.size() == ds.windows.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].label == ds.windows[i].label);
        CHECK(back[i].cri == ds.windows[i].cri_target);
        CHECK(back[i].spec.has_value() == ds.windows[i].spec.has_value());
        if (back[i].spec)
            CHECK(back[i].spec->magnitude == ds.windows[i].spec->magnitude);
    }
    std::remove(path.c_str());
}

TEST_SUITE_END();
