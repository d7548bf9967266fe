#include "aisllm/synth.hpp"
#include "aisllm/briefing.hpp"
#include "aisllm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace aisllm {

using json = nlohmann::json;

std::string anomaly_kind_name(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::shift: return "shift";
        case AnomalyKind::heading: return "heading";
        case AnomalyKind::speed: return "speed";
    }
    return "shift";
}

AnomalyKind anomaly_kind_from_name(const std::string& name) {
    if (name == "shift") return AnomalyKind::shift;
    if (name == "heading") return AnomalyKind::heading;
    if (name == "speed") return AnomalyKind::speed;
    throw std::invalid_argument("unknown anomaly kind: " + name);
}

namespace {

constexpr std::int64_t kTimeBase = 1700000040; // minute-aligned epoch seconds
constexpr std::int64_t kScenarioSpacing = 7200; // scenarios never overlap in time
constexpr double kJunctionClearNm = 8.0;        // single tracks keep clear of the junction
constexpr double kEncounterRadiusNm = 2.0;      // crossings meet near the junction

AisRecord make_record(std::int64_t mmsi, double ts, const GeoPoint& p, double sog, double cog) {
    AisRecord r;
    r.timestamp = ts;
    r.mmsi = mmsi;
    r.state = KinematicState(p, sog, cog);
    r.nav_status = NavStatus::underway;
    return r;
}

bool inside(const Region& reg, const GeoPoint& p, double margin_deg = 0.02) {
    return p.lat >= reg.lat_min + margin_deg && p.lat <= reg.lat_max - margin_deg &&
           p.lon >= reg.lon_min + margin_deg && p.lon <= reg.lon_max - margin_deg;
}

// Straight transit or constant-rate turn away from the junction.
bool make_single(SplitMix64& rng, const Region& reg, ScenarioKind kind, std::int64_t mmsi,
                 std::int64_t t0, VoyageSegment& out) {
    const GeoPoint center(reg.center_lat(), reg.center_lon());
    const std::size_t len = 42 + rng.below(9); // 42..50 points
    for (int attempt = 0; attempt < 200; ++attempt) {
        const GeoPoint start(rng.uniform(reg.lat_min + 0.12, reg.lat_max - 0.12),
                             rng.uniform(reg.lon_min + 0.12, reg.lon_max - 0.12));
        const double sog = rng.uniform(6.0, 16.0);
        double cog = rng.uniform(0.0, 360.0);
        const double turn_rate =
            kind == ScenarioKind::turn ? (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.8, 2.5)
                                       : 0.0;
        VoyageSegment seg;
        seg.mmsi = mmsi;
        GeoPoint p = start;
        bool ok = true;
        for (std::size_t i = 0; i < len; ++i) {
            if (!inside(reg, p) || haversine_nm(p, center) < kJunctionClearNm) {
                ok = false;
                break;
            }
            seg.records.push_back(
                make_record(mmsi, static_cast<double>(t0 + static_cast<std::int64_t>(i) * 60), p,
                            sog, cog));
            p = dead_reckon(p, sog, cog, 1.0);
            cog = wrap360(cog + turn_rate);
        }
        if (ok) {
            out = std::move(seg);
            return true;
        }
    }
    return false;
}

// Two constant-velocity tracks meeting near the junction within ~0.1 NM.
bool make_crossing(SplitMix64& rng, const Region& reg, std::int64_t mmsi_a, std::int64_t mmsi_b,
                   std::int64_t t0, VoyageSegment& out_a, VoyageSegment& out_b) {
    const GeoPoint center(reg.center_lat(), reg.center_lon());
    const std::size_t len = 46 + rng.below(9); // 46..54 points
    for (int attempt = 0; attempt < 200; ++attempt) {
        const std::size_t t_meet = 16 + rng.below(len - 32); // interior encounter
        const GeoPoint meet =
            dead_reckon(center, rng.uniform(0.0, kEncounterRadiusNm) * 60.0,
                        rng.uniform(0.0, 360.0), 1.0); // sog*1min/60 = distance NM
        const double course_a = rng.uniform(0.0, 360.0);
        const double course_b =
            wrap360(course_a + (rng.uniform() < 0.5 ? 1.0 : -1.0) * rng.uniform(40.0, 140.0));
        const double sog_a = rng.uniform(7.0, 15.0);
        const double sog_b = rng.uniform(7.0, 15.0);
        const double offset_nm = rng.uniform(0.02, 0.10);
        const GeoPoint meet_b = dead_reckon(meet, offset_nm * 60.0, wrap360(course_b + 90.0), 1.0);

        auto walk = [&](const GeoPoint& at_meet, double sog, double cog, std::int64_t mmsi,
                        VoyageSegment& seg) {
            seg = VoyageSegment{};
            seg.mmsi = mmsi;
            std::vector<GeoPoint> pts(len);
            pts[t_meet] = at_meet;
            for (std::size_t i = t_meet; i + 1 < len; ++i)
                pts[i + 1] = dead_reckon(pts[i], sog, cog, 1.0);
            for (std::size_t i = t_meet; i > 0; --i)
                pts[i - 1] = dead_reckon(pts[i], sog, cog, -1.0);
            for (std::size_t i = 0; i < len; ++i) {
                if (!inside(reg, pts[i])) return false;
                seg.records.push_back(
                    make_record(mmsi, static_cast<double>(t0 + static_cast<std::int64_t>(i) * 60),
                                pts[i], sog, cog));
            }
            return true;
        };
        VoyageSegment a, b;
        if (walk(meet, sog_a, course_a, mmsi_a, a) && walk(meet_b, sog_b, course_b, mmsi_b, b)) {
            out_a = std::move(a);
            out_b = std::move(b);
            return true;
        }
    }
    return false;
}

} // namespace

SyntheticTraffic generate_synthetic_traffic(std::uint64_t seed, std::size_t n_segments,
                                            const Region& region) {
    if (n_segments == 0) throw std::invalid_argument("n_segments must be >= 1");
    SyntheticTraffic traffic;
    SplitMix64 rng(seed);
    std::size_t scenario = 0;
    while (traffic.segments.size() < n_segments) {
        const std::int64_t t0 = kTimeBase + static_cast<std::int64_t>(scenario) * kScenarioSpacing;
        const std::size_t remaining = n_segments - traffic.segments.size();
        const double pick = rng.uniform();
        const std::int64_t next_mmsi = 200000001 + static_cast<std::int64_t>(traffic.segments.size());

        if (pick < 0.3 && remaining >= 2) {
            VoyageSegment a, b;
            if (make_crossing(rng, region, next_mmsi, next_mmsi + 1, t0, a, b)) {
                const std::size_t ia = traffic.segments.size();
                traffic.segments.push_back(std::move(a));
                traffic.segments.push_back(std::move(b));
                traffic.info.push_back({ScenarioKind::crossing, ia + 1});
                traffic.info.push_back({ScenarioKind::crossing, ia});
                ++scenario;
            }
            continue;
        }
        const ScenarioKind kind = pick < 0.65 ? ScenarioKind::straight : ScenarioKind::turn;
        VoyageSegment seg;
        if (make_single(rng, region, kind, next_mmsi, t0, seg)) {
            traffic.segments.push_back(std::move(seg));
            traffic.info.push_back({kind, static_cast<std::size_t>(-1)});
            ++scenario;
        }
    }
    return traffic;
}

LabeledWindow inject_anomaly(const Window& window, const AnomalySpec& spec,
                             const AnomalyBounds& bounds, double dt_min) {
    const std::size_t steps = window.steps();
    if (spec.begin < 1 || spec.len < 1 || spec.begin + spec.len > steps)
        throw SpanOutOfBounds("span [" + std::to_string(spec.begin) + ", " +
                              std::to_string(spec.begin + spec.len) + ") invalid for " +
                              std::to_string(steps) + " steps");
    const double mag = spec.magnitude;
    const double abs_mag = std::abs(mag);
    switch (spec.kind) {
        case AnomalyKind::shift:
            if (abs_mag < bounds.shift_min_deg || abs_mag > bounds.shift_max_deg)
                throw MagnitudeOutOfBounds("shift magnitude outside bound table");
            break;
        case AnomalyKind::heading:
            if (abs_mag < bounds.heading_min_deg || abs_mag > bounds.heading_max_deg)
                throw MagnitudeOutOfBounds("heading magnitude outside bound table");
            break;
        case AnomalyKind::speed:
            if (!((mag >= bounds.speed_up_min && mag <= bounds.speed_up_max) ||
                  (mag >= bounds.speed_down_min && mag <= bounds.speed_down_max)))
                throw MagnitudeOutOfBounds("speed factor outside bound table");
            break;
    }

    LabeledWindow out;
    out.window = window;
    out.window.values = window.values; // deep copy of the payload
    out.label = 1;
    out.spec = spec;
    Window& w = out.window;

    if (spec.kind == AnomalyKind::shift) {
        for (std::size_t i = spec.begin; i < spec.begin + spec.len; ++i) {
            w.at(i, 0) += mag;
            w.at(i, 1) += mag;
        }
        return out;
    }

    for (std::size_t i = spec.begin; i < spec.begin + spec.len; ++i) {
        if (spec.kind == AnomalyKind::heading) w.at(i, 3) = wrap360(w.at(i, 3) + mag);
        if (spec.kind == AnomalyKind::speed) w.at(i, 2) = std::max(0.0, w.at(i, 2) * mag);
    }
    // dead-reckon the track forward from the unmodified anchor point
    for (std::size_t i = spec.begin; i < steps; ++i) {
        const GeoPoint prev(w.at(i - 1, 0), w.at(i - 1, 1));
        const GeoPoint p = dead_reckon(prev, w.at(i - 1, 2), w.at(i - 1, 3), dt_min);
        w.at(i, 0) = p.lat;
        w.at(i, 1) = p.lon;
    }
    return out;
}

double label_cri(const Window& window, const std::vector<VoyageSegment>& all_segments,
                 const CriWeights& weights, double dt_min) {
    const std::size_t cur = window.n_in - 1;
    const double t =
        static_cast<double>(window.start_ts) + static_cast<double>(cur) * dt_min * 60.0;
    const KinematicState own(GeoPoint(window.at(cur, 0), window.at(cur, 1)), window.at(cur, 2),
                             window.at(cur, 3));
    double best = 0.0;
    for (const VoyageSegment& seg : all_segments) {
        if (seg.mmsi == window.mmsi || seg.records.size() < 2) continue;
        const double start = seg.records.front().timestamp;
        const double step = seg.records[1].timestamp - start;
        if (step <= 0) continue;
        const double fidx = (t - start) / step;
        const double ridx = std::round(fidx);
        if (std::abs(fidx - ridx) > 1e-6 || ridx < 0 ||
            ridx >= static_cast<double>(seg.records.size()))
            continue;
        const AisRecord& other = seg.records[static_cast<std::size_t>(ridx)];
        if (haversine_nm(own.position, other.state.position) > 10.0) continue;
        best = std::max(best, cri(encounter_geometry(own, other.state), weights));
    }
    return best;
}

LabeledDataset build_labeled_dataset(const SyntheticTraffic& traffic, double anomaly_ratio,
                                     std::uint64_t seed, const PipelineProfile& profile,
                                     const CriWeights& weights) {
    if (anomaly_ratio < 0.0 || anomaly_ratio > 1.0)
        throw std::invalid_argument("anomaly_ratio must lie in [0, 1]");

    LabeledDataset ds;
    std::vector<std::size_t> window_segment; // source segment per window
    for (std::size_t s = 0; s < traffic.segments.size(); ++s) {
        for (Window& w : make_windows(traffic.segments[s], profile)) {
            ds.windows.push_back(LabeledWindow{std::move(w), 0, std::nullopt, 0.0, ""});
            window_segment.push_back(s);
        }
    }
    const std::size_t n = ds.windows.size();
    if (n == 0) throw EmptyInput("no windows produced from the synthetic segments");

    // anomaly quota by deterministic selection
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 pick_rng(seed ^ 0x9d2c5680ull);
    deterministic_shuffle(order, pick_rng);
    const auto quota = static_cast<std::size_t>(
        std::llround(anomaly_ratio * static_cast<double>(n)));
    SplitMix64 spec_rng(seed ^ 0x85ebca6bull);
    for (std::size_t q = 0; q < quota && q < n; ++q) {
        AnomalySpec spec;
        const AnomalyBounds bounds;
        spec.kind = static_cast<AnomalyKind>(spec_rng.below(3));
        spec.begin = 1 + static_cast<std::size_t>(spec_rng.below(profile.window_in - 2));
        spec.len = 8 + static_cast<std::size_t>(spec_rng.below(14)); // 20%..50% of the window
        spec.seed = spec_rng.next();
        const double sign = spec_rng.uniform() < 0.5 ? -1.0 : 1.0;
        switch (spec.kind) {
            case AnomalyKind::shift:
                spec.magnitude = sign * spec_rng.uniform(bounds.shift_min_deg, bounds.shift_max_deg);
                break;
            case AnomalyKind::heading:
                spec.magnitude =
                    sign * spec_rng.uniform(bounds.heading_min_deg, bounds.heading_max_deg);
                break;
            case AnomalyKind::speed:
                spec.magnitude = spec_rng.uniform() < 0.5
                                     ? spec_rng.uniform(bounds.speed_up_min, bounds.speed_up_max)
                                     : spec_rng.uniform(bounds.speed_down_min, bounds.speed_down_max);
                break;
        }
        const std::size_t idx = order[q];
        ds.windows[idx] = inject_anomaly(ds.windows[idx].window, spec, bounds,
                                         profile.resample_interval_min);
    }

    for (LabeledWindow& lw : ds.windows) {
        lw.cri_target = label_cri(lw.window, traffic.segments, weights,
                                  profile.resample_interval_min);
        lw.explanation = generate_target_explanation(lw);
    }

    // train/val split by source segment
    std::vector<std::size_t> seg_order(traffic.segments.size());
    std::iota(seg_order.begin(), seg_order.end(), 0);
    SplitMix64 split_rng(seed ^ 0xc2b2ae35ull);
    deterministic_shuffle(seg_order, split_rng);
    const std::size_t n_val = std::max<std::size_t>(traffic.segments.size() / 5,
                                                    traffic.segments.size() > 1 ? 1 : 0);
    std::vector<bool> seg_is_val(traffic.segments.size(), false);
    for (std::size_t i = 0; i < n_val; ++i) seg_is_val[seg_order[i]] = true;
    for (std::size_t i = 0; i < n; ++i)
        (seg_is_val[window_segment[i]] ? ds.val_idx : ds.train_idx)
            .push_back(static_cast<std::uint32_t>(i));

    std::vector<Window> train_windows;
    train_windows.reserve(ds.train_idx.size());
    for (std::uint32_t i : ds.train_idx) train_windows.push_back(ds.windows[i].window);
    ds.stats = fit_minmax_windows(train_windows);
    return ds;
}

void write_labels(const std::string& path, const std::vector<LabeledWindow>& windows) {
    json arr = json::array();
    for (const LabeledWindow& lw : windows) {
        json e{{"label", lw.label}, {"cri", lw.cri_target}};
        if (lw.spec) {
            e["spec"] = json{{"kind", anomaly_kind_name(lw.spec->kind)},
                             {"begin", lw.spec->begin},
                             {"len", lw.spec->len},
                             {"magnitude", lw.spec->magnitude},
                             {"seed", lw.spec->seed}};
        } else {
            e["spec"] = nullptr;
        }
        arr.push_back(std::move(e));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write labels: " + path);
    out << arr.dump(2) << "\n";
}

void write_dataset_dir(const std::string& dir, const LabeledDataset& ds,
                       DatasetManifest manifest) {
    std::vector<Window> windows;
    windows.reserve(ds.windows.size());
    for (const LabeledWindow& lw : ds.windows) windows.push_back(lw.window);
    write_windows_shard(dir + "/windows.aisw", windows);
    write_labels(dir + "/labels.json", ds.windows);
    manifest.n_windows = ds.windows.size();
    manifest.train_windows = ds.train_idx;
    manifest.val_windows = ds.val_idx;
    manifest.stats = ds.stats;
    manifest.shard_hash = hash_file(dir + "/windows.aisw");
    write_manifest(dir + "/manifest.json", manifest);
}

DatasetDir read_dataset_dir(const std::string& dir) {
    DatasetDir out;
    out.manifest = read_manifest(dir + "/manifest.json");
    std::vector<Window> windows = read_windows_shard(dir + "/windows.aisw");
    std::vector<LabelEntry> labels;
    {
        std::ifstream probe(dir + "/labels.json");
        if (probe) labels = read_labels(dir + "/labels.json");
    }
    if (!labels.empty() && labels.size() != windows.size())
        throw IoError("labels.json does not match the shard window count");
    for (std::size_t i = 0; i < windows.size(); ++i) {
        LabeledWindow lw;
        lw.window = std::move(windows[i]);
        if (!labels.empty()) {
            lw.label = labels[i].label;
            lw.spec = labels[i].spec;
            lw.cri_target = labels[i].cri;
        }
        lw.explanation = generate_target_explanation(lw);
        out.ds.windows.push_back(std::move(lw));
    }
    out.ds.train_idx = out.manifest.train_windows;
    out.ds.val_idx = out.manifest.val_windows;
    out.ds.stats = out.manifest.stats;
    return out;
}

std::vector<LabelEntry> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open labels: " + path);
    json arr;
    in >> arr;
    std::vector<LabelEntry> entries;
    for (const json& e : arr) {
        LabelEntry le;
        le.label = e.at("label").get<int>();
        le.cri = e.at("cri").get<double>();
        if (!e.at("spec").is_null()) {
            const json& s = e.at("spec");
            AnomalySpec spec;
            spec.kind = anomaly_kind_from_name(s.at("kind").get<std::string>());
            spec.begin = s.at("begin").get<std::size_t>();
            spec.len = s.at("len").get<std::size_t>();
            spec.magnitude = s.at("magnitude").get<double>();
            spec.seed = s.at("seed").get<std::uint64_t>();
            le.spec = spec;
        }
        entries.push_back(std::move(le));
    }
    return entries;
}

} // namespace aisllm
