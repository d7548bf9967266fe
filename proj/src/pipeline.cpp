#include "aisllm/pipeline.hpp"
#include "aisllm/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace aisllm {

using json = nlohmann::json;

PipelineProfile PipelineProfile::piraeus() {
    PipelineProfile p;
    p.name = "piraeus";
    p.gap_split_min = 30.0;
    p.resample_interval_min = 1.0;
    p.min_points = 42;
    p.min_raw_points = 2;
    p.min_duration_min = 0.0;
    p.max_points = 150;
    p.max_duration_min = 0.0;
    return p;
}

PipelineProfile PipelineProfile::dma() {
    PipelineProfile p;
    p.name = "dma";
    p.gap_split_min = 120.0;
    p.resample_interval_min = 10.0;
    p.min_points = 42;
    p.min_raw_points = 20;
    p.min_duration_min = 240.0;
    p.max_points = 0;
    p.max_duration_min = 1200.0;
    return p;
}

void PipelineProfile::validate() const {
    if (max_sog_kn <= 0 || gap_split_min <= 0 || resample_interval_min <= 0 ||
        window_in == 0 || window_out == 0 || min_points == 0)
        throw std::invalid_argument("pipeline profile fields must be positive");
    if (window_len() > min_points)
        throw std::invalid_argument("window_in + window_out must not exceed min_points");
    if (max_points > 0 && max_points < min_points)
        throw std::invalid_argument("max_points must be >= min_points");
}

ColumnMap builtin_column_map(const std::string& schema) {
    if (schema == "piraeus")
        return {{"timestamp", "t"},   {"mmsi", "shipid"}, {"lat", "lat"},
                {"lon", "lon"},       {"sog", "speed"},   {"cog", "course"}};
    if (schema == "dma")
        return {{"timestamp", "# Timestamp"}, {"mmsi", "MMSI"},
                {"lat", "Latitude"},          {"lon", "Longitude"},
                {"sog", "SOG"},               {"cog", "COG"},
                {"nav_status", "Navigational status"}};
    throw std::invalid_argument("unknown schema: " + schema + " (expected piraeus or dma)");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = trim(s);
    if (t.empty()) return false;
    char* end = nullptr;
    out = std::strtod(t.c_str(), &end);
    return end == t.c_str() + t.size() && std::isfinite(out);
}

// days since 1970-01-01 for a civil date (Howard Hinnant's algorithm)
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// Accepts epoch seconds, epoch milliseconds (> 1e11), "dd/mm/yyyy HH:MM:SS"
// and "yyyy-mm-dd HH:MM:SS".
bool parse_timestamp(const std::string& raw, double& out) {
    const std::string s = trim(raw);
    if (s.empty()) return false;
    int y, mo, d, h, mi, se;
    if (std::sscanf(s.c_str(), "%d/%d/%d %d:%d:%d", &d, &mo, &y, &h, &mi, &se) == 6 ||
        std::sscanf(s.c_str(), "%d-%d-%d %d:%d:%d", &y, &mo, &d, &h, &mi, &se) == 6) {
        if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) return false;
        out = static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 + mi * 60.0 + se;
        return true;
    }
    double v;
    if (!parse_double(s, v)) return false;
    out = v > 1e11 ? v / 1000.0 : v; // epoch milliseconds -> seconds
    return true;
}

NavStatus parse_nav_status(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s.empty() || s == "unknown value" || s == "unknown") return NavStatus::unknown;
    if (s.find("moor") != std::string::npos) return NavStatus::moored;
    if (s.find("anchor") != std::string::npos) return NavStatus::anchored;
    if (s.find("under way") != std::string::npos || s.find("underway") != std::string::npos)
        return NavStatus::underway;
    return NavStatus::other;
}

} // namespace

ParseResult parse_ais_csv(std::istream& in, const ColumnMap& columns) {
    std::string header_line;
    if (!std::getline(in, header_line)) throw EmptyInput("no header row");
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();

    const std::vector<std::string> header = split_csv_line(header_line);
    auto column_index = [&](const std::string& role, bool required) -> int {
        auto it = columns.find(role);
        if (it == columns.end()) {
            if (required) throw MissingColumn("column map lacks role: " + role);
            return -1;
        }
        for (std::size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == it->second) return static_cast<int>(i);
        if (required) throw MissingColumn("column not in header: " + it->second);
        return -1;
    };

    const int ct = column_index("timestamp", true);
    const int cm = column_index("mmsi", true);
    const int cla = column_index("lat", true);
    const int clo = column_index("lon", true);
    const int cs = column_index("sog", true);
    const int cc = column_index("cog", true);
    const int cn = column_index("nav_status", false);

    ParseResult result;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> f = split_csv_line(line);
        const int needed = std::max({ct, cm, cla, clo, cs, cc, cn});
        if (static_cast<int>(f.size()) <= needed) {
            ++result.skipped;
            continue;
        }
        double ts = 0, lat = 0, lon = 0, sog = 0, cog = 0, mmsi_raw = 0;
        if (!parse_timestamp(f[ct], ts) || !parse_double(f[cm], mmsi_raw) ||
            !parse_double(f[cla], lat) || !parse_double(f[clo], lon) ||
            !parse_double(f[cs], sog) || !parse_double(f[cc], cog) || mmsi_raw <= 0 ||
            lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0 || sog < 0.0) {
            ++result.skipped;
            continue;
        }
        AisRecord r;
        r.timestamp = ts;
        r.mmsi = static_cast<std::int64_t>(mmsi_raw);
        r.state = KinematicState(GeoPoint(lat, lon), sog, cog);
        r.nav_status = cn >= 0 ? parse_nav_status(f[cn]) : NavStatus::unknown;
        result.records.push_back(std::move(r));
    }
    if (result.records.empty()) throw EmptyInput("no valid AIS rows");
    return result;
}

std::vector<Polyline> load_coastline(std::istream& in) {
    std::vector<Polyline> lines;
    Polyline cur;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) {
            if (cur.size() >= 2) lines.push_back(cur);
            cur.clear();
            continue;
        }
        std::istringstream ls(t);
        double lon, lat;
        if (ls >> lon >> lat) cur.emplace_back(lat, lon);
    }
    if (cur.size() >= 2) lines.push_back(cur);
    return lines;
}

FilterResult filter_records(const std::vector<AisRecord>& records, const PipelineProfile& profile,
                            const std::vector<Polyline>* coastline) {
    FilterResult out;
    out.records.reserve(records.size());
    for (const AisRecord& r : records) {
        if (r.state.sog > profile.max_sog_kn) {
            ++out.removed_sog;
            continue;
        }
        if (r.nav_status == NavStatus::moored || r.nav_status == NavStatus::anchored) {
            ++out.removed_status;
            continue;
        }
        if (coastline != nullptr && !coastline->empty()) {
            bool near_coast = false;
            for (const Polyline& pl : *coastline) {
                for (std::size_t i = 0; i + 1 < pl.size() && !near_coast; ++i)
                    near_coast = point_segment_distance_nm(r.state.position, pl[i], pl[i + 1]) <
                                 profile.coast_margin_nm;
                if (near_coast) break;
            }
            if (near_coast) {
                ++out.removed_coast;
                continue;
            }
        }
        out.records.push_back(r);
    }
    return out;
}

std::vector<VoyageSegment> segment_voyages(std::vector<AisRecord> records,
                                           const PipelineProfile& profile) {
    std::stable_sort(records.begin(), records.end(), [](const AisRecord& a, const AisRecord& b) {
        return a.mmsi != b.mmsi ? a.mmsi < b.mmsi : a.timestamp < b.timestamp;
    });
    std::vector<VoyageSegment> segments;
    for (const AisRecord& r : records) {
        const bool fresh = segments.empty() || segments.back().mmsi != r.mmsi ||
                           (r.timestamp - segments.back().records.back().timestamp) >
                               profile.gap_split_min * 60.0;
        if (fresh) {
            segments.push_back({r.mmsi, {}});
        }
        segments.back().records.push_back(r);
    }
    return segments;
}

VoyageSegment resample_linear(const VoyageSegment& raw, const PipelineProfile& profile) {
    if (raw.records.size() < 2) throw TooShort("resample needs at least 2 points");
    const double step = profile.resample_interval_min * 60.0;
    const double start = raw.records.front().timestamp;
    const double end = raw.records.back().timestamp;
    const double t0 = std::ceil(start / step) * step;

    VoyageSegment out;
    out.mmsi = raw.mmsi;
    std::size_t k = 0; // left bracket index
    for (double t = t0; t <= end + 1e-9; t += step) {
        while (k + 2 < raw.records.size() && raw.records[k + 1].timestamp < t) ++k;
        const AisRecord& a = raw.records[k];
        const AisRecord& b = raw.records[k + 1];
        const double span = b.timestamp - a.timestamp;
        const double f = span > 0.0 ? std::clamp((t - a.timestamp) / span, 0.0, 1.0) : 0.0;

        const double lat = a.state.position.lat + f * (b.state.position.lat - a.state.position.lat);
        const double lon = a.state.position.lon + f * (b.state.position.lon - a.state.position.lon);
        const double sog = a.state.sog + f * (b.state.sog - a.state.sog);
        const double cog = wrap360(a.state.cog + f * angle_diff_deg(b.state.cog, a.state.cog));

        AisRecord r;
        r.timestamp = t;
        r.mmsi = raw.mmsi;
        r.state = KinematicState(GeoPoint(lat, lon), std::max(0.0, sog), cog);
        r.nav_status = a.nav_status;
        out.records.push_back(std::move(r));
    }
    return out;
}

std::vector<VoyageSegment> enforce_length_and_split(const std::vector<VoyageSegment>& segments,
                                                    const PipelineProfile& profile) {
    std::vector<VoyageSegment> out;
    auto keep = [&](const VoyageSegment& s) {
        return s.records.size() >= profile.min_points &&
               s.duration_min() >= profile.min_duration_min - 1e-9;
    };
    auto chunk = [](const VoyageSegment& s, std::size_t begin, std::size_t len) {
        VoyageSegment c;
        c.mmsi = s.mmsi;
        c.records.assign(s.records.begin() + static_cast<std::ptrdiff_t>(begin),
                         s.records.begin() + static_cast<std::ptrdiff_t>(begin + len));
        return c;
    };

    for (const VoyageSegment& s : segments) {
        if (!keep(s)) continue;
        const std::size_t len = s.records.size();

        if (profile.max_points > 0 && len > profile.max_points) {
            // overlapping chunks; the stride leaves window_len points shared so
            // no window straddles a cut
            const std::size_t stride = profile.max_points - profile.window_len();
            for (std::size_t start = 0; start + profile.window_len() <= len; start += stride) {
                const std::size_t n = std::min(profile.max_points, len - start);
                VoyageSegment c = chunk(s, start, n);
                if (keep(c)) out.push_back(std::move(c));
                if (start + n >= len) break;
            }
        } else if (profile.max_duration_min > 0.0 && s.duration_min() > profile.max_duration_min) {
            const std::size_t per =
                static_cast<std::size_t>(profile.max_duration_min / profile.resample_interval_min) + 1;
            for (std::size_t start = 0; start < len; start += per) {
                VoyageSegment c = chunk(s, start, std::min(per, len - start));
                if (keep(c)) out.push_back(std::move(c));
            }
        } else {
            out.push_back(s);
        }
    }
    return out;
}

namespace {

void stats_update(NormalizationStats& st, const AisRecord& r, bool& first) {
    const double v[4] = {r.state.position.lat, r.state.position.lon, r.state.sog, r.state.cog};
    for (std::size_t i = 0; i < 4; ++i) {
        if (first) {
            st.min[i] = st.max[i] = v[i];
        } else {
            st.min[i] = std::min(st.min[i], v[i]);
            st.max[i] = std::max(st.max[i], v[i]);
        }
    }
    first = false;
}

void stats_check(const NormalizationStats& st) {
    static const char* names[4] = {"lat", "lon", "sog", "cog"};
    for (std::size_t i = 0; i < 4; ++i)
        if (!(st.max[i] > st.min[i]))
            throw DegenerateVariable(std::string("variable has zero range: ") + names[i]);
}

} // namespace

NormalizationStats fit_minmax(const std::vector<VoyageSegment>& train_segments) {
    NormalizationStats st;
    bool first = true;
    for (const VoyageSegment& s : train_segments)
        for (const AisRecord& r : s.records) stats_update(st, r, first);
    if (first) throw EmptyInput("no training records to fit normalization");
    stats_check(st);
    return st;
}

NormalizationStats fit_minmax_windows(const std::vector<Window>& train_windows) {
    NormalizationStats st;
    bool first = true;
    for (const Window& w : train_windows)
        for (std::size_t s = 0; s < w.steps(); ++s)
            for (std::size_t v = 0; v < 4; ++v) {
                const double x = w.at(s, v);
                if (first) {
                    st.min[v] = st.max[v] = x;
                } else {
                    st.min[v] = std::min(st.min[v], x);
                    st.max[v] = std::max(st.max[v], x);
                }
                if (s == w.steps() - 1 && v == 3) first = false;
            }
    if (first) throw EmptyInput("no training windows to fit normalization");
    stats_check(st);
    return st;
}

double apply_minmax_value(double x, const NormalizationStats& st, std::size_t var) {
    return (x - st.min[var]) / (st.max[var] - st.min[var]);
}

double invert_minmax_value(double x, const NormalizationStats& st, std::size_t var) {
    return x * (st.max[var] - st.min[var]) + st.min[var];
}

void apply_minmax(Window& w, const NormalizationStats& st) {
    for (std::size_t s = 0; s < w.steps(); ++s)
        for (std::size_t v = 0; v < 4; ++v) w.at(s, v) = apply_minmax_value(w.at(s, v), st, v);
}

void invert_minmax(Window& w, const NormalizationStats& st) {
    for (std::size_t s = 0; s < w.steps(); ++s)
        for (std::size_t v = 0; v < 4; ++v) w.at(s, v) = invert_minmax_value(w.at(s, v), st, v);
}

std::vector<Window> make_windows(const VoyageSegment& segment, const PipelineProfile& profile) {
    std::vector<Window> windows;
    const std::size_t wl = profile.window_len();
    if (segment.records.size() < wl) return windows;
    for (std::size_t start = 0; start + wl <= segment.records.size(); ++start) {
        Window w;
        w.mmsi = segment.mmsi;
        w.start_ts = static_cast<std::int64_t>(std::llround(segment.records[start].timestamp));
        w.n_in = profile.window_in;
        w.n_out = profile.window_out;
        w.values.resize(wl * 4);
        for (std::size_t s = 0; s < wl; ++s) {
            const AisRecord& r = segment.records[start + s];
            w.at(s, 0) = r.state.position.lat;
            w.at(s, 1) = r.state.position.lon;
            w.at(s, 2) = r.state.sog;
            w.at(s, 3) = r.state.cog;
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return h;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

constexpr std::uint32_t kShardVersion = 1;

} // namespace

void write_windows_shard(const std::string& path, const std::vector<Window>& windows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write shard: " + path);
    out.write("AISW", 4);
    put_le<std::uint32_t>(out, kShardVersion);
    put_le<std::uint64_t>(out, windows.size());
    for (const Window& w : windows) {
        put_le<std::uint64_t>(out, static_cast<std::uint64_t>(w.mmsi));
        put_le<std::int64_t>(out, w.start_ts);
        for (double v : w.values) put_le<double>(out, v);
    }
    if (!out) throw IoError("short write to shard: " + path);
}

std::vector<Window> read_windows_shard(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open shard: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "AISW", 4) != 0) throw IoError("bad shard magic: " + path);
    const auto version = get_le<std::uint32_t>(in);
    if (version != kShardVersion) throw IoError("unsupported shard version");
    const auto count = get_le<std::uint64_t>(in);
    std::vector<Window> windows;
    windows.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Window w;
        w.mmsi = static_cast<std::int64_t>(get_le<std::uint64_t>(in));
        w.start_ts = get_le<std::int64_t>(in);
        w.values.resize(42 * 4);
        for (double& v : w.values) v = get_le<double>(in);
        if (!in) throw IoError("truncated shard: " + path);
        windows.push_back(std::move(w));
    }
    return windows;
}

namespace {

json profile_to_json(const PipelineProfile& p) {
    return json{{"name", p.name},
                {"max_sog_kn", p.max_sog_kn},
                {"coast_margin_nm", p.coast_margin_nm},
                {"gap_split_min", p.gap_split_min},
                {"resample_interval_min", p.resample_interval_min},
                {"min_points", p.min_points},
                {"min_raw_points", p.min_raw_points},
                {"min_duration_min", p.min_duration_min},
                {"max_points", p.max_points},
                {"max_duration_min", p.max_duration_min},
                {"window_in", p.window_in},
                {"window_out", p.window_out}};
}

PipelineProfile profile_from_json(const json& j) {
    PipelineProfile p;
    p.name = j.at("name").get<std::string>();
    p.max_sog_kn = j.at("max_sog_kn").get<double>();
    p.coast_margin_nm = j.at("coast_margin_nm").get<double>();
    p.gap_split_min = j.at("gap_split_min").get<double>();
    p.resample_interval_min = j.at("resample_interval_min").get<double>();
    p.min_points = j.at("min_points").get<std::size_t>();
    p.min_raw_points = j.at("min_raw_points").get<std::size_t>();
    p.min_duration_min = j.at("min_duration_min").get<double>();
    p.max_points = j.at("max_points").get<std::size_t>();
    p.max_duration_min = j.at("max_duration_min").get<double>();
    p.window_in = j.at("window_in").get<std::size_t>();
    p.window_out = j.at("window_out").get<std::size_t>();
    return p;
}

} // namespace

void write_manifest(const std::string& path, const DatasetManifest& m) {
    json j;
    j["profile"] = profile_to_json(m.profile);
    j["source_hash"] = m.source_hash;
    j["shard_hash"] = m.shard_hash;
    j["counts"] = {{"records_parsed", m.n_records_parsed},
                   {"records_skipped", m.n_records_skipped},
                   {"records_filtered", m.n_records_filtered},
                   {"segments", m.n_segments},
                   {"windows", m.n_windows},
                   {"train_segments", m.n_train_segments},
                   {"val_segments", m.n_val_segments}};
    j["split_seed"] = m.split_seed;
    j["train_windows"] = m.train_windows;
    j["val_windows"] = m.val_windows;
    j["stats"] = {{"min", m.stats.min}, {"max", m.stats.max}};
    j["coastline_applied"] = m.coastline_applied;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

DatasetManifest read_manifest(const std::string& path, bool verify_shard) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    json j;
    in >> j;

    DatasetManifest m;
    m.profile = profile_from_json(j.at("profile"));
    m.source_hash = j.at("source_hash").get<std::uint64_t>();
    m.shard_hash = j.at("shard_hash").get<std::uint64_t>();
    const json& c = j.at("counts");
    m.n_records_parsed = c.at("records_parsed").get<std::size_t>();
    m.n_records_skipped = c.at("records_skipped").get<std::size_t>();
    m.n_records_filtered = c.at("records_filtered").get<std::size_t>();
    m.n_segments = c.at("segments").get<std::size_t>();
    m.n_windows = c.at("windows").get<std::size_t>();
    m.n_train_segments = c.at("train_segments").get<std::size_t>();
    m.n_val_segments = c.at("val_segments").get<std::size_t>();
    m.split_seed = j.at("split_seed").get<std::uint64_t>();
    m.train_windows = j.at("train_windows").get<std::vector<std::uint32_t>>();
    m.val_windows = j.at("val_windows").get<std::vector<std::uint32_t>>();
    m.stats.min = j.at("stats").at("min").get<std::array<double, 4>>();
    m.stats.max = j.at("stats").at("max").get<std::array<double, 4>>();
    m.coastline_applied = j.at("coastline_applied").get<bool>();

    if (verify_shard) {
        const std::size_t slash = path.find_last_of('/');
        const std::string dir = slash == std::string::npos ? "" : path.substr(0, slash + 1);
        const std::uint64_t actual = hash_file(dir + "windows.aisw");
        if (actual != m.shard_hash)
            throw HashMismatch("shard hash mismatch: manifest " + std::to_string(m.shard_hash) +
                               " vs file " + std::to_string(actual));
    }
    return m;
}

PipelineOutput run_pipeline(std::istream& csv, const PipelineProfile& profile,
                            const ColumnMap& columns, std::uint64_t split_seed,
                            const std::vector<Polyline>* coastline) {
    profile.validate();

    std::ostringstream buf;
    buf << csv.rdbuf();
    const std::string bytes = buf.str();

    PipelineOutput out;
    out.manifest.profile = profile;
    out.manifest.split_seed = split_seed;
    out.manifest.source_hash = fnv1a64(bytes.data(), bytes.size());
    out.manifest.coastline_applied = coastline != nullptr && !coastline->empty();

    std::istringstream stream(bytes);
    ParseResult parsed = parse_ais_csv(stream, columns);
    out.manifest.n_records_parsed = parsed.records.size();
    out.manifest.n_records_skipped = parsed.skipped;

    FilterResult filtered = filter_records(parsed.records, profile, coastline);
    out.manifest.n_records_filtered = filtered.removed();

    std::vector<VoyageSegment> raw = segment_voyages(std::move(filtered.records), profile);
    std::vector<VoyageSegment> resampled;
    for (const VoyageSegment& s : raw) {
        if (s.records.size() < std::max<std::size_t>(2, profile.min_raw_points)) continue;
        resampled.push_back(resample_linear(s, profile));
    }
    out.segments = enforce_length_and_split(resampled, profile);
    out.manifest.n_segments = out.segments.size();

    // 80/20 train/val split by segment, deterministic in the split seed
    std::vector<std::size_t> order(out.segments.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(split_seed);
    deterministic_shuffle(order, rng);
    const std::size_t n_train = out.segments.size() -
                                std::max<std::size_t>(out.segments.size() / 5,
                                                      out.segments.size() > 1 ? 1 : 0);
    std::vector<bool> is_train(out.segments.size(), false);
    for (std::size_t i = 0; i < n_train; ++i) is_train[order[i]] = true;

    std::vector<VoyageSegment> train_segments;
    for (std::size_t i = 0; i < out.segments.size(); ++i)
        if (is_train[i]) train_segments.push_back(out.segments[i]);
    out.manifest.n_train_segments = train_segments.size();
    out.manifest.n_val_segments = out.segments.size() - train_segments.size();
    if (!train_segments.empty()) out.manifest.stats = fit_minmax(train_segments);

    for (std::size_t i = 0; i < out.segments.size(); ++i) {
        std::vector<Window> ws = make_windows(out.segments[i], profile);
        for (Window& w : ws) {
            const auto idx = static_cast<std::uint32_t>(out.windows.size());
            (is_train[i] ? out.manifest.train_windows : out.manifest.val_windows).push_back(idx);
            out.windows.push_back(std::move(w));
        }
    }
    out.manifest.n_windows = out.windows.size();
    return out;
}

} // namespace aisllm
