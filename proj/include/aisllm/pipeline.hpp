#pragma once

// AIS ingest and preprocessing: CSV parsing, filtering, voyage segmentation,
// resampling to a uniform grid, length enforcement, min-max normalization,
// sliding windows and the dataset manifest.

#include "aisllm/geo.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aisllm {

enum class NavStatus { underway, moored, anchored, other, unknown };

struct AisRecord {
    double timestamp = 0.0; // seconds since epoch
    std::int64_t mmsi = 0;
    KinematicState state;
    NavStatus nav_status = NavStatus::unknown;
};

/// Preprocessing parameters. Two built-in profiles: piraeus (1-min grid,
/// 30-min gap split, 150-point sliding-window split) and dma (10-min grid,
/// 2-h gap split, 20-h chunk split, raw-message and duration thresholds).
struct PipelineProfile {
    std::string name = "piraeus";
    double max_sog_kn = 30.0;
    double coast_margin_nm = 1.0;
    double gap_split_min = 30.0;
    double resample_interval_min = 1.0;
    std::size_t min_points = 42;     // post-resample minimum segment length
    std::size_t min_raw_points = 2;  // pre-resample minimum message count
    double min_duration_min = 0.0;
    std::size_t max_points = 150;    // piraeus: sliding-window chunk size
    double max_duration_min = 0.0;   // dma: consecutive-chunk split threshold (0 = off)
    std::size_t window_in = 18;
    std::size_t window_out = 24;

    static PipelineProfile piraeus();
    static PipelineProfile dma();

    std::size_t window_len() const { return window_in + window_out; }
    void validate() const;
};

/// A contiguous single-vessel track. After resampling, timestamps lie on a
/// uniform grid spaced resample_interval_min apart.
struct VoyageSegment {
    std::int64_t mmsi = 0;
    std::vector<AisRecord> records;

    double start_time() const { return records.empty() ? 0.0 : records.front().timestamp; }
    double duration_min() const {
        return records.empty() ? 0.0 : (records.back().timestamp - records.front().timestamp) / 60.0;
    }
};

/// Per-variable train-split min/max for the four model variables
/// (lat, lon, sog, cog), in that order.
struct NormalizationStats {
    std::array<double, 4> min{};
    std::array<double, 4> max{};
};

/// A model sample: window_in input steps and window_out target steps of
/// (lat, lon, sog, cog), stored row-major as one (in+out) x 4 block.
struct Window {
    std::int64_t mmsi = 0;
    std::int64_t start_ts = 0; // seconds since epoch of the first step
    std::size_t n_in = 18;
    std::size_t n_out = 24;
    std::vector<double> values; // (n_in + n_out) x 4 row-major

    std::size_t steps() const { return n_in + n_out; }
    double at(std::size_t step, std::size_t var) const { return values[step * 4 + var]; }
    double& at(std::size_t step, std::size_t var) { return values[step * 4 + var]; }
};

struct DatasetManifest {
    PipelineProfile profile;
    std::uint64_t source_hash = 0;     // FNV-1a of the input bytes
    std::uint64_t shard_hash = 0;      // FNV-1a of the shard file bytes
    std::size_t n_records_parsed = 0;
    std::size_t n_records_skipped = 0; // malformed rows
    std::size_t n_records_filtered = 0;
    std::size_t n_segments = 0;        // final voyage segments
    std::size_t n_windows = 0;
    std::uint64_t split_seed = 42;
    std::vector<std::uint32_t> train_windows; // indices into the shard
    std::vector<std::uint32_t> val_windows;
    std::size_t n_train_segments = 0;
    std::size_t n_val_segments = 0;
    NormalizationStats stats;
    bool coastline_applied = false;
};

struct MissingColumn : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateVariable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct HashMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Column roles -> CSV header names. Built-in schemas: "piraeus"
/// (t/shipid/lat/lon/speed/course, epoch-millisecond timestamps) and
/// "dma" (# Timestamp/MMSI/Latitude/..., dd/mm/yyyy HH:MM:SS timestamps).
using ColumnMap = std::map<std::string, std::string>;

ColumnMap builtin_column_map(const std::string& schema);

struct ParseResult {
    std::vector<AisRecord> records;
    std::size_t skipped = 0;
};

/// Parse an AIS CSV stream. Malformed rows are counted and skipped; a
/// mapped column missing from the header raises MissingColumn and zero
/// valid rows raises EmptyInput.
ParseResult parse_ais_csv(std::istream& in, const ColumnMap& columns);

/// One coastline polyline as lon/lat vertices.
using Polyline = std::vector<GeoPoint>;

/// Load polylines from a text file: "lon lat" per vertex, blank line
/// between polylines.
std::vector<Polyline> load_coastline(std::istream& in);

struct FilterResult {
    std::vector<AisRecord> records;
    std::size_t removed_sog = 0;
    std::size_t removed_status = 0;
    std::size_t removed_coast = 0;

    std::size_t removed() const { return removed_sog + removed_status + removed_coast; }
};

/// Drop records with sog > max_sog (strict), moored/anchored status, and
/// (when a coastline is supplied) points within coast_margin of any polyline.
/// Surviving records keep their order.
FilterResult filter_records(const std::vector<AisRecord>& records, const PipelineProfile& profile,
                            const std::vector<Polyline>* coastline = nullptr);

/// Group records by mmsi and split where the time gap exceeds
/// profile.gap_split_min. Sorts by (mmsi, timestamp) first.
std::vector<VoyageSegment> segment_voyages(std::vector<AisRecord> records,
                                           const PipelineProfile& profile);

/// Resample a raw segment onto the uniform grid from ceil(start) to
/// floor(end) at the profile interval. lat/lon/sog interpolate linearly in
/// time; cog interpolates along the shortest angular path. Throws TooShort
/// for segments with fewer than 2 points.
VoyageSegment resample_linear(const VoyageSegment& raw, const PipelineProfile& profile);

/// Drop resampled segments below min_points/min_duration and split long
/// ones: piraeus slides a max_points chunk with stride
/// max_points - window_len; dma cuts consecutive chunks of max_duration.
std::vector<VoyageSegment> enforce_length_and_split(const std::vector<VoyageSegment>& segments,
                                                    const PipelineProfile& profile);

/// Min/max per variable over the training split. Throws DegenerateVariable
/// when a variable is constant.
NormalizationStats fit_minmax(const std::vector<VoyageSegment>& train_segments);
NormalizationStats fit_minmax_windows(const std::vector<Window>& train_windows);

/// (x - min) / (max - min) per variable; values outside the training range
/// map outside [0, 1].
void apply_minmax(Window& w, const NormalizationStats& stats);
void invert_minmax(Window& w, const NormalizationStats& stats);
double apply_minmax_value(double x, const NormalizationStats& stats, std::size_t var);
double invert_minmax_value(double x, const NormalizationStats& stats, std::size_t var);

/// All stride-1 windows of window_len steps. A segment shorter than
/// window_len yields none.
std::vector<Window> make_windows(const VoyageSegment& segment, const PipelineProfile& profile);

/// FNV-1a 64-bit over a byte buffer; the manifest content hash.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 14695981039346656037ull);
std::uint64_t hash_file(const std::string& path);

// Shard format: magic "AISW", version u32, count u64, then per window
// mmsi u64, start_ts i64, (window_len x 4) float64 row-major, little-endian.
void write_windows_shard(const std::string& path, const std::vector<Window>& windows);
std::vector<Window> read_windows_shard(const std::string& path);

void write_manifest(const std::string& path, const DatasetManifest& manifest);

/// Read a manifest and verify the recorded shard hash against the shard
/// file next to it. Throws HashMismatch when the shard was modified.
DatasetManifest read_manifest(const std::string& path, bool verify_shard = true);

/// The whole preprocessing chain: parse, filter, segment, resample,
/// enforce/split, split train/val by segment, fit stats, window.
struct PipelineOutput {
    std::vector<VoyageSegment> segments;
    std::vector<Window> windows; // physical units; normalize with manifest.stats
    DatasetManifest manifest;
};

PipelineOutput run_pipeline(std::istream& csv, const PipelineProfile& profile,
                            const ColumnMap& columns, std::uint64_t split_seed = 42,
                            const std::vector<Polyline>* coastline = nullptr);

} // namespace aisllm
