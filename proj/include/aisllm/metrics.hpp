#pragma once

// Evaluation metrics: displacement errors in nautical miles, regression
// errors, classification scores, BLEU-4 and ROUGE-L.

#include "aisllm/geo.hpp"
#include "aisllm/pipeline.hpp"
#include "aisllm/tensor.hpp"

#include <string>
#include <vector>

namespace aisllm {

struct TrajectoryMetrics {
    double ade_nm = 0.0;
    double fde_nm = 0.0;
    double mse = 0.0;
    double mae = 0.0;
};

struct ClassificationMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    bool zero_division = false; // a precision/recall denominator was zero
};

struct TextMetrics {
    double bleu4 = 0.0;
    double rouge_l = 0.0;
};

/// Mean and final great-circle displacement between predicted and true
/// positions (degrees in, nautical miles out).
std::pair<double, double> ade_fde(const std::vector<GeoPoint>& pred,
                                  const std::vector<GeoPoint>& truth);

/// Elementwise mean squared / absolute error over flat value arrays.
std::pair<double, double> mse_mae(const std::vector<double>& pred,
                                  const std::vector<double>& target);

/// Binary precision/recall/F1 with the anomaly class positive; zero
/// denominators yield 0 with the zero_division flag set.
ClassificationMetrics prf1(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Geometric mean of modified n-gram precisions (n = 1..4) with brevity
/// penalty; smoothing adds one to numerator and denominator for n >= 2.
double bleu4(const std::string& candidate, const std::string& reference, bool smooth = true);

/// LCS F-measure with recall weighting beta (default 1.2).
double rouge_l(const std::string& candidate, const std::string& reference, double beta = 1.2);

/// Constant-velocity dead reckoning from the window's last input fix;
/// the comparison baseline for learned trajectory prediction.
std::vector<GeoPoint> dead_reckon_baseline(const Window& window, std::size_t pred_len,
                                           double dt_min);

std::vector<GeoPoint> window_positions(const Window& window, std::size_t from, std::size_t count);

} // namespace aisllm
