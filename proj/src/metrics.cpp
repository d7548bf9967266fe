#include "aisllm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace aisllm {

std::pair<double, double> ade_fde(const std::vector<GeoPoint>& pred,
                                  const std::vector<GeoPoint>& truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw ShapeMismatch("ade_fde: " + std::to_string(pred.size()) + " predictions vs " +
                            std::to_string(truth.size()) + " references");
    double sum = 0.0, last = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        last = haversine_nm(pred[i], truth[i]);
        sum += last;
    }
    return {sum / static_cast<double>(pred.size()), last};
}

std::pair<double, double> mse_mae(const std::vector<double>& pred,
                                  const std::vector<double>& target) {
    if (pred.size() != target.size() || pred.empty())
        throw ShapeMismatch("mse_mae: " + std::to_string(pred.size()) + " vs " +
                            std::to_string(target.size()) + " values");
    double se = 0.0, ae = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        se += d * d;
        ae += std::abs(d);
    }
    const double n = static_cast<double>(pred.size());
    return {se / n, ae / n};
}

ClassificationMetrics prf1(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw ShapeMismatch("prf1: label count mismatch");
    ClassificationMetrics m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0, t = truth[i] != 0;
        if (p && t) ++m.tp;
        else if (p && !t) ++m.fp;
        else if (!p && t) ++m.fn;
        else ++m.tn;
    }
    if (m.tp + m.fp == 0 || m.tp + m.fn == 0) m.zero_division = true;
    m.precision = m.tp + m.fp == 0 ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    m.recall = m.tp + m.fn == 0 ? 0.0 : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
    return m;
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::string join_ngram(const std::vector<std::string>& toks, std::size_t at, std::size_t n) {
    std::string key;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) key += '\x1f';
        key += toks[at + i];
    }
    return key;
}

} // namespace

double bleu4(const std::string& candidate, const std::string& reference, bool smooth) {
    const std::vector<std::string> cand = whitespace_tokens(candidate);
    const std::vector<std::string> ref = whitespace_tokens(reference);
    if (cand.empty() || ref.empty()) return 0.0;

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        std::map<std::string, int> ref_counts;
        if (ref.size() >= n)
            for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[join_ngram(ref, i, n)];
        std::map<std::string, int> cand_counts;
        if (cand.size() >= n)
            for (std::size_t i = 0; i + n <= cand.size(); ++i)
                ++cand_counts[join_ngram(cand, i, n)];

        double matched = 0.0;
        double total = cand.size() >= n ? static_cast<double>(cand.size() - n + 1) : 0.0;
        for (const auto& [gram, count] : cand_counts) {
            auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) matched += std::min(count, it->second);
        }
        if (smooth && n >= 2) {
            matched += 1.0;
            total += 1.0;
        }
        if (matched <= 0.0 || total <= 0.0) return 0.0;
        log_sum += std::log(matched / total);
    }
    const double c = static_cast<double>(cand.size());
    const double r = static_cast<double>(ref.size());
    const double brevity = c >= r ? 1.0 : std::exp(1.0 - r / c);
    return std::clamp(brevity * std::exp(log_sum / 4.0), 0.0, 1.0);
}

double rouge_l(const std::string& candidate, const std::string& reference, double beta) {
    const std::vector<std::string> cand = whitespace_tokens(candidate);
    const std::vector<std::string> ref = whitespace_tokens(reference);
    if (cand.empty() || ref.empty()) return 0.0;

    // LCS by dynamic programming
    std::vector<std::size_t> prev(ref.size() + 1, 0), cur(ref.size() + 1, 0);
    for (std::size_t i = 1; i <= cand.size(); ++i) {
        for (std::size_t j = 1; j <= ref.size(); ++j) {
            cur[j] = cand[i - 1] == ref[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const double lcs = static_cast<double>(prev[ref.size()]);
    if (lcs == 0.0) return 0.0;
    const double p = lcs / static_cast<double>(cand.size());
    const double r = lcs / static_cast<double>(ref.size());
    const double b2 = beta * beta;
    return std::clamp((1.0 + b2) * p * r / (r + b2 * p), 0.0, 1.0);
}

std::vector<GeoPoint> dead_reckon_baseline(const Window& w, std::size_t pred_len, double dt_min) {
    const std::size_t cur = w.n_in - 1;
    GeoPoint p(w.at(cur, 0), w.at(cur, 1));
    const double sog = w.at(cur, 2);
    const double cog = w.at(cur, 3);
    std::vector<GeoPoint> out;
    out.reserve(pred_len);
    for (std::size_t i = 0; i < pred_len; ++i) {
        p = dead_reckon(p, sog, cog, dt_min);
        out.push_back(p);
    }
    return out;
}

std::vector<GeoPoint> window_positions(const Window& w, std::size_t from, std::size_t count) {
    std::vector<GeoPoint> out;
    out.reserve(count);
    for (std::size_t i = from; i < from + count; ++i) out.emplace_back(w.at(i, 0), w.at(i, 1));
    return out;
}

} // namespace aisllm
