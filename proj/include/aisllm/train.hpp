#pragma once

// Composite multi-task loss, AdamW with decoupled weight decay, cosine
// annealing with warm restarts, and the training loop with gradient
// accumulation, global-norm clipping, early stopping and best-checkpoint
// retention.

#include "aisllm/metrics.hpp"
#include "aisllm/model.hpp"
#include "aisllm/synth.hpp"

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace aisllm {

struct NonFiniteGradient : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonFiniteLoss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LossWeights {
    double traj = 2.0;
    double anom = 1.5;
    double coll = 1.5;
    double expl = 1.0;
};

struct OptimizerConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;
    double lr_max = 1e-4;
    double lr_min = 1e-6;
    std::size_t t0_epochs = 10;
    double clip_norm = 1.0;
    std::size_t accum_steps = 4;
    std::size_t batch_train = 8;
    std::size_t batch_eval = 16;
    std::size_t patience = 30;
    std::size_t max_epochs = 100;
    std::uint64_t seed = 42;
    double anomaly_w0 = 0.3; // class weight, normal
    double anomaly_w1 = 0.7; // class weight, anomaly
    double huber_delta = 0.1;
    // optional secondary stop conditions, off by default
    bool stop_on_val_accuracy = false;
    double val_accuracy_target = 0.9;
    bool stop_on_lr_floor = false;

    void validate() const;
};

/// Cosine annealing with warm restarts over fixed-length cycles of
/// t0_epochs; lr(0) = lr_max, lr(t0/2) = midpoint, lr(t0) restarts.
double lr_at(std::size_t epoch, const OptimizerConfig& c);

// ----- differentiable loss parts (per batch) -----

/// Mean absolute error over all elements, in normalized space.
template <typename T>
TensorT<T> loss_trajectory(GraphT<T>& g, TensorT<T> pred, TensorT<T> target);

/// Label-smoothed weighted cross entropy on softmax probabilities:
/// -sum_k w_y q_k log p_k with q = (1-eps) one-hot + eps/2.
template <typename T>
TensorT<T> loss_anomaly(GraphT<T>& g, TensorT<T> probabilities, int label,
                        double label_smoothing = 0.1, double w0 = 0.3, double w1 = 0.7);

/// Mean of (1 + 2 r_i) * Huber_delta(pred_i - r_i) over the batch.
template <typename T>
TensorT<T> loss_collision(GraphT<T>& g, TensorT<T> pred_risk, TensorT<T> target_risk,
                          double delta = 0.1);

/// Mean next-token cross entropy over unmasked positions.
template <typename T>
TensorT<T> loss_explanation(GraphT<T>& g, TensorT<T> logits, const std::vector<int>& targets,
                            const std::vector<double>& mask);

template <typename T>
TensorT<T> total_loss(GraphT<T>& g, TensorT<T> traj, TensorT<T> anom, TensorT<T> coll,
                      TensorT<T> expl, const LossWeights& w);

// ----- optimizer -----

template <typename T>
class AdamWT {
public:
    AdamWT(NamedTensors<T>& params, OptimizerConfig cfg);

    /// Scale all gradients so the global norm is at most clip_norm;
    /// returns the pre-clip norm.
    double clip_gradients();

    /// One decoupled-weight-decay Adam update. Throws NonFiniteGradient
    /// (and leaves parameters untouched) when any gradient is non-finite.
    void step(double lr);

    std::size_t aborted_steps() const { return aborted_; }

private:
    NamedTensors<T>* params_;
    OptimizerConfig cfg_;
    std::vector<std::vector<T>> m_, v_;
    std::size_t t_ = 0;
    std::size_t aborted_ = 0;
};

using AdamW = AdamWT<double>;
extern template class AdamWT<double>;
extern template class AdamWT<float>;

// ----- training loop -----

/// A window made model-ready: normalized tensors plus cached prompt and
/// explanation token streams.
template <typename T>
struct PreparedSampleT {
    TensorT<T> input;  // seq_in x 4, min-max normalized
    TensorT<T> target; // pred_len x 4, min-max normalized
    std::string enc_prompt;
    std::vector<int> lm_prompt;
    std::vector<int> lm_target;
    int label = 0;
    double cri = 0.0;
};

template <typename T>
std::vector<PreparedSampleT<T>> prepare_samples(const std::vector<LabeledWindow>& windows,
                                                const std::vector<std::uint32_t>& indices,
                                                const NormalizationStats& stats,
                                                const ModelConfig& cfg);

struct EpochStats {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_total = 0.0;
    double val_total = 0.0;
    double val_traj = 0.0;
    double val_anom = 0.0;
    double val_coll = 0.0;
    double val_expl = 0.0;
};

struct FitResult {
    std::vector<EpochStats> log;
    std::size_t best_epoch = 0;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t aborted_steps = 0;
    bool stopped_early = false;
};

struct FitConfig {
    OptimizerConfig opt;
    LossWeights weights;
};

/// Train with gradient accumulation; per-epoch validation decides early
/// stopping and which parameters are retained (the best-validation ones
/// are restored into the model before returning). Metrics stream one CSV
/// line per epoch to `log_out` when given.
template <typename T>
FitResult fit(ModelT<T>& model, const std::vector<PreparedSampleT<T>>& train,
              const std::vector<PreparedSampleT<T>>& val, const FitConfig& cfg,
              std::ostream* log_out = nullptr);

// ----- model evaluation against a labeled dataset -----

struct EvalReport {
    double ade_nm = 0.0;
    double fde_nm = 0.0;
    double mse = 0.0;
    double mae = 0.0;
    double baseline_ade_nm = 0.0;
    double baseline_fde_nm = 0.0;
    ClassificationMetrics anomaly;
    double cri_mae = 0.0;
    double cri_rmse = 0.0;
    double expl_ce = 0.0;
    double bleu4_avg = 0.0;
    double rouge_l_avg = 0.0;
    std::size_t text_samples = 0;
    std::size_t windows = 0;
};

/// Physical-space metrics over the given windows: displacement errors in
/// NM against the dead-reckoning baseline, anomaly P/R/F1, CRI regression
/// error, teacher-forced explanation CE and (on a capped subset) BLEU-4 /
/// ROUGE-L of greedily generated briefing text.
template <typename T>
EvalReport evaluate_model(const ModelT<T>& model, const std::vector<LabeledWindow>& windows,
                          const std::vector<std::uint32_t>& indices,
                          const NormalizationStats& stats, std::size_t text_eval_limit = 16,
                          double dt_min = 1.0);

extern template struct PreparedSampleT<double>;
extern template struct PreparedSampleT<float>;

} // namespace aisllm
