#include "aisllm/train.hpp"
#include "aisllm/briefing.hpp"
#include "aisllm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace aisllm {

void OptimizerConfig::validate() const {
    if (!(lr_min < lr_max)) throw std::invalid_argument("lr_min must be below lr_max");
    if (accum_steps < 1 || batch_train < 1 || batch_eval < 1)
        throw std::invalid_argument("batch/accumulation sizes must be >= 1");
    if (t0_epochs < 1) throw std::invalid_argument("t0_epochs must be >= 1");
    if (clip_norm <= 0) throw std::invalid_argument("clip_norm must be positive");
}

double lr_at(std::size_t epoch, const OptimizerConfig& c) {
    const std::size_t t_cycle = epoch % c.t0_epochs;
    const double phase = static_cast<double>(t_cycle) / static_cast<double>(c.t0_epochs);
    return c.lr_min + (c.lr_max - c.lr_min) / 2.0 * (1.0 + std::cos(kPi * phase));
}

template <typename T>
TensorT<T> loss_trajectory(GraphT<T>& g, TensorT<T> pred, TensorT<T> target) {
    if (pred.shape() != target.shape())
        throw ShapeMismatch("loss_trajectory: " + shape_str(pred.shape()) + " vs " +
                            shape_str(target.shape()));
    return g.mean_all(g.abs(g.sub(pred, target)));
}

template <typename T>
TensorT<T> loss_anomaly(GraphT<T>& g, TensorT<T> probabilities, int label, double label_smoothing,
                        double w0, double w1) {
    if (probabilities.size() != 2)
        throw ShapeMismatch("loss_anomaly: need 2 probabilities, got " +
                            shape_str(probabilities.shape()));
    const double wy = label == 0 ? w0 : w1;
    TensorT<T> qw({2});
    for (int k = 0; k < 2; ++k) {
        const double q = label_smoothing / 2.0 + (k == label ? 1.0 - label_smoothing : 0.0);
        qw[static_cast<std::size_t>(k)] = static_cast<T>(wy * q);
    }
    return g.scale(g.sum_all(g.mul(g.log(probabilities), qw)), -1.0);
}

template <typename T>
TensorT<T> loss_collision(GraphT<T>& g, TensorT<T> pred_risk, TensorT<T> target_risk,
                          double delta) {
    if (pred_risk.shape() != target_risk.shape())
        throw ShapeMismatch("loss_collision: " + shape_str(pred_risk.shape()) + " vs " +
                            shape_str(target_risk.shape()));
    TensorT<T> w(target_risk.shape());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = static_cast<T>(1.0 + 2.0 * static_cast<double>(target_risk[i]));
    TensorT<T> h = g.huber(g.sub(pred_risk, target_risk), delta);
    return g.mean_all(g.mul(h, w));
}

template <typename T>
TensorT<T> loss_explanation(GraphT<T>& g, TensorT<T> logits, const std::vector<int>& targets,
                            const std::vector<double>& mask) {
    return g.cross_entropy_logits(logits, targets, 0.0, &mask);
}

template <typename T>
TensorT<T> total_loss(GraphT<T>& g, TensorT<T> traj, TensorT<T> anom, TensorT<T> coll,
                      TensorT<T> expl, const LossWeights& w) {
    return g.add(g.add(g.scale(traj, w.traj), g.scale(anom, w.anom)),
                 g.add(g.scale(coll, w.coll), g.scale(expl, w.expl)));
}

template TensorT<double> loss_trajectory(GraphT<double>&, TensorT<double>, TensorT<double>);
template TensorT<float> loss_trajectory(GraphT<float>&, TensorT<float>, TensorT<float>);
template TensorT<double> loss_anomaly(GraphT<double>&, TensorT<double>, int, double, double,
                                      double);
template TensorT<float> loss_anomaly(GraphT<float>&, TensorT<float>, int, double, double, double);
template TensorT<double> loss_collision(GraphT<double>&, TensorT<double>, TensorT<double>, double);
template TensorT<float> loss_collision(GraphT<float>&, TensorT<float>, TensorT<float>, double);
template TensorT<double> loss_explanation(GraphT<double>&, TensorT<double>,
                                          const std::vector<int>&, const std::vector<double>&);
template TensorT<float> loss_explanation(GraphT<float>&, TensorT<float>, const std::vector<int>&,
                                         const std::vector<double>&);
template TensorT<double> total_loss(GraphT<double>&, TensorT<double>, TensorT<double>,
                                    TensorT<double>, TensorT<double>, const LossWeights&);
template TensorT<float> total_loss(GraphT<float>&, TensorT<float>, TensorT<float>, TensorT<float>,
                                   TensorT<float>, const LossWeights&);

// ---------------------------------------------------------------------------

template <typename T>
AdamWT<T>::AdamWT(NamedTensors<T>& params, OptimizerConfig cfg)
    : params_(&params), cfg_(std::move(cfg)) {
    cfg_.validate();
    for (auto& [name, t] : *params_) {
        m_.emplace_back(t.size(), T(0));
        v_.emplace_back(t.size(), T(0));
    }
}

template <typename T>
double AdamWT<T>::clip_gradients() {
    double norm_sq = 0.0;
    for (auto& [name, t] : *params_) {
        if (!t.requires_grad()) continue;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double gi = static_cast<double>(t.grad()[i]);
            norm_sq += gi * gi;
        }
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > cfg_.clip_norm && norm > 0.0) {
        const T scale = static_cast<T>(cfg_.clip_norm / norm);
        for (auto& [name, t] : *params_) {
            if (!t.requires_grad()) continue;
            for (std::size_t i = 0; i < t.size(); ++i) t.grad()[i] *= scale;
        }
    }
    return norm;
}

template <typename T>
void AdamWT<T>::step(double lr) {
    for (auto& [name, t] : *params_) {
        if (!t.requires_grad()) continue;
        for (std::size_t i = 0; i < t.size(); ++i)
            if (!std::isfinite(static_cast<double>(t.grad()[i]))) {
                ++aborted_;
                throw NonFiniteGradient("non-finite gradient in " + name);
            }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    std::size_t slot = 0;
    for (auto& [name, t] : *params_) {
        std::vector<T>& m = m_[slot];
        std::vector<T>& v = v_[slot];
        ++slot;
        if (!t.requires_grad()) continue;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double gi = static_cast<double>(t.grad()[i]);
            const double mi = cfg_.beta1 * static_cast<double>(m[i]) + (1.0 - cfg_.beta1) * gi;
            const double vi = cfg_.beta2 * static_cast<double>(v[i]) + (1.0 - cfg_.beta2) * gi * gi;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            double p = static_cast<double>(t[i]);
            p -= lr * cfg_.weight_decay * p; // decoupled decay
            p -= lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            t[i] = static_cast<T>(p);
        }
    }
}

template class AdamWT<double>;
template class AdamWT<float>;

// ---------------------------------------------------------------------------

template <typename T>
std::vector<PreparedSampleT<T>> prepare_samples(const std::vector<LabeledWindow>& windows,
                                                const std::vector<std::uint32_t>& indices,
                                                const NormalizationStats& stats,
                                                const ModelConfig& cfg) {
    std::vector<PreparedSampleT<T>> out;
    out.reserve(indices.size());
    for (std::uint32_t idx : indices) {
        const LabeledWindow& lw = windows[idx];
        PreparedSampleT<T> s;
        s.input = TensorT<T>({cfg.seq_in, cfg.n_vars});
        s.target = TensorT<T>({cfg.pred_len, cfg.n_vars});
        for (std::size_t r = 0; r < cfg.seq_in; ++r)
            for (std::size_t v = 0; v < 4; ++v)
                s.input[r * 4 + v] =
                    static_cast<T>(apply_minmax_value(lw.window.at(r, v), stats, v));
        for (std::size_t r = 0; r < cfg.pred_len; ++r)
            for (std::size_t v = 0; v < 4; ++v)
                s.target[r * 4 + v] = static_cast<T>(
                    apply_minmax_value(lw.window.at(cfg.seq_in + r, v), stats, v));
        s.enc_prompt = build_prompt(lw.window);
        s.lm_prompt = tokenize_bytes(build_prompt(lw.window, truth_outputs(lw)));
        s.lm_target = tokenize_bytes(lw.explanation);
        s.label = lw.label;
        s.cri = lw.cri_target;
        out.push_back(std::move(s));
    }
    return out;
}

template struct PreparedSampleT<double>;
template struct PreparedSampleT<float>;
template std::vector<PreparedSampleT<double>> prepare_samples<double>(
    const std::vector<LabeledWindow>&, const std::vector<std::uint32_t>&,
    const NormalizationStats&, const ModelConfig&);
template std::vector<PreparedSampleT<float>> prepare_samples<float>(
    const std::vector<LabeledWindow>&, const std::vector<std::uint32_t>&,
    const NormalizationStats&, const ModelConfig&);

namespace {

struct BatchParts {
    double traj = 0.0, anom = 0.0, coll = 0.0, expl = 0.0, total = 0.0;
};

// Forward a run of samples in one graph and return the weighted batch loss
// plus part values. `scale_to` rescales the mean so accumulated micro
// batches reproduce one large-batch mean exactly.
template <typename T>
TensorT<T> batch_loss(GraphT<T>& g, const ModelT<T>& model,
                      const std::vector<PreparedSampleT<T>>& samples, std::size_t begin,
                      std::size_t count, const FitConfig& cfg, bool training,
                      std::uint64_t* sample_counter, BatchParts* parts) {
    std::vector<TensorT<T>> traj_parts, anom_parts, coll_preds, expl_parts;
    TensorT<T> coll_targets({count});
    for (std::size_t k = 0; k < count; ++k) {
        const PreparedSampleT<T>& s = samples[begin + k];
        const std::uint64_t step = (*sample_counter)++;
        ForwardResultT<T> fwd = model.forward(g, s.input, s.enc_prompt, training, step);
        traj_parts.push_back(loss_trajectory(g, fwd.traj, s.target));
        anom_parts.push_back(loss_anomaly(g, fwd.anomaly, s.label, model.config().label_smoothing,
                                          cfg.opt.anomaly_w0, cfg.opt.anomaly_w1));
        coll_preds.push_back(fwd.cri);
        coll_targets[k] = static_cast<T>(s.cri);
        LmOutputT<T> lm =
            model.lm_forward_teacher_forced(g, s.lm_prompt, s.lm_target, fwd.pooled, training, step);
        expl_parts.push_back(loss_explanation(g, lm.logits, lm.next_tokens, lm.loss_mask));
    }
    auto mean_of = [&](std::vector<TensorT<T>>& v) {
        TensorT<T> acc = v[0];
        for (std::size_t i = 1; i < v.size(); ++i) acc = g.add(acc, v[i]);
        return g.scale(acc, 1.0 / static_cast<double>(v.size()));
    };
    TensorT<T> traj = mean_of(traj_parts);
    TensorT<T> anom = mean_of(anom_parts);
    TensorT<T> coll = loss_collision(g, g.reshape(g.concat(coll_preds, 0), {count}), coll_targets,
                                     cfg.opt.huber_delta);
    TensorT<T> expl = mean_of(expl_parts);
    TensorT<T> total = total_loss(g, traj, anom, coll, expl, cfg.weights);
    if (parts != nullptr) {
        parts->traj = static_cast<double>(traj.item());
        parts->anom = static_cast<double>(anom.item());
        parts->coll = static_cast<double>(coll.item());
        parts->expl = static_cast<double>(expl.item());
        parts->total = static_cast<double>(total.item());
    }
    return total;
}

} // namespace

template <typename T>
FitResult fit(ModelT<T>& model, const std::vector<PreparedSampleT<T>>& train,
              const std::vector<PreparedSampleT<T>>& val, const FitConfig& cfg,
              std::ostream* log_out) {
    cfg.opt.validate();
    if (train.empty()) throw EmptyInput("fit: empty training set");

    AdamWT<T> opt(model.params(), cfg.opt);
    FitResult result;
    std::vector<std::vector<T>> best_params;
    std::uint64_t sample_counter = 1;
    std::size_t since_improvement = 0;

    auto snapshot = [&]() {
        best_params.clear();
        for (auto& [name, t] : model.params())
            best_params.emplace_back(t.data(), t.data() + t.size());
    };
    auto restore = [&]() {
        if (best_params.empty()) return;
        std::size_t slot = 0;
        for (auto& [name, t] : model.params()) {
            std::copy(best_params[slot].begin(), best_params[slot].end(), t.data());
            ++slot;
        }
    };

    for (std::size_t epoch = 0; epoch < cfg.opt.max_epochs; ++epoch) {
        const double lr = lr_at(epoch, cfg.opt);
        std::vector<std::size_t> order(train.size());
        std::iota(order.begin(), order.end(), 0);
        SplitMix64 shuffle_rng(cfg.opt.seed + epoch * 0x9e3779b97f4a7c15ull);
        deterministic_shuffle(order, shuffle_rng);
        std::vector<PreparedSampleT<T>> shuffled;
        shuffled.reserve(train.size());
        for (std::size_t i : order) shuffled.push_back(train[i]);

        double train_total = 0.0;
        std::size_t train_count = 0;
        const std::size_t step_span = cfg.opt.batch_train * cfg.opt.accum_steps;
        for (std::size_t pos = 0; pos < shuffled.size(); pos += step_span) {
            const std::size_t span = std::min(step_span, shuffled.size() - pos);
            model.zero_grads();
            for (std::size_t micro = 0; micro < span; micro += cfg.opt.batch_train) {
                const std::size_t count = std::min(cfg.opt.batch_train, span - micro);
                GraphT<T> g;
                BatchParts parts;
                TensorT<T> micro_total = batch_loss(g, model, shuffled, pos + micro, count, cfg,
                                                    true, &sample_counter, &parts);
                if (!std::isfinite(parts.total))
                    throw NonFiniteLoss("training loss became non-finite at epoch " +
                                        std::to_string(epoch));
                train_total += parts.total * static_cast<double>(count);
                train_count += count;
                // the weighted sum over micro batches equals the span mean
                TensorT<T> contribution =
                    g.scale(micro_total, static_cast<double>(count) / static_cast<double>(span));
                if (contribution.requires_grad()) g.backward(contribution);
            }
            opt.clip_gradients();
            try {
                opt.step(lr);
            } catch (const NonFiniteGradient&) {
                model.zero_grads();
            }
        }

        // validation pass
        double vt = 0, va = 0, vc = 0, ve = 0, vtotal = 0;
        std::size_t val_count = 0;
        std::size_t anom_correct = 0;
        for (std::size_t pos = 0; pos < val.size(); pos += cfg.opt.batch_eval) {
            const std::size_t count = std::min(cfg.opt.batch_eval, val.size() - pos);
            GraphT<T> g;
            g.recording = false;
            BatchParts parts;
            std::uint64_t eval_counter = 0;
            batch_loss(g, model, val, pos, count, cfg, false, &eval_counter, &parts);
            vt += parts.traj * static_cast<double>(count);
            va += parts.anom * static_cast<double>(count);
            vc += parts.coll * static_cast<double>(count);
            ve += parts.expl * static_cast<double>(count);
            vtotal += parts.total * static_cast<double>(count);
            val_count += count;
            if (cfg.opt.stop_on_val_accuracy) {
                for (std::size_t k = 0; k < count; ++k) {
                    GraphT<T> g2;
                    g2.recording = false;
                    std::uint64_t c2 = 0;
                    const PreparedSampleT<T>& s = val[pos + k];
                    ForwardResultT<T> fwd = model.forward(g2, s.input, s.enc_prompt, false, c2);
                    const int pred = fwd.anomaly[1] > fwd.anomaly[0] ? 1 : 0;
                    anom_correct += pred == s.label ? 1 : 0;
                }
            }
        }
        const double denom = val_count > 0 ? static_cast<double>(val_count) : 1.0;

        EpochStats es;
        es.epoch = epoch;
        es.lr = lr;
        es.train_total = train_count > 0 ? train_total / static_cast<double>(train_count) : 0.0;
        es.val_total = vtotal / denom;
        es.val_traj = vt / denom;
        es.val_anom = va / denom;
        es.val_coll = vc / denom;
        es.val_expl = ve / denom;
        result.log.push_back(es);
        if (log_out != nullptr) {
            (*log_out) << epoch << ", " << lr << ", " << es.train_total << ", " << es.val_total
                       << ", " << es.val_traj << ", " << es.val_anom << ", " << es.val_coll << ", "
                       << es.val_expl << "\n";
            log_out->flush();
        }

        if (val_count == 0 || es.val_total < result.best_val) {
            result.best_val = es.val_total;
            result.best_epoch = epoch;
            since_improvement = 0;
            snapshot();
        } else {
            ++since_improvement;
            if (since_improvement >= cfg.opt.patience) {
                result.stopped_early = true;
                break;
            }
        }
        if (cfg.opt.stop_on_val_accuracy && val_count > 0 &&
            static_cast<double>(anom_correct) / denom >= cfg.opt.val_accuracy_target)
            break;
        if (cfg.opt.stop_on_lr_floor && lr <= cfg.opt.lr_min + 1e-18) break;
    }

    restore();
    result.aborted_steps = opt.aborted_steps();
    return result;
}

template FitResult fit<double>(ModelT<double>&, const std::vector<PreparedSampleT<double>>&,
                               const std::vector<PreparedSampleT<double>>&, const FitConfig&,
                               std::ostream*);
template FitResult fit<float>(ModelT<float>&, const std::vector<PreparedSampleT<float>>&,
                              const std::vector<PreparedSampleT<float>>&, const FitConfig&,
                              std::ostream*);

// ---------------------------------------------------------------------------

template <typename T>
EvalReport evaluate_model(const ModelT<T>& model, const std::vector<LabeledWindow>& windows,
                          const std::vector<std::uint32_t>& indices,
                          const NormalizationStats& stats, std::size_t text_eval_limit,
                          double dt_min) {
    const ModelConfig& cfg = model.config();
    const std::vector<PreparedSampleT<T>> samples =
        prepare_samples<T>(windows, indices, stats, cfg);

    EvalReport rep;
    rep.windows = samples.size();
    std::vector<int> pred_labels, true_labels;
    std::vector<double> pred_values, true_values;
    double ade_sum = 0, fde_sum = 0, base_ade_sum = 0, base_fde_sum = 0;
    double cri_ae = 0, cri_se = 0, expl_ce_sum = 0;

    for (std::size_t i = 0; i < samples.size(); ++i) {
        const PreparedSampleT<T>& s = samples[i];
        const LabeledWindow& lw = windows[indices[i]];
        GraphT<T> g;
        g.recording = false;
        std::uint64_t counter = 0;
        ForwardResultT<T> fwd = model.forward(g, s.input, s.enc_prompt, false, counter);

        std::vector<GeoPoint> pred_pos;
        pred_pos.reserve(cfg.pred_len);
        for (std::size_t r = 0; r < cfg.pred_len; ++r) {
            double vals[4];
            for (std::size_t v = 0; v < 4; ++v) {
                vals[v] = invert_minmax_value(static_cast<double>(fwd.traj.at(r, v)), stats, v);
                pred_values.push_back(vals[v]);
                true_values.push_back(lw.window.at(cfg.seq_in + r, v));
            }
            pred_pos.emplace_back(std::clamp(vals[0], -90.0, 90.0),
                                  std::clamp(vals[1], -180.0, 180.0));
        }
        const std::vector<GeoPoint> truth = window_positions(lw.window, cfg.seq_in, cfg.pred_len);
        const auto [ade, fde] = ade_fde(pred_pos, truth);
        ade_sum += ade;
        fde_sum += fde;
        const std::vector<GeoPoint> base = dead_reckon_baseline(lw.window, cfg.pred_len, dt_min);
        const auto [bade, bfde] = ade_fde(base, truth);
        base_ade_sum += bade;
        base_fde_sum += bfde;

        pred_labels.push_back(fwd.anomaly[1] > fwd.anomaly[0] ? 1 : 0);
        true_labels.push_back(s.label);

        const double cri_err = static_cast<double>(fwd.cri[0]) - s.cri;
        cri_ae += std::abs(cri_err);
        cri_se += cri_err * cri_err;

        LmOutputT<T> lm =
            model.lm_forward_teacher_forced(g, s.lm_prompt, s.lm_target, fwd.pooled, false, 0);
        GraphT<T> g2;
        g2.recording = false;
        expl_ce_sum += static_cast<double>(
            g2.cross_entropy_logits(lm.logits, lm.next_tokens, 0.0, &lm.loss_mask).item());

        if (rep.text_samples < text_eval_limit) {
            TaskOutputs outputs;
            outputs.pred_lat =
                invert_minmax_value(static_cast<double>(fwd.traj.at(cfg.pred_len - 1, 0)), stats, 0);
            outputs.pred_lon =
                invert_minmax_value(static_cast<double>(fwd.traj.at(cfg.pred_len - 1, 1)), stats, 1);
            outputs.pred_sog =
                invert_minmax_value(static_cast<double>(fwd.traj.at(cfg.pred_len - 1, 2)), stats, 2);
            outputs.pred_cog =
                invert_minmax_value(static_cast<double>(fwd.traj.at(cfg.pred_len - 1, 3)), stats, 3);
            outputs.anomalous = pred_labels.back() == 1;
            outputs.cri = static_cast<double>(fwd.cri[0]);
            const std::vector<int> gen_prompt =
                tokenize_bytes(build_prompt(lw.window, outputs));
            const std::vector<int> generated =
                model.lm_generate(gen_prompt, fwd.pooled, s.lm_target.size() + 32);
            const std::string text = detokenize_bytes(generated);
            rep.bleu4_avg += bleu4(text, lw.explanation);
            rep.rouge_l_avg += rouge_l(text, lw.explanation);
            ++rep.text_samples;
        }
    }

    const double n = samples.empty() ? 1.0 : static_cast<double>(samples.size());
    rep.ade_nm = ade_sum / n;
    rep.fde_nm = fde_sum / n;
    rep.baseline_ade_nm = base_ade_sum / n;
    rep.baseline_fde_nm = base_fde_sum / n;
    const auto [mse, mae] = samples.empty() ? std::pair<double, double>{0.0, 0.0}
                                            : mse_mae(pred_values, true_values);
    rep.mse = mse;
    rep.mae = mae;
    rep.anomaly = prf1(pred_labels, true_labels);
    rep.cri_mae = cri_ae / n;
    rep.cri_rmse = std::sqrt(cri_se / n);
    rep.expl_ce = expl_ce_sum / n;
    if (rep.text_samples > 0) {
        rep.bleu4_avg /= static_cast<double>(rep.text_samples);
        rep.rouge_l_avg /= static_cast<double>(rep.text_samples);
    }
    return rep;
}

template EvalReport evaluate_model<double>(const ModelT<double>&,
                                           const std::vector<LabeledWindow>&,
                                           const std::vector<std::uint32_t>&,
                                           const NormalizationStats&, std::size_t, double);
template EvalReport evaluate_model<float>(const ModelT<float>&, const std::vector<LabeledWindow>&,
                                          const std::vector<std::uint32_t>&,
                                          const NormalizationStats&, std::size_t, double);

} // namespace aisllm
