#include "aisllm/model.hpp"
#include "aisllm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include <json.hpp>

namespace aisllm {

using json = nlohmann::json;

std::string fusion_name(FusionMode m) {
    switch (m) {
        case FusionMode::attention: return "attention";
        case FusionMode::concat: return "concat";
        case FusionMode::add: return "add";
    }
    return "attention";
}

FusionMode fusion_from_name(const std::string& name) {
    if (name == "attention") return FusionMode::attention;
    if (name == "concat") return FusionMode::concat;
    if (name == "add") return FusionMode::add;
    throw std::invalid_argument("unknown fusion mode: " + name);
}

void ModelConfig::validate() const {
    if (d_model == 0 || d_model % n_heads != 0)
        throw std::invalid_argument("d_model must be a positive multiple of n_heads");
    if (d_prompt == 0 || d_prompt % n_heads != 0)
        throw std::invalid_argument("d_prompt must be a positive multiple of n_heads");
    if (scales.empty()) throw std::invalid_argument("scales must be non-empty");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] == 0) throw std::invalid_argument("scales must be positive");
        if (i > 0 && scales[i] <= scales[i - 1])
            throw std::invalid_argument("scales must be strictly increasing");
    }
    if (n_vars == 0 || seq_in == 0 || pred_len == 0 || vocab < 258)
        throw std::invalid_argument("invalid model dimensions");
}

std::string ModelConfig::to_json() const {
    json j{{"n_vars", n_vars},
           {"seq_in", seq_in},
           {"pred_len", pred_len},
           {"d_model", d_model},
           {"n_heads", n_heads},
           {"n_layers", n_layers},
           {"scales", scales},
           {"d_prompt", d_prompt},
           {"prompt_layers", prompt_layers},
           {"lm_layers", lm_layers},
           {"vocab", vocab},
           {"max_text_bytes", max_text_bytes},
           {"dropout", dropout},
           {"label_smoothing", label_smoothing},
           {"use_multiscale", use_multiscale},
           {"use_alignment", use_alignment},
           {"fusion", fusion_name(fusion)}};
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    const json j = json::parse(text);
    ModelConfig c;
    c.n_vars = j.at("n_vars").get<std::size_t>();
    c.seq_in = j.at("seq_in").get<std::size_t>();
    c.pred_len = j.at("pred_len").get<std::size_t>();
    c.d_model = j.at("d_model").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.scales = j.at("scales").get<std::vector<std::size_t>>();
    c.d_prompt = j.at("d_prompt").get<std::size_t>();
    c.prompt_layers = j.at("prompt_layers").get<std::size_t>();
    c.lm_layers = j.at("lm_layers").get<std::size_t>();
    c.vocab = j.at("vocab").get<std::size_t>();
    c.max_text_bytes = j.at("max_text_bytes").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    c.label_smoothing = j.at("label_smoothing").get<double>();
    c.use_multiscale = j.at("use_multiscale").get<bool>();
    c.use_alignment = j.at("use_alignment").get<bool>();
    c.fusion = fusion_from_name(j.at("fusion").get<std::string>());
    return c;
}

std::vector<int> tokenize_bytes(const std::string& text) {
    std::vector<int> out;
    out.reserve(text.size());
    for (unsigned char c : text) out.push_back(static_cast<int>(c));
    return out;
}

std::string detokenize_bytes(const std::vector<int>& tokens) {
    std::string out;
    out.reserve(tokens.size());
    for (int t : tokens)
        if (t >= 0 && t < 256) out += static_cast<char>(t);
    return out;
}

template <typename T>
TensorT<T> compute_sinusoidal_pe(std::size_t len, std::size_t dim, double scale) {
    TensorT<T> pe({len, dim});
    for (std::size_t pos = 0; pos < len; ++pos) {
        for (std::size_t i = 0; i < dim; ++i) {
            const std::size_t pair = i / 2;
            const double freq =
                std::pow(10000.0, -2.0 * static_cast<double>(pair) / static_cast<double>(dim));
            const double arg = static_cast<double>(pos) * freq * scale;
            pe[pos * dim + i] = static_cast<T>(i % 2 == 0 ? std::sin(arg) : std::cos(arg));
        }
    }
    return pe;
}

template <typename T>
TensorT<T> sinusoidal_pe(std::size_t len, std::size_t dim, double scale) {
    static std::map<std::tuple<std::size_t, std::size_t, double>, TensorT<T>> cache;
    auto key = std::make_tuple(len, dim, scale);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, compute_sinusoidal_pe<T>(len, dim, scale)).first;
    return it->second;
}

template TensorT<double> sinusoidal_pe<double>(std::size_t, std::size_t, double);
template TensorT<float> sinusoidal_pe<float>(std::size_t, std::size_t, double);

// ---------------------------------------------------------------------------

template <typename T>
ModelT<T>::ModelT(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const std::size_t d = cfg_.d_model;
    const std::size_t dp = cfg_.d_prompt;
    const std::size_t nv = cfg_.n_vars;
    const auto scales = cfg_.effective_scales();

    revin_gain_ = add_param("revin.gain", {nv});
    revin_bias_ = add_param("revin.bias", {nv});
    lift_w_ = add_param("lift.w", {nv, d});
    lift_b_ = add_param("lift.b", {d});
    embed_w_ = add_param("embed.w", {cfg_.seq_in, d});
    embed_b_ = add_param("embed.b", {d});

    for (std::size_t s = 0; s < scales.size(); ++s) {
        const std::string p = "ms.s" + std::to_string(scales[s]);
        ms_wq_.push_back(add_param(p + ".wq", {d, d}));
        ms_wk_.push_back(add_param(p + ".wk", {d, d}));
        ms_wv_.push_back(add_param(p + ".wv", {d, d}));
        ms_alpha_.push_back(add_param(p + ".alpha", {1}));
    }
    const std::size_t cat_dim = scales.size() * d;
    fuse_wq_ = add_param("ms.fuse.wq", {cat_dim, d});
    fuse_wk_ = add_param("ms.fuse.wk", {cat_dim, d});
    fuse_wv_ = add_param("ms.fuse.wv", {cat_dim, d});
    fuse_lw_ = add_param("ms.fuse.lin.w", {d, d});
    fuse_lb_ = add_param("ms.fuse.lin.b", {d});

    for (std::size_t l = 0; l < cfg_.n_layers; ++l)
        enc_blocks_.push_back(add_block("enc.l" + std::to_string(l), d));

    prompt_embed_ = add_param("prompt.embed", {cfg_.vocab, dp});
    for (std::size_t l = 0; l < cfg_.prompt_layers; ++l)
        prompt_blocks_.push_back(add_block("prompt.l" + std::to_string(l), dp));
    prompt_refine_ = add_block("prompt.refine", dp);

    align_proj_w_ = add_param("align.proj.w", {dp, d});
    align_proj_b_ = add_param("align.proj.b", {d});
    if (cfg_.fusion == FusionMode::attention) {
        align_wq_ = add_param("align.wq", {d, d});
        align_wk_ = add_param("align.wk", {d, d});
        align_wv_ = add_param("align.wv", {d, d});
        align_wo_ = add_param("align.wo", {d, d});
        align_chan_w_ = add_param("align.chan.w", {dp, nv});
        align_chan_b_ = add_param("align.chan.b", {nv});
    } else if (cfg_.fusion == FusionMode::concat) {
        cat_w_ = add_param("align.cat.w", {2 * d, d});
        cat_b_ = add_param("align.cat.b", {d});
    }

    head_traj_w_ = add_param("head.traj.w", {d, cfg_.pred_len * nv});
    head_traj_b_ = add_param("head.traj.b", {cfg_.pred_len * nv});
    head_anom_w_ = add_param("head.anom.w", {d, 2});
    head_anom_b_ = add_param("head.anom.b", {2});
    head_coll_w_ = add_param("head.coll.w", {d, 1});
    head_coll_b_ = add_param("head.coll.b", {1});

    lm_embed_ = add_param("lm.embed", {cfg_.vocab, d});
    lm_ctx1_w_ = add_param("lm.ctx1.w", {d, d});
    lm_ctx1_b_ = add_param("lm.ctx1.b", {d});
    lm_ctx2_w_ = add_param("lm.ctx2.w", {d, d});
    lm_ctx2_b_ = add_param("lm.ctx2.b", {d});
    for (std::size_t l = 0; l < cfg_.lm_layers; ++l)
        lm_blocks_.push_back(add_block("lm.l" + std::to_string(l), d));
    lm_lnf_g_ = add_param("lm.lnf.g", {d});
    lm_lnf_b_ = add_param("lm.lnf.b", {d});
    // output projection is tied to the token embedding
    lm_out_b_ = add_param("lm.out.b", {cfg_.vocab});

    init_params(seed);
}

template <typename T>
TensorT<T>& ModelT<T>::add_param(const std::string& name, std::vector<std::size_t> shape) {
    params_.emplace_back(name, Tensor(std::move(shape)));
    params_.back().second.set_requires_grad(true);
    return params_.back().second;
}

template <typename T>
typename ModelT<T>::Block ModelT<T>::add_block(const std::string& p, std::size_t dim) {
    Block b;
    b.ln1_g = add_param(p + ".ln1.g", {dim});
    b.ln1_b = add_param(p + ".ln1.b", {dim});
    b.wq = add_param(p + ".attn.wq", {dim, dim});
    b.wk = add_param(p + ".attn.wk", {dim, dim});
    b.wv = add_param(p + ".attn.wv", {dim, dim});
    b.wo = add_param(p + ".attn.wo", {dim, dim});
    b.ln2_g = add_param(p + ".ln2.g", {dim});
    b.ln2_b = add_param(p + ".ln2.b", {dim});
    b.w1 = add_param(p + ".ffn.w1", {dim, 4 * dim});
    b.b1 = add_param(p + ".ffn.b1", {4 * dim});
    b.w2 = add_param(p + ".ffn.w2", {4 * dim, dim});
    b.b2 = add_param(p + ".ffn.b2", {dim});
    return b;
}

template <typename T>
void ModelT<T>::init_params(std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (auto& [name, t] : params_) {
        const bool is_gain = name.ends_with(".g") || name.ends_with("gain");
        const bool is_alpha = name.ends_with(".alpha");
        const bool is_bias = name.ends_with(".b") || name.ends_with("bias") ||
                             name.ends_with(".b1") || name.ends_with(".b2");
        const bool is_embed_table = name == "prompt.embed" || name == "lm.embed";
        if (is_gain || is_alpha) {
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = T(1);
        } else if (is_bias) {
            // zeros
        } else if (is_embed_table) {
            for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(0.02 * rng.gauss());
        } else {
            // Xavier uniform on matrices
            const double fan_in = static_cast<double>(t.rank() == 2 ? t.rows() : t.size());
            const double fan_out = static_cast<double>(t.rank() == 2 ? t.cols() : t.size());
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            for (std::size_t i = 0; i < t.size(); ++i)
                t[i] = static_cast<T>(rng.uniform(-limit, limit));
        }
    }
}

template <typename T>
void ModelT<T>::zero_grads() {
    for (auto& [name, t] : params_) t.zero_grad();
}

// ---------------------------------------------------------------------------

template <typename T>
std::pair<TensorT<T>, RevinState> ModelT<T>::revin_normalize(Graph& g, const Tensor& x) const {
    const std::size_t rows = x.rows(), nv = cfg_.n_vars;
    RevinState st;
    for (std::size_t v = 0; v < nv; ++v) {
        double m = 0;
        for (std::size_t r = 0; r < rows; ++r) m += static_cast<double>(x.at(r, v));
        m /= static_cast<double>(rows);
        double var = 0;
        for (std::size_t r = 0; r < rows; ++r) {
            const double dxy = static_cast<double>(x.at(r, v)) - m;
            var += dxy * dxy;
        }
        var /= static_cast<double>(rows);
        st.mean[v] = m;
        st.std[v] = std::max(std::sqrt(var), 1e-5);
    }
    Tensor mean_c({nv}), std_c({nv});
    for (std::size_t v = 0; v < nv; ++v) {
        mean_c[v] = static_cast<T>(st.mean[v]);
        std_c[v] = static_cast<T>(st.std[v]);
    }
    Tensor xhat = g.div(g.sub(x, mean_c), std_c);
    xhat = g.add(g.mul(xhat, revin_gain_), revin_bias_);
    return {xhat, st};
}

template <typename T>
TensorT<T> ModelT<T>::revin_denormalize(Graph& g, Tensor y, const RevinState& st) const {
    const std::size_t nv = cfg_.n_vars;
    Tensor mean_c({nv}), std_c({nv});
    for (std::size_t v = 0; v < nv; ++v) {
        mean_c[v] = static_cast<T>(st.mean[v]);
        std_c[v] = static_cast<T>(st.std[v]);
    }
    Tensor t = g.div(g.sub(y, revin_bias_), revin_gain_);
    return g.add(g.mul(t, std_c), mean_c);
}

template <typename T>
TensorT<T> ModelT<T>::inverted_embed(Graph& g, Tensor xhat) const {
    return g.add(g.matmul(g.transpose(xhat), embed_w_), embed_b_);
}

template <typename T>
TensorT<T> ModelT<T>::lift_timesteps(Graph& g, Tensor xhat) const {
    return g.add(g.matmul(xhat, lift_w_), lift_b_);
}

template <typename T>
TensorT<T> ModelT<T>::attend(Graph& g, Tensor q, Tensor k, Tensor v, const Tensor* alpha,
                             bool causal) const {
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Tensor scores = g.scale(g.matmul(q, g.transpose(k)), inv_sqrt_dk);
    if (alpha != nullptr) scores = g.mul(scores, *alpha);
    Tensor weights = causal ? g.causal_softmax(scores) : g.softmax(scores);
    return g.matmul(weights, v);
}

template <typename T>
TensorT<T> ModelT<T>::mha(Graph& g, Tensor x, const Block& blk, std::size_t heads,
                          bool causal) const {
    Tensor q = g.matmul(x, blk.wq);
    Tensor k = g.matmul(x, blk.wk);
    Tensor v = g.matmul(x, blk.wv);
    const std::size_t dk = q.cols() / heads;
    std::vector<Tensor> outs;
    outs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        Tensor qh = g.slice(q, 1, h * dk, dk);
        Tensor kh = g.slice(k, 1, h * dk, dk);
        Tensor vh = g.slice(v, 1, h * dk, dk);
        outs.push_back(attend(g, qh, kh, vh, nullptr, causal));
    }
    return g.matmul(heads == 1 ? outs[0] : g.concat(outs, 1), blk.wo);
}

template <typename T>
TensorT<T> ModelT<T>::preln_block(Graph& g, Tensor x, const Block& blk, std::size_t heads,
                                  bool causal, bool training, std::uint64_t step,
                                  std::uint64_t layer_id) const {
    Tensor a = mha(g, g.layer_norm(x, blk.ln1_g, blk.ln1_b), blk, heads, causal);
    a = g.dropout(a, cfg_.dropout, DropoutKey{0x5eed, layer_id * 2, step}, training);
    x = g.add(x, a);
    Tensor h = g.layer_norm(x, blk.ln2_g, blk.ln2_b);
    Tensor f = g.add(g.matmul(g.gelu(g.add(g.matmul(h, blk.w1), blk.b1)), blk.w2), blk.b2);
    f = g.dropout(f, cfg_.dropout, DropoutKey{0x5eed, layer_id * 2 + 1, step}, training);
    return g.add(x, f);
}

template <typename T>
TensorT<T> ModelT<T>::multiscale_attention(Graph& g, Tensor x_time, bool training,
                                           std::uint64_t step) const {
    const auto scales = cfg_.effective_scales();
    const std::size_t seq = x_time.rows();
    std::vector<Tensor> features;
    features.reserve(scales.size());
    for (std::size_t i = 0; i < scales.size(); ++i) {
        const std::size_t s = scales[i];
        Tensor pooled = g.avg_pool1d(x_time, s);
        pooled = g.add(pooled, sinusoidal_pe<T>(pooled.rows(), pooled.cols(),
                                                static_cast<double>(s)));
        Tensor q = g.matmul(pooled, ms_wq_[i]);
        Tensor k = g.matmul(pooled, ms_wk_[i]);
        Tensor v = g.matmul(pooled, ms_wv_[i]);
        Tensor att = attend(g, q, k, v, &ms_alpha_[i], false);
        features.push_back(g.slice(g.nearest_upsample1d(att, s), 0, 0, seq));
    }
    Tensor cat = features.size() == 1 ? features[0] : g.concat(features, 1);
    Tensor fq = g.matmul(cat, fuse_wq_);
    Tensor fk = g.matmul(cat, fuse_wk_);
    Tensor fv = g.matmul(cat, fuse_wv_);
    Tensor fused = attend(g, fq, fk, fv, nullptr, false);
    fused = g.add(g.matmul(fused, fuse_lw_), fuse_lb_);
    fused = g.dropout(fused, cfg_.dropout, DropoutKey{0x5eed, 101, step}, training);
    return g.add(fused, x_time);
}

template <typename T>
TensorT<T> ModelT<T>::preln_encoder(Graph& g, Tensor h, bool training, std::uint64_t step) const {
    for (std::size_t l = 0; l < enc_blocks_.size(); ++l)
        h = preln_block(g, h, enc_blocks_[l], cfg_.n_heads, false, training, step, 10 + l);
    return h;
}

template <typename T>
TensorT<T> ModelT<T>::encode_prompt(Graph& g, const std::string& text, bool training,
                                    std::uint64_t step) const {
    if (text.size() > cfg_.max_text_bytes)
        throw PromptTooLong("prompt of " + std::to_string(text.size()) + " bytes exceeds " +
                            std::to_string(cfg_.max_text_bytes));
    std::vector<int> tokens{kBosToken};
    for (int t : tokenize_bytes(text)) tokens.push_back(t);
    tokens.push_back(kEosToken);

    Tensor e = g.embedding_lookup(prompt_embed_, tokens);
    e = g.add(e, sinusoidal_pe<T>(e.rows(), e.cols()));
    for (std::size_t l = 0; l < prompt_blocks_.size(); ++l)
        e = preln_block(g, e, prompt_blocks_[l], cfg_.n_heads, false, training, step, 30 + l);
    Tensor last = g.slice(e, 0, e.rows() - 1, 1);
    return preln_block(g, last, prompt_refine_, cfg_.n_heads, false, training, step, 39);
}

template <typename T>
TensorT<T> ModelT<T>::cross_modal_align(Graph& g, Tensor h_ts, Tensor h_prompt) const {
    Tensor kv = g.add(g.matmul(h_prompt, align_proj_w_), align_proj_b_); // {1, d}
    switch (cfg_.fusion) {
        case FusionMode::attention: {
            Tensor q = g.matmul(h_ts, align_wq_);
            Tensor k = g.matmul(kv, align_wk_);
            Tensor v = g.matmul(kv, align_wv_);
            Tensor att = g.matmul(attend(g, q, k, v, nullptr, false), align_wo_);
            Tensor chan = g.add(g.matmul(h_prompt, align_chan_w_), align_chan_b_); // {1, nv}
            Tensor out = g.add(h_ts, att);
            return g.add(out, g.transpose(chan)); // per-token scalar bias
        }
        case FusionMode::concat: {
            Tensor rep = g.nearest_upsample1d(kv, h_ts.rows());
            Tensor mixed = g.add(g.matmul(g.concat({h_ts, rep}, 1), cat_w_), cat_b_);
            return g.add(h_ts, mixed);
        }
        case FusionMode::add:
            return g.add(h_ts, g.reshape(kv, {kv.cols()}));
    }
    return h_ts;
}

template <typename T>
ForwardResultT<T> ModelT<T>::forward(Graph& g, const Tensor& window,
                                     const std::string& prompt_text, bool training,
                                     std::uint64_t step) const {
    ForwardResultT<T> out;
    auto [xhat, st] = revin_normalize(g, window);
    out.revin = st;

    Tensor x_time = lift_timesteps(g, xhat);
    Tensor fused = multiscale_attention(g, x_time, training, step);
    Tensor summary = g.mean(fused, 0); // {d}

    Tensor h = inverted_embed(g, xhat);
    h = g.add(h, summary);
    Tensor h_ts = preln_encoder(g, h, training, step);

    if (cfg_.use_alignment) {
        Tensor h_prompt = encode_prompt(g, prompt_text, training, step);
        out.aligned = cross_modal_align(g, h_ts, h_prompt);
    } else {
        out.aligned = h_ts;
    }

    out.pooled = g.reshape(g.mean(out.aligned, 0), {1, cfg_.d_model});

    Tensor traj_raw = g.add(g.matmul(out.pooled, head_traj_w_), head_traj_b_);
    traj_raw = g.reshape(traj_raw, {cfg_.pred_len, cfg_.n_vars});
    out.traj = revin_denormalize(g, traj_raw, st);

    Tensor anom_logits = g.add(g.matmul(out.pooled, head_anom_w_), head_anom_b_);
    out.anomaly = g.reshape(g.softmax(anom_logits), {2});

    Tensor coll = g.sigmoid(g.add(g.matmul(out.pooled, head_coll_w_), head_coll_b_));
    out.cri = g.reshape(coll, {1});
    return out;
}

template <typename T>
TensorT<T> ModelT<T>::lm_logits(Graph& g, const std::vector<int>& input_ids, Tensor pooled,
                                bool training, std::uint64_t step) const {
    Tensor c1 = g.add(g.matmul(pooled, lm_ctx1_w_), lm_ctx1_b_);
    Tensor c2 = g.add(g.matmul(pooled, lm_ctx2_w_), lm_ctx2_b_);
    Tensor e = g.embedding_lookup(lm_embed_, input_ids);
    Tensor x = g.concat({c1, c2, e}, 0);
    x = g.add(x, sinusoidal_pe<T>(x.rows(), x.cols()));
    for (std::size_t l = 0; l < lm_blocks_.size(); ++l)
        x = preln_block(g, x, lm_blocks_[l], cfg_.n_heads, true, training, step, 50 + l);
    x = g.layer_norm(x, lm_lnf_g_, lm_lnf_b_);
    return g.add(g.matmul(x, g.transpose(lm_embed_)), lm_out_b_);
}

template <typename T>
LmOutputT<T> ModelT<T>::lm_forward_teacher_forced(Graph& g, const std::vector<int>& prompt_tokens,
                                                  const std::vector<int>& target_tokens,
                                                  Tensor pooled, bool training,
                                                  std::uint64_t step) const {
    // full sequence: BOS prompt... target... EOS
    std::vector<int> full{kBosToken};
    full.insert(full.end(), prompt_tokens.begin(), prompt_tokens.end());
    full.insert(full.end(), target_tokens.begin(), target_tokens.end());
    full.push_back(kEosToken);
    if (full.size() + 2 > cfg_.max_text_bytes + 4)
        throw SequenceTooLong("decoder sequence of " + std::to_string(full.size()) +
                              " tokens exceeds the configured limit");

    const std::vector<int> input_ids(full.begin(), full.end() - 1);
    LmOutputT<T> out;
    out.logits = lm_logits(g, input_ids, pooled, training, step);

    // row j (j >= 2) holds full[j-2] and predicts full[j-1]; the loss covers
    // predictions of the explanation tokens and the closing EOS only
    const std::size_t rows = out.logits.rows();
    const std::size_t first_target = prompt_tokens.size() + 1; // index in full
    out.next_tokens.assign(rows, 0);
    out.loss_mask.assign(rows, 0.0);
    for (std::size_t j = 2; j < rows; ++j) {
        const std::size_t k = j - 1; // predicted position in full
        out.next_tokens[j] = full[k];
        if (k >= first_target) out.loss_mask[j] = 1.0;
    }
    return out;
}

template <typename T>
std::vector<int> ModelT<T>::lm_generate(const std::vector<int>& prompt_tokens, Tensor pooled,
                                        std::size_t max_len) const {
    std::vector<int> seq{kBosToken};
    seq.insert(seq.end(), prompt_tokens.begin(), prompt_tokens.end());
    std::vector<int> generated;
    while (generated.size() < max_len) {
        Graph g;
        g.recording = false;
        Tensor logits = lm_logits(g, seq, pooled, false, 0);
        const std::size_t last = logits.rows() - 1;
        int best = 0;
        T best_v = logits.at(last, 0);
        for (std::size_t c = 1; c < logits.cols(); ++c)
            if (logits.at(last, c) > best_v) {
                best_v = logits.at(last, c);
                best = static_cast<int>(c);
            }
        if (best == kEosToken) break;
        generated.push_back(best);
        seq.push_back(best);
    }
    return generated;
}

template <typename T>
void ModelT<T>::save(const std::string& path) const {
    save_checkpoint(path, params_, cfg_.to_json());
}

template <typename T>
ModelT<T> ModelT<T>::load(const std::string& path) {
    const ModelConfig cfg = ModelConfig::from_json(read_checkpoint_meta(path));
    ModelT model(cfg, 0);
    load_checkpoint(path, model.params_);
    return model;
}

template class ModelT<double>;
template class ModelT<float>;

} // namespace aisllm
