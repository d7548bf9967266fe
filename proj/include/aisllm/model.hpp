#pragma once

// The forecasting model: RevIN, inverted embedding, Pre-LN encoder,
// multi-scale temporal attention with scale-specific positional encoding,
// a byte-level prompt encoder, cross-modal alignment, task heads and a
// small causal decoder for briefing text.

#include "aisllm/checkpoint.hpp"
#include "aisllm/tensor.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace aisllm {

struct PromptTooLong : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SequenceTooLong : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FusionMode { attention, concat, add };

std::string fusion_name(FusionMode m);
FusionMode fusion_from_name(const std::string& name);

struct ModelConfig {
    std::size_t n_vars = 4;
    std::size_t seq_in = 18;
    std::size_t pred_len = 24;
    std::size_t d_model = 64;
    std::size_t n_heads = 4;
    std::size_t n_layers = 2;
    std::vector<std::size_t> scales{1, 4, 16, 32};
    std::size_t d_prompt = 64;
    std::size_t prompt_layers = 2;
    std::size_t lm_layers = 2;
    std::size_t vocab = 258; // 256 bytes + BOS + EOS
    std::size_t max_text_bytes = 2048;
    double dropout = 0.1;
    double label_smoothing = 0.1;
    bool use_multiscale = true;
    bool use_alignment = true;
    FusionMode fusion = FusionMode::attention;

    void validate() const;
    std::vector<std::size_t> effective_scales() const {
        return use_multiscale ? scales : std::vector<std::size_t>{1};
    }
    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

inline constexpr int kBosToken = 256;
inline constexpr int kEosToken = 257;

std::vector<int> tokenize_bytes(const std::string& text);
std::string detokenize_bytes(const std::vector<int>& tokens);

/// Per-window normalization state captured by revin_normalize and needed
/// to restore predictions to the input scale.
struct RevinState {
    std::array<double, 4> mean{};
    std::array<double, 4> std{}; // floored at 1e-5
};

template <typename T>
struct ForwardResultT {
    TensorT<T> traj;    // pred_len x n_vars, input scale (revin restored)
    TensorT<T> anomaly; // {2} probabilities, sums to 1
    TensorT<T> cri;     // {1} in (0,1)
    TensorT<T> aligned; // n_vars x d_model
    TensorT<T> pooled;  // {1, d_model} token mean, feeds heads and decoder
    RevinState revin;
};

template <typename T>
struct LmOutputT {
    TensorT<T> logits;             // rows x vocab
    std::vector<int> next_tokens;  // per-row next-token target
    std::vector<double> loss_mask; // 1.0 on explanation positions, 0.0 elsewhere
};

template <typename T>
class ModelT {
public:
    using Tensor = TensorT<T>;
    using Graph = GraphT<T>;

    ModelT(ModelConfig cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    NamedTensors<T>& params() { return params_; }
    const NamedTensors<T>& params() const { return params_; }
    void zero_grads();

    /// Per-variable standardization over the window's time axis followed by
    /// the learnable affine.
    std::pair<Tensor, RevinState> revin_normalize(Graph& g, const Tensor& x) const;
    /// Exact inverse of revin_normalize given the same state.
    Tensor revin_denormalize(Graph& g, Tensor y, const RevinState& st) const;

    /// Variable-token embedding: transpose to n_vars x seq_in, then a linear
    /// map of each variable's full series into d_model.
    Tensor inverted_embed(Graph& g, Tensor xhat) const;

    /// Per-timestep linear lift 4 -> d_model feeding the multi-scale path.
    Tensor lift_timesteps(Graph& g, Tensor xhat) const;

    /// Pool/attend/upsample per scale, then cross-scale fusion attention
    /// over the concatenated features, linear back to d_model, residual.
    Tensor multiscale_attention(Graph& g, Tensor x_time, bool training = false,
                                std::uint64_t step = 0) const;

    Tensor preln_encoder(Graph& g, Tensor h, bool training = false, std::uint64_t step = 0) const;

    /// Byte-level prompt encoding; the final token embedding refined by one
    /// extra transformer layer is the semantic vector ({1, d_prompt}).
    Tensor encode_prompt(Graph& g, const std::string& text, bool training = false,
                         std::uint64_t step = 0) const;

    /// Cross-attention with the prompt vector as key/value plus a channel
    /// bias projected into variable space; residual on the ts tokens.
    Tensor cross_modal_align(Graph& g, Tensor h_ts, Tensor h_prompt) const;

    /// Full pass over one normalized window.
    ForwardResultT<T> forward(Graph& g, const Tensor& window, const std::string& prompt_text,
                              bool training = false, std::uint64_t step = 0) const;

    /// Causal decode over [ctx tokens | BOS prompt target EOS] with the loss
    /// mask covering explanation positions only.
    LmOutputT<T> lm_forward_teacher_forced(Graph& g, const std::vector<int>& prompt_tokens,
                                           const std::vector<int>& target_tokens, Tensor pooled,
                                           bool training = false, std::uint64_t step = 0) const;

    /// Greedy decoding until EOS or max_len tokens; deterministic.
    std::vector<int> lm_generate(const std::vector<int>& prompt_tokens, Tensor pooled,
                                 std::size_t max_len) const;

    void save(const std::string& path) const;
    static ModelT load(const std::string& path);

private:
    struct Block {
        Tensor ln1_g, ln1_b, wq, wk, wv, wo, ln2_g, ln2_b, w1, b1, w2, b2;
    };

    Tensor& add_param(const std::string& name, std::vector<std::size_t> shape);
    Block add_block(const std::string& prefix, std::size_t dim);
    void init_params(std::uint64_t seed);

    Tensor attend(Graph& g, Tensor q, Tensor k, Tensor v, const Tensor* alpha, bool causal) const;
    Tensor mha(Graph& g, Tensor x, const Block& blk, std::size_t heads, bool causal) const;
    Tensor preln_block(Graph& g, Tensor x, const Block& blk, std::size_t heads, bool causal,
                       bool training, std::uint64_t step, std::uint64_t layer_id) const;
    Tensor lm_logits(Graph& g, const std::vector<int>& input_ids, Tensor pooled, bool training,
                     std::uint64_t step) const;

    ModelConfig cfg_;
    NamedTensors<T> params_;

    // direct handles into params_ (shared storage)
    Tensor revin_gain_, revin_bias_;
    Tensor lift_w_, lift_b_;
    Tensor embed_w_, embed_b_;
    std::vector<Tensor> ms_wq_, ms_wk_, ms_wv_, ms_alpha_;
    Tensor fuse_wq_, fuse_wk_, fuse_wv_, fuse_lw_, fuse_lb_;
    std::vector<Block> enc_blocks_;
    Tensor prompt_embed_;
    std::vector<Block> prompt_blocks_;
    Block prompt_refine_;
    Tensor align_proj_w_, align_proj_b_, align_wq_, align_wk_, align_wv_, align_wo_;
    Tensor align_chan_w_, align_chan_b_;
    Tensor cat_w_, cat_b_;
    Tensor head_traj_w_, head_traj_b_, head_anom_w_, head_anom_b_, head_coll_w_, head_coll_b_;
    Tensor lm_embed_, lm_ctx1_w_, lm_ctx1_b_, lm_ctx2_w_, lm_ctx2_b_;
    std::vector<Block> lm_blocks_;
    Tensor lm_lnf_g_, lm_lnf_b_, lm_out_b_; // output weights tied to lm_embed_
};

using Model = ModelT<double>;
using ModelF = ModelT<float>;

extern template class ModelT<double>;
extern template class ModelT<float>;

/// Sinusoidal table with the scale-adjusted argument pos/10000^(2i/d) * s;
/// sine on even dims, cosine on odd dims.
template <typename T>
TensorT<T> sinusoidal_pe(std::size_t len, std::size_t dim, double scale = 1.0);

extern template TensorT<double> sinusoidal_pe<double>(std::size_t, std::size_t, double);
extern template TensorT<float> sinusoidal_pe<float>(std::size_t, std::size_t, double);

} // namespace aisllm
