#include "aisllm/config.hpp"
#include "aisllm/pipeline.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace aisllm {

const std::vector<ConfigEntry>& config_defaults() {
    static const std::vector<ConfigEntry> defaults = {
        {"model.d_model", "64", "embedding width"},
        {"model.n_heads", "4", "attention heads"},
        {"model.n_layers", "2", "time-series encoder layers"},
        {"model.scales", "1,4,16,32", "temporal attention scales"},
        {"model.d_prompt", "64", "prompt encoder width"},
        {"model.prompt_layers", "2", "prompt encoder layers"},
        {"model.lm_layers", "2", "text decoder layers"},
        {"model.seq_in", "18", "input steps"},
        {"model.pred_len", "24", "predicted steps"},
        {"model.dropout", "0.1", "dropout rate"},
        {"model.label_smoothing", "0.1", "classification label smoothing"},
        {"model.use_multiscale", "true", "enable multi-scale attention"},
        {"model.use_alignment", "true", "enable cross-modal alignment"},
        {"model.fusion", "attention", "alignment fusion: attention|concat|add"},
        {"opt.beta1", "0.9", "AdamW beta1"},
        {"opt.beta2", "0.999", "AdamW beta2"},
        {"opt.weight_decay", "1e-4", "decoupled weight decay"},
        {"opt.lr_max", "1e-4", "peak learning rate"},
        {"opt.lr_min", "1e-6", "annealed learning-rate floor"},
        {"opt.t0_epochs", "10", "cosine warm-restart cycle length"},
        {"opt.clip_norm", "1.0", "global gradient-norm clip"},
        {"opt.accum_steps", "4", "gradient accumulation steps"},
        {"opt.batch_train", "8", "training micro-batch size"},
        {"opt.batch_eval", "16", "evaluation batch size"},
        {"opt.patience", "30", "early-stopping patience (epochs)"},
        {"opt.max_epochs", "100", "epoch cap"},
        {"opt.anomaly_w0", "0.3", "class weight, normal"},
        {"opt.anomaly_w1", "0.7", "class weight, anomaly"},
        {"opt.huber_delta", "0.1", "collision Huber threshold"},
        {"opt.stop_on_val_accuracy", "false", "optional stop at target accuracy"},
        {"opt.val_accuracy_target", "0.9", "accuracy target for optional stop"},
        {"opt.stop_on_lr_floor", "false", "optional stop at lr floor"},
        {"loss.traj", "2.0", "trajectory loss weight"},
        {"loss.anom", "1.5", "anomaly loss weight"},
        {"loss.coll", "1.5", "collision loss weight"},
        {"loss.expl", "1.0", "explanation loss weight"},
        {"train.precision", "float32", "training arithmetic: float32|float64"},
        {"cri.w_dcpa", "0.40", "CRI weight: DCPA"},
        {"cri.w_tcpa", "0.30", "CRI weight: TCPA"},
        {"cri.w_range", "0.15", "CRI weight: range"},
        {"cri.w_bearing", "0.10", "CRI weight: relative bearing"},
        {"cri.w_speed", "0.05", "CRI weight: speed ratio"},
        {"cri.d_safe_nm", "0.5", "CRI safe distance (NM)"},
        {"cri.t_horizon_min", "30", "CRI time horizon (minutes)"},
    };
    return defaults;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace

Config::Config() {
    for (const ConfigEntry& e : config_defaults()) values_[e.key] = e.value;
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void Config::set(const std::string& key, const std::string& value) {
    if (values_.find(key) == values_.end())
        throw std::invalid_argument("unknown config key: " + key);
    values_[key] = value;
}

void Config::set_kv(const std::string& kv) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value, got: " + kv);
    set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
}

std::string Config::str(const std::string& key) const { return values_.at(key); }
double Config::num(const std::string& key) const { return std::stod(values_.at(key)); }
std::size_t Config::count(const std::string& key) const {
    return static_cast<std::size_t>(std::stoull(values_.at(key)));
}
bool Config::flag(const std::string& key) const {
    const std::string& v = values_.at(key);
    return v == "true" || v == "1" || v == "yes" || v == "on";
}
std::vector<std::size_t> Config::sizes(const std::string& key) const {
    std::vector<std::size_t> out;
    std::istringstream is(values_.at(key));
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stoull(trim(tok)));
    return out;
}

std::string config_help() {
    std::string out = "Config keys (config file `key = value`, override with --set key=value):\n";
    for (const ConfigEntry& e : config_defaults()) {
        std::string line = "  ";
        line += e.key;
        if (line.size() < 28) line += std::string(28 - line.size(), ' ');
        line += "default ";
        line += e.value;
        line += "  (";
        line += e.help;
        line += ")\n";
        out += line;
    }
    return out;
}

ModelConfig model_config_from(const Config& c) {
    ModelConfig m;
    m.d_model = c.count("model.d_model");
    m.n_heads = c.count("model.n_heads");
    m.n_layers = c.count("model.n_layers");
    m.scales = c.sizes("model.scales");
    m.d_prompt = c.count("model.d_prompt");
    m.prompt_layers = c.count("model.prompt_layers");
    m.lm_layers = c.count("model.lm_layers");
    m.seq_in = c.count("model.seq_in");
    m.pred_len = c.count("model.pred_len");
    m.dropout = c.num("model.dropout");
    m.label_smoothing = c.num("model.label_smoothing");
    m.use_multiscale = c.flag("model.use_multiscale");
    m.use_alignment = c.flag("model.use_alignment");
    m.fusion = fusion_from_name(c.str("model.fusion"));
    m.validate();
    return m;
}

FitConfig fit_config_from(const Config& c, std::uint64_t seed) {
    FitConfig f;
    f.opt.beta1 = c.num("opt.beta1");
    f.opt.beta2 = c.num("opt.beta2");
    f.opt.weight_decay = c.num("opt.weight_decay");
    f.opt.lr_max = c.num("opt.lr_max");
    f.opt.lr_min = c.num("opt.lr_min");
    f.opt.t0_epochs = c.count("opt.t0_epochs");
    f.opt.clip_norm = c.num("opt.clip_norm");
    f.opt.accum_steps = c.count("opt.accum_steps");
    f.opt.batch_train = c.count("opt.batch_train");
    f.opt.batch_eval = c.count("opt.batch_eval");
    f.opt.patience = c.count("opt.patience");
    f.opt.max_epochs = c.count("opt.max_epochs");
    f.opt.anomaly_w0 = c.num("opt.anomaly_w0");
    f.opt.anomaly_w1 = c.num("opt.anomaly_w1");
    f.opt.huber_delta = c.num("opt.huber_delta");
    f.opt.stop_on_val_accuracy = c.flag("opt.stop_on_val_accuracy");
    f.opt.val_accuracy_target = c.num("opt.val_accuracy_target");
    f.opt.stop_on_lr_floor = c.flag("opt.stop_on_lr_floor");
    f.opt.seed = seed;
    f.weights.traj = c.num("loss.traj");
    f.weights.anom = c.num("loss.anom");
    f.weights.coll = c.num("loss.coll");
    f.weights.expl = c.num("loss.expl");
    f.opt.validate();
    return f;
}

CriWeights cri_weights_from(const Config& c) {
    CriWeights w;
    w.w_dcpa = c.num("cri.w_dcpa");
    w.w_tcpa = c.num("cri.w_tcpa");
    w.w_range = c.num("cri.w_range");
    w.w_bearing = c.num("cri.w_bearing");
    w.w_speed = c.num("cri.w_speed");
    w.d_safe_nm = c.num("cri.d_safe_nm");
    w.t_horizon_min = c.num("cri.t_horizon_min");
    w.validate();
    return w;
}

} // namespace aisllm
