#pragma once

// Flat dotted-key run configuration: defaults table, config-file loading
// and `--set key=value` overrides, plus builders for the typed configs.

#include "aisllm/geo.hpp"
#include "aisllm/model.hpp"
#include "aisllm/train.hpp"

#include <map>
#include <string>
#include <vector>

namespace aisllm {

struct ConfigEntry {
    const char* key;
    const char* value;
    const char* help;
};

/// Every exposed key with its default.
const std::vector<ConfigEntry>& config_defaults();

class Config {
public:
    Config();

    /// `key = value` lines; '#' starts a comment.
    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    void set_kv(const std::string& key_equals_value);

    std::string str(const std::string& key) const;
    double num(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<std::size_t> sizes(const std::string& key) const; // comma-separated

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Help text enumerating every config key with its default.
std::string config_help();

ModelConfig model_config_from(const Config& c);
FitConfig fit_config_from(const Config& c, std::uint64_t seed);
CriWeights cri_weights_from(const Config& c);

} // namespace aisllm
