#pragma once

// Named-tensor archive: magic "AILM", version u32, meta length u64 + utf8
// meta text, entry count u64, then per entry name length u32 + utf8 name,
// rank u32, dims u64..., float64 payload. Little-endian throughout.

#include "aisllm/tensor.hpp"

#include <string>
#include <utility>
#include <vector>

namespace aisllm {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename T>
using NamedTensors = std::vector<std::pair<std::string, TensorT<T>>>;

/// Write all named tensors plus a free-form metadata string (the model
/// config as JSON lives here).
template <typename T>
void save_checkpoint(const std::string& path, const NamedTensors<T>& params,
                     const std::string& meta);

/// Fill `params` in place by name from the archive and return the metadata
/// string. Every parameter must be present with a matching shape.
template <typename T>
std::string load_checkpoint(const std::string& path, NamedTensors<T>& params);

/// Read just the metadata string.
std::string read_checkpoint_meta(const std::string& path);

extern template void save_checkpoint<double>(const std::string&, const NamedTensors<double>&,
                                             const std::string&);
extern template void save_checkpoint<float>(const std::string&, const NamedTensors<float>&,
                                            const std::string&);
extern template std::string load_checkpoint<double>(const std::string&, NamedTensors<double>&);
extern template std::string load_checkpoint<float>(const std::string&, NamedTensors<float>&);

} // namespace aisllm
