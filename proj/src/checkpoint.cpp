#include "aisllm/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

namespace aisllm {

namespace {

constexpr std::uint32_t kVersion = 1;

template <typename V>
void put_le(std::ostream& out, V v) {
    unsigned char buf[sizeof(V)];
    std::memcpy(buf, &v, sizeof(V));
    out.write(reinterpret_cast<const char*>(buf), sizeof(V));
}

template <typename V>
V get_le(std::istream& in) {
    unsigned char buf[sizeof(V)];
    in.read(reinterpret_cast<char*>(buf), sizeof(V));
    V v;
    std::memcpy(&v, buf, sizeof(V));
    return v;
}

} // namespace

template <typename T>
void save_checkpoint(const std::string& path, const NamedTensors<T>& params,
                     const std::string& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint: " + path);
    out.write("AILM", 4);
    put_le<std::uint32_t>(out, kVersion);
    put_le<std::uint64_t>(out, meta.size());
    out.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    put_le<std::uint64_t>(out, params.size());
    for (const auto& [name, tensor] : params) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
        for (std::size_t d : tensor.shape()) put_le<std::uint64_t>(out, d);
        for (std::size_t i = 0; i < tensor.size(); ++i)
            put_le<double>(out, static_cast<double>(tensor[i]));
    }
    if (!out) throw CheckpointError("short write to checkpoint: " + path);
}

namespace {

struct Entry {
    std::vector<std::size_t> shape;
    std::vector<double> values;
};

std::string read_archive(const std::string& path, std::map<std::string, Entry>* entries) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "AILM", 4) != 0)
        throw CheckpointError("bad checkpoint magic: " + path);
    if (get_le<std::uint32_t>(in) != kVersion)
        throw CheckpointError("unsupported checkpoint version");
    const auto meta_len = get_le<std::uint64_t>(in);
    std::string meta(meta_len, '\0');
    in.read(meta.data(), static_cast<std::streamsize>(meta_len));
    if (entries == nullptr) return meta;

    const auto count = get_le<std::uint64_t>(in);
    for (std::uint64_t e = 0; e < count; ++e) {
        const auto name_len = get_le<std::uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        Entry entry;
        const auto rank = get_le<std::uint32_t>(in);
        std::size_t n = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            entry.shape.push_back(static_cast<std::size_t>(get_le<std::uint64_t>(in)));
            n *= entry.shape.back();
        }
        entry.values.resize(n);
        for (double& v : entry.values) v = get_le<double>(in);
        if (!in) throw CheckpointError("truncated checkpoint: " + path);
        (*entries)[name] = std::move(entry);
    }
    return meta;
}

} // namespace

template <typename T>
std::string load_checkpoint(const std::string& path, NamedTensors<T>& params) {
    std::map<std::string, Entry> entries;
    const std::string meta = read_archive(path, &entries);
    for (auto& [name, tensor] : params) {
        auto it = entries.find(name);
        if (it == entries.end()) throw CheckpointError("checkpoint lacks tensor: " + name);
        if (it->second.shape != tensor.shape())
            throw CheckpointError("shape mismatch for " + name + ": archive " +
                                  shape_str(it->second.shape) + " vs model " +
                                  shape_str(tensor.shape()));
        for (std::size_t i = 0; i < tensor.size(); ++i)
            tensor[i] = static_cast<T>(it->second.values[i]);
    }
    return meta;
}

std::string read_checkpoint_meta(const std::string& path) { return read_archive(path, nullptr); }

template void save_checkpoint<double>(const std::string&, const NamedTensors<double>&,
                                      const std::string&);
template void save_checkpoint<float>(const std::string&, const NamedTensors<float>&,
                                     const std::string&);
template std::string load_checkpoint<double>(const std::string&, NamedTensors<double>&);
template std::string load_checkpoint<float>(const std::string&, NamedTensors<float>&);

} // namespace aisllm
