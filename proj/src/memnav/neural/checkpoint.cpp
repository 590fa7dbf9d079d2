#include "memnav/neural/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "memnav/core/errors.hpp"
#include "memnav/core/version.hpp"

namespace memnav::neural {

namespace {

constexpr char kMagic[8] = {'M', 'N', 'A', 'V', 'C', 'K', 'P', 'T'};

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw RuntimeError("checkpoint: truncated file");
    return v;
}

} // namespace

void save_checkpoint(const ParameterSet& params, const nlohmann::json& metadata,
                     const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for write: " + path);
    f.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(kFormatVersion));
    const std::string meta = metadata.dump();
    write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(meta.size()));
    f.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    const auto items = params.items();
    write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(items.size()));
    std::vector<float> buf;
    for (const auto& [name, t] : items) {
        write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(t->shape.size()));
        for (const std::size_t d : t->shape) write_pod<std::uint64_t>(f, d);
        buf.resize(t->numel());
        for (std::size_t i = 0; i < t->numel(); ++i) buf[i] = static_cast<float>(t->v[i]);
        f.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    if (!f) throw RuntimeError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for read: " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ConfigError("checkpoint: bad magic in " + path);
    if (read_pod<std::uint32_t>(f) != static_cast<std::uint32_t>(kFormatVersion))
        throw ConfigError("checkpoint: unsupported version");
    Checkpoint ckpt;
    const auto meta_len = read_pod<std::uint32_t>(f);
    std::string meta(meta_len, '\0');
    f.read(meta.data(), meta_len);
    if (!f) throw RuntimeError("checkpoint: truncated metadata");
    try {
        ckpt.metadata = nlohmann::json::parse(meta);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("checkpoint: bad metadata JSON: ") + e.what());
    }
    const auto count = read_pod<std::uint32_t>(f);
    std::vector<float> buf;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto name_len = read_pod<std::uint32_t>(f);
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        const auto ndim = read_pod<std::uint32_t>(f);
        std::vector<std::size_t> shape(ndim);
        for (auto& d : shape) d = read_pod<std::uint64_t>(f);
        auto t = ckpt.params.add(name, shape);
        buf.resize(t->numel());
        f.read(reinterpret_cast<char*>(buf.data()),
               static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (!f) throw RuntimeError("checkpoint: truncated tensor " + name);
        for (std::size_t k = 0; k < t->numel(); ++k) t->v[k] = static_cast<double>(buf[k]);
    }
    return ckpt;
}

} // namespace memnav::neural
