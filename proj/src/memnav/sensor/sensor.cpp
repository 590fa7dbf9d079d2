#include "memnav/sensor/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "memnav/core/errors.hpp"
#include "memnav/core/rng.hpp"
#include "memnav/core/version.hpp"

namespace memnav::sensor {

void CameraModel::validate() const {
    if (ray_count < 8) throw ConfigError("camera: ray_count must be >= 8");
    if (!(fov > 0.0 && fov < 3.14159265358979323846))
        throw ConfigError("camera: fov must be in (0, pi)");
    if (!(max_range > 0.0)) throw ConfigError("camera: max_range must be > 0");
}

void NoiseParams::validate() const {
    if (multiplicative_sigma < 0.0) throw ConfigError("noise: sigma must be >= 0");
    if (dropout_probability < 0.0 || dropout_probability > 1.0)
        throw ConfigError("noise: dropout_probability must be in [0, 1]");
    if (quantization_levels < 0) throw ConfigError("noise: quantization_levels must be >= 0");
    if (quantization_levels == 1) throw ConfigError("noise: quantization_levels = 1 is degenerate");
}

DepthScan render_depth(const world::World& w, const Pose& pose, const CameraModel& camera) {
    DepthScan scan;
    scan.values.resize(static_cast<std::size_t>(camera.ray_count));
    const double base = pose.yaw + camera.yaw_offset - camera.fov / 2.0;
    const double step = camera.fov / (camera.ray_count - 1);
    for (int i = 0; i < camera.ray_count; ++i) {
        const double ang = base + step * i;
        const double d = world::first_hit_distance(w, pose.position.x, pose.position.y,
                                                   std::cos(ang), std::sin(ang),
                                                   /*inflate=*/0.0, camera.max_range);
        scan.values[static_cast<std::size_t>(i)] = d / camera.max_range;
    }
    return scan;
}

DepthScan apply_depth_noise(const DepthScan& scan, const NoiseParams& params,
                            std::uint64_t rng_seed) {
    params.validate();
    Rng rng = substream(rng_seed, "depth_noise");
    DepthScan out;
    out.timestamp_index = scan.timestamp_index;
    out.values.reserve(scan.values.size());
    const int levels = params.quantization_levels;
    for (double v : scan.values) {
        v *= 1.0 + params.multiplicative_sigma * rng.normal();
        if (rng.uniform() < params.dropout_probability) v = 1.0;
        if (levels >= 2) v = std::round(v * (levels - 1)) / (levels - 1);
        out.values.push_back(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

void ScanDataset::begin_episode() {
    if (offsets_.empty()) offsets_.push_back(0);
    offsets_.push_back(offsets_.back());
}

void ScanDataset::append_frame(const DepthScan& scan) {
    if (offsets_.size() < 2) throw RuntimeError("ScanDataset: append_frame before begin_episode");
    if (static_cast<int>(scan.values.size()) != ray_count_)
        throw RuntimeError("ScanDataset: ray_count mismatch");
    for (double v : scan.values) values_.push_back(static_cast<float>(v));
    ++offsets_.back();
}

std::vector<double> ScanDataset::frame(std::size_t e, std::size_t i) const {
    const float* p = frame_ptr(e, i);
    return std::vector<double>(p, p + ray_count_);
}

namespace {

constexpr char kMagic[8] = {'M', 'N', 'A', 'V', 'S', 'C', 'A', 'N'};

template <typename T>
void write_pod(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw RuntimeError("scan dataset: truncated file");
    return v;
}

} // namespace

void ScanDataset::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for write: " + path);
    f.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(kFormatVersion));
    write_pod<std::uint32_t>(f, static_cast<std::uint32_t>(ray_count_));
    write_pod<double>(f, frame_period_s_);
    write_pod<std::uint64_t>(f, config_hash_);
    write_pod<std::uint64_t>(f, episode_count());
    if (!offsets_.empty())
        f.write(reinterpret_cast<const char*>(offsets_.data()),
                static_cast<std::streamsize>(offsets_.size() * sizeof(std::uint64_t)));
    f.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size() * sizeof(float)));
    if (!f) throw RuntimeError("write failed: " + path);
}

ScanDataset ScanDataset::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for read: " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ConfigError("scan dataset: bad magic in " + path);
    const auto version = read_pod<std::uint32_t>(f);
    if (version != static_cast<std::uint32_t>(kFormatVersion))
        throw ConfigError("scan dataset: unsupported version");
    ScanDataset ds;
    ds.ray_count_ = static_cast<int>(read_pod<std::uint32_t>(f));
    ds.frame_period_s_ = read_pod<double>(f);
    ds.config_hash_ = read_pod<std::uint64_t>(f);
    const auto episodes = read_pod<std::uint64_t>(f);
    if (episodes > 0) {
        ds.offsets_.resize(episodes + 1);
        f.read(reinterpret_cast<char*>(ds.offsets_.data()),
               static_cast<std::streamsize>(ds.offsets_.size() * sizeof(std::uint64_t)));
        if (!f) throw RuntimeError("scan dataset: truncated offsets");
        ds.values_.resize(ds.offsets_.back() * static_cast<std::size_t>(ds.ray_count_));
        f.read(reinterpret_cast<char*>(ds.values_.data()),
               static_cast<std::streamsize>(ds.values_.size() * sizeof(float)));
        if (!f) throw RuntimeError("scan dataset: truncated frames");
    }
    return ds;
}

ScanDataset ScanDataset::subset(const std::vector<std::size_t>& episodes) const {
    ScanDataset out(ray_count_, frame_period_s_);
    out.config_hash_ = config_hash_;
    for (const std::size_t e : episodes) {
        if (e >= episode_count()) throw RuntimeError("ScanDataset::subset: episode out of range");
        out.begin_episode();
        const float* p = frame_ptr(e, 0);
        const std::size_t n = episode_length(e) * static_cast<std::size_t>(ray_count_);
        out.values_.insert(out.values_.end(), p, p + n);
        out.offsets_.back() += episode_length(e);
    }
    return out;
}

void ScanDataset::export_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for write: " + path);
    f << "episode,frame";
    for (int r = 0; r < ray_count_; ++r) f << ",ray" << r;
    f << '\n';
    for (std::size_t e = 0; e < episode_count(); ++e) {
        for (std::size_t i = 0; i < episode_length(e); ++i) {
            f << e << ',' << i;
            const float* p = frame_ptr(e, i);
            for (int r = 0; r < ray_count_; ++r) f << ',' << p[r];
            f << '\n';
        }
    }
}

} // namespace memnav::sensor
