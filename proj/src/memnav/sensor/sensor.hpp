#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memnav/core/vec.hpp"
#include "memnav/world/world.hpp"

namespace memnav::sensor {

struct CameraModel {
    int ray_count = 64;
    double fov = 1.5707963267948966; // pi/2
    double max_range = 20.0;         // m
    double yaw_offset = 0.0;         // mounting offset, rad

    void validate() const;
};

// Normalized 1-D depth scan: values in [0, 1], 1 = no return within range.
struct DepthScan {
    std::vector<double> values;
    int timestamp_index = 0;
};

struct NoiseParams {
    double multiplicative_sigma = 0.02;
    double dropout_probability = 0.01;
    int quantization_levels = 256; // 0 disables quantization

    void validate() const;
};

struct Pose {
    Vec3 position;
    double yaw = 0.0;
};

// Exact raycast against cylinder cross-sections and the bounds box. Rays
// evenly span [yaw + offset - fov/2, yaw + offset + fov/2], endpoints
// included.
DepthScan render_depth(const world::World& w, const Pose& pose, const CameraModel& camera);

// Multiplicative Gaussian noise, dropout to 1 (no return), quantization,
// re-clip to [0, 1]. Deterministic per seed.
DepthScan apply_depth_noise(const DepthScan& scan, const NoiseParams& params,
                            std::uint64_t rng_seed);

// Episode-segmented scan recordings. Values are stored as float32, matching
// the on-disk format, so save/load round-trips are exact.
class ScanDataset {
public:
    ScanDataset() = default;
    ScanDataset(int ray_count, double frame_period_s)
        : ray_count_(ray_count), frame_period_s_(frame_period_s) {}

    int ray_count() const { return ray_count_; }
    double frame_period_s() const { return frame_period_s_; }
    std::uint64_t config_hash() const { return config_hash_; }
    void set_config_hash(std::uint64_t h) { config_hash_ = h; }

    std::size_t episode_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t total_frames() const { return offsets_.empty() ? 0 : offsets_.back(); }
    std::size_t episode_length(std::size_t e) const { return offsets_[e + 1] - offsets_[e]; }

    void begin_episode();
    void append_frame(const DepthScan& scan);

    // frame i of episode e as doubles in [0, 1]
    std::vector<double> frame(std::size_t e, std::size_t i) const;
    const float* frame_ptr(std::size_t e, std::size_t i) const {
        return values_.data() + (offsets_[e] + i) * static_cast<std::size_t>(ray_count_);
    }

    void save(const std::string& path) const;
    static ScanDataset load(const std::string& path);
    void export_csv(const std::string& path) const;

    // new dataset holding only the given episodes, in the given order
    ScanDataset subset(const std::vector<std::size_t>& episodes) const;

private:
    int ray_count_ = 0;
    double frame_period_s_ = 0.1;
    std::uint64_t config_hash_ = 0;
    std::vector<std::uint64_t> offsets_; // frame index per episode boundary, size = episodes+1
    std::vector<float> values_;          // total_frames * ray_count
};

} // namespace memnav::sensor
