#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "memnav/latent/vae.hpp"

namespace memnav::memory {

// The seven latent configurations, keyed by which frames the LSTM head is
// trained to reconstruct (offsets in frames at 0.1 s cadence).
enum class LatentVariant {
    cur,              // I_t
    fut10,            // I_{t+10}
    cur_fut10,        // I_t, I_{t+10}
    cur_fut20,        // I_t, I_{t+20}
    cur_past10,       // I_t, I_{t-10}
    cur_past20,       // I_t, I_{t-20}
    past10_cur_fut10, // I_{t-10}, I_t, I_{t+10}
};

const char* variant_name(LatentVariant v); // "cur", "fut10", "cur+past20", ...
LatentVariant parse_variant(const std::string& name);
const std::vector<LatentVariant>& all_variants();

struct MemoryConfig {
    int n_l = 256;          // LSTM hidden size
    int offset_frames = 10; // T
    bool use_past = false;
    bool use_cur = true;
    bool use_fut = false;
    int offset_multiplier = 1; // 1 or 2, scales T to express +-20
    int seq_len = 64;          // BPTT window
    double learning_rate = 1e-3;
    int batch_size = 8; // episodes per optimizer step
    int epochs = 20;

    void validate() const;
    int offset() const { return offset_frames * offset_multiplier; }
    void apply_variant(LatentVariant v);
    LatentVariant variant() const;
};

// Single-layer LSTM over VAE latents plus an affine head splitting into
// three n_e segments (past, current, future), decoded by the frozen VAE
// decoder.
struct MemoryModel {
    MemoryConfig cfg;
    int n_e = 64;
    neural::ParameterSet params; // lstm.Wx, lstm.Wh, lstm.b, head.W, head.b

    static MemoryModel init(const MemoryConfig& cfg, int n_e, std::uint64_t seed);
};

// Streaming state for deployment; hidden is the memory latent z_t.
struct MemoryState {
    std::vector<double> h, c;

    static MemoryState zero(int n_l);
};

// Consume one VAE latent; returns the new z_t (= hidden state).
std::vector<double> step_state(const MemoryModel& m, const std::vector<double>& z_vae,
                               MemoryState& state);

// Batch roll from a zero state; z_t[k] is the hidden output after consuming
// z_vae[0..k].
std::vector<std::vector<double>> roll(const MemoryModel& m,
                                      const std::vector<std::vector<double>>& z_vae_seq);

struct HeadScans {
    sensor::DepthScan past, cur, fut;
};

HeadScans reconstruct_heads(const MemoryModel& m, const latent::VaeModel& vae,
                            const std::vector<double>& z_t);

// Masked reconstruction loss over a batch of episodes: for each enabled head
// the scan MSEs of valid frames (t + offset inside the episode) are averaged
// over the batch, and enabled-head averages are summed. Throws if every
// frame is masked.
double memory_loss(const MemoryModel& m, const latent::VaeModel& vae,
                   const std::vector<std::vector<sensor::DepthScan>>& episodes);

struct MemoryEpochStats {
    int epoch = 0;
    double loss = 0;
};

// Encoder and decoder stay frozen; only LSTM + head parameters train.
// Teacher inputs are deterministic encoder means.
MemoryModel train_memory(const sensor::ScanDataset& dataset, const latent::VaeModel& vae,
                         const MemoryConfig& cfg, std::uint64_t seed,
                         const std::function<void(const MemoryEpochStats&)>& on_epoch = nullptr);

struct HeadErrors {
    double past = 0, cur = 0, fut = 0; // mean scan MSE per head over valid frames
    std::size_t past_count = 0, cur_count = 0, fut_count = 0;
};

// Errors of all three prediction heads on a dataset (regardless of which
// heads were trained).
HeadErrors head_errors(const MemoryModel& m, const latent::VaeModel& vae,
                       const sensor::ScanDataset& dataset);

void save_memory(const MemoryModel& m, const std::string& path,
                 const nlohmann::json& extra = {});
MemoryModel load_memory(const std::string& path);

} // namespace memnav::memory
