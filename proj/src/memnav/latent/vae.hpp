#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <json.hpp>

#include "memnav/neural/graph.hpp"
#include "memnav/neural/params.hpp"
#include "memnav/sensor/sensor.hpp"

namespace memnav::latent {

struct VaeConfig {
    int n_e = 64;            // latent dimension
    double beta_norm = 1e-3; // KL weight
    double learning_rate = 1e-3;
    int batch_size = 64;
    int epochs = 30;
    std::vector<int> channels = {8, 16, 32, 32, 64, 64}; // six conv layers
    int kernel = 4;
    int stride = 2;
    int pad = 1;
    double logvar_floor = -10.0;

    void validate(int ray_count) const;
};

// Encoder: six stride-2 conv1d + ReLU, then affine heads for mu and logvar.
// Decoder mirrors with six deconv1d (ReLU between, sigmoid output).
struct VaeModel {
    VaeConfig cfg;
    int ray_count = 64;
    neural::ParameterSet params;

    static VaeModel init(const VaeConfig& cfg, int ray_count, std::uint64_t seed);

    int flat_size() const; // channels.back() * (ray_count >> 6)
};

struct EncodeHeads {
    neural::TensorPtr mu, logvar; // [B, n_e]
};

// x is [B, L, 1]
EncodeHeads encode_graph(neural::Graph& g, const VaeModel& m, const neural::TensorPtr& x);
// z is [B, n_e]; returns [B, L, 1] in (0, 1)
neural::TensorPtr decode_graph(neural::Graph& g, const VaeModel& m, const neural::TensorPtr& z);

struct EncodeResult {
    std::vector<double> mu, logvar, z;
};

// Inference sets z = mu; training mode samples via reparameterization.
EncodeResult encode(const VaeModel& m, const sensor::DepthScan& scan, bool sample = false,
                    Rng* rng = nullptr);
sensor::DepthScan decode(const VaeModel& m, const std::vector<double>& z);

struct VaeLossOut {
    neural::TensorPtr total, recon, kl;
};

// Eq-style loss: recon = MSE(x, x_recon), kl = standard non-negative KL to
// the unit Gaussian, total = recon + beta_norm * kl.
VaeLossOut vae_loss_graph(neural::Graph& g, const VaeModel& m, const neural::TensorPtr& x,
                          const neural::TensorPtr& eps);

struct VaeEpochStats {
    int epoch = 0;
    double recon = 0, kl = 0, total = 0;
};

struct VaeTrainResult {
    VaeModel model;
    std::vector<VaeEpochStats> curve;
};

// Trains on every frame of the dataset; deterministic per seed.
VaeTrainResult train_vae(const sensor::ScanDataset& dataset, const VaeConfig& cfg,
                         std::uint64_t seed,
                         const std::function<void(const VaeEpochStats&)>& on_epoch = nullptr);

// Mean reconstruction MSE (z = mu) over all frames of a dataset.
double reconstruction_mse(const VaeModel& m, const sensor::ScanDataset& dataset);

// Checkpoint IO; model configuration travels in the metadata.
void save_vae(const VaeModel& m, const std::string& path, const nlohmann::json& extra = {});
VaeModel load_vae(const std::string& path);

} // namespace memnav::latent
