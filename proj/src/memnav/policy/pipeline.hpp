#pragma once

#include <string>
#include <vector>

#include "memnav/cli/config.hpp"
#include "memnav/policy/ppo.hpp"

namespace memnav::policy {

struct CurriculumStage {
    std::string name;
    bool obstacle_free = false;
    double radius_min = 12.0;
    double radius_max = 12.0;
    int iterations = 100;

    void validate() const;
};

// Stage-5 schedule from the run config: a fixed-radius warm-up followed by
// the clutter range.
std::vector<CurriculumStage> curriculum_stages(const cli::RunConfig& cfg);

// Artifact locations inside the output directory.
struct Artifacts {
    std::string dir;

    std::string config_json() const { return dir + "/config.json"; }
    std::string vae_random() const { return dir + "/vae-random.ckpt"; }
    std::string memory_random() const { return dir + "/memory-random.ckpt"; }
    std::string actor_stage1() const { return dir + "/actor-stage1.ckpt"; }
    std::string actor_stage1_iter(int it) const {
        return dir + "/actor-stage1-it" + std::to_string(it) + ".ckpt";
    }
    std::string metrics_stage1() const { return dir + "/metrics-stage1.jsonl"; }
    std::string dataset() const { return dir + "/dataset.bin"; }
    std::string vae() const { return dir + "/vae.ckpt"; }
    std::string vae_metrics() const { return dir + "/vae-metrics.jsonl"; }
    std::string memory_model(const std::string& variant) const {
        return dir + "/memory-" + variant + ".ckpt";
    }
    std::string memory_metrics(const std::string& variant) const {
        return dir + "/memory-" + variant + "-metrics.jsonl";
    }
    std::string actor(const std::string& variant) const {
        return dir + "/actor-" + variant + ".ckpt";
    }
    std::string actor_iter(const std::string& variant, int it) const {
        return dir + "/actor-" + variant + "-it" + std::to_string(it) + ".ckpt";
    }
    std::string metrics_policy(const std::string& variant) const {
        return dir + "/metrics-" + variant + ".jsonl";
    }
};

// Deterministic train/holdout episode split used by stages 3 and 4.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
dataset_split(std::size_t episode_count, double holdout_fraction, std::uint64_t seed);

EnvConfig make_env_config(const cli::RunConfig& cfg, const WorldSource& source);

// Stage 1: PPO with randomly initialized frozen VAE/LSTM in obstacle-free
// worlds. Stage 2: depth-sequence dataset collection with that policy.
// Stage 3: VAE training. Stage 4: LSTM training. Stage 5: PPO retraining
// under the curriculum. Each stage reads its dependencies from the output
// directory and throws RuntimeError when one is missing.
void stage1_initial_policy(const cli::RunConfig& cfg);
void stage2_collect(const cli::RunConfig& cfg);
void stage3_train_vae(const cli::RunConfig& cfg);
void stage4_train_memory(const cli::RunConfig& cfg);
void stage5_train_policy(const cli::RunConfig& cfg);
void run_pipeline(const cli::RunConfig& cfg);

// Episode-segmented scans gathered by rolling a (stochastic) policy.
sensor::ScanDataset collect_dataset(const cli::RunConfig& cfg, const ActorCritic& actor,
                                    const latent::VaeModel& vae,
                                    const memory::MemoryModel& mem, int episodes);

} // namespace memnav::policy
