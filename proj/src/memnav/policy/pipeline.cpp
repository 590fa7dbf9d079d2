#include "memnav/policy/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "memnav/core/errors.hpp"
#include "memnav/core/hash.hpp"

namespace memnav::policy {

namespace fs = std::filesystem;

void CurriculumStage::validate() const {
    if (iterations < 1) throw ConfigError("curriculum: stage budgets must be positive");
    if (!obstacle_free && (radius_min > radius_max || radius_min <= 0))
        throw ConfigError("curriculum: bad radius range in stage " + name);
}

std::vector<CurriculumStage> curriculum_stages(const cli::RunConfig& cfg) {
    CurriculumStage warmup;
    warmup.name = "warmup";
    warmup.radius_min = warmup.radius_max = cfg.warmup_radius;
    warmup.iterations = cfg.warmup_iterations;
    CurriculumStage clutter;
    clutter.name = "clutter";
    clutter.radius_min = cfg.clutter_radius_min;
    clutter.radius_max = cfg.clutter_radius_max;
    clutter.iterations = cfg.ppo.iterations - cfg.warmup_iterations;
    warmup.validate();
    clutter.validate();
    return {warmup, clutter};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
dataset_split(std::size_t episode_count, double holdout_fraction, std::uint64_t seed) {
    std::vector<std::size_t> ids(episode_count);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    Rng rng = substream(seed, "dataset.split");
    for (std::size_t i = ids.size(); i > 1; --i)
        std::swap(ids[i - 1], ids[rng.uniform_int(i)]);
    const auto holdout = static_cast<std::size_t>(
        std::max(0.0, holdout_fraction * static_cast<double>(episode_count)));
    std::vector<std::size_t> train(ids.begin(), ids.end() - static_cast<long>(holdout));
    std::vector<std::size_t> held(ids.end() - static_cast<long>(holdout), ids.end());
    return {train, held};
}

EnvConfig make_env_config(const cli::RunConfig& cfg, const WorldSource& source) {
    EnvConfig e;
    e.source = source;
    e.camera = cfg.camera;
    e.noise = cfg.noise;
    e.noise_enabled = cfg.noise_enabled;
    e.weights = cfg.weights;
    e.terminal = cfg.terminal;
    e.limits = cfg.limits;
    e.dt = cfg.dt;
    e.max_steps = cfg.max_steps;
    e.min_separation = cfg.min_separation;
    e.trav_samples = cfg.trav_samples;
    return e;
}

namespace {

class MetricsLog {
public:
    explicit MetricsLog(const std::string& path, const std::string& cfg_hash)
        : f_(path, std::ios::binary), hash_(cfg_hash) {
        if (!f_) throw RuntimeError("cannot open metrics log: " + path);
    }
    void write(const IterationMetrics& m) {
        nlohmann::json j{{"iteration", m.iteration},
                         {"stage", m.stage},
                         {"mean_return", m.mean_return},
                         {"success_rate", m.success_rate},
                         {"mean_v_hor", m.mean_v_hor},
                         {"episodes", m.episodes},
                         {"policy_loss", m.losses.policy_loss},
                         {"value_loss", m.losses.value_loss},
                         {"entropy", m.losses.entropy},
                         {"config_hash", hash_}};
        f_ << j.dump() << '\n';
    }

private:
    std::ofstream f_;
    std::string hash_;
};

void require_artifact(const std::string& path, const std::string& producer) {
    if (!fs::exists(path))
        throw RuntimeError("missing dependency " + path + " (run " + producer + " first)");
}

std::vector<std::unique_ptr<Env>> make_envs(const cli::RunConfig& cfg, const WorldSource& src,
                                            const latent::VaeModel& vae,
                                            const memory::MemoryModel& mem,
                                            const std::string& stream_name) {
    std::vector<std::unique_ptr<Env>> envs;
    const EnvConfig ec = make_env_config(cfg, src);
    for (int w = 0; w < cfg.ppo.workers; ++w)
        envs.push_back(std::make_unique<Env>(ec, &vae, &mem,
                                             substream_seed(cfg.seed, stream_name),
                                             static_cast<std::uint64_t>(w)));
    return envs;
}

nlohmann::json base_meta(const cli::RunConfig& cfg) {
    return {{"config_hash", cli::config_hash(cfg)}};
}

} // namespace

void stage1_initial_policy(const cli::RunConfig& cfg) {
    Artifacts art{cfg.out_dir};
    fs::create_directories(cfg.out_dir);
    {
        std::ofstream f(art.config_json(), std::ios::binary);
        f << cli::to_json(cfg).dump(2) << '\n';
    }

    // frozen random representation nets; the observation layout is identical
    // across all stages
    latent::VaeModel vae =
        latent::VaeModel::init(cfg.vae, cfg.camera.ray_count, substream_seed(cfg.seed, "vae0"));
    memory::MemoryModel mem =
        memory::MemoryModel::init(cfg.memory_cfg, cfg.vae.n_e, substream_seed(cfg.seed, "mem0"));
    latent::save_vae(vae, art.vae_random(), base_meta(cfg));
    memory::save_memory(mem, art.memory_random(), base_meta(cfg));

    WorldSource src;
    src.kind = WorldSource::Kind::empty;
    src.base = cfg.world_base;
    auto envs = make_envs(cfg, src, vae, mem, "stage1.env");

    ActorCritic actor = ActorCritic::init(cfg.policy_net, envs[0]->obs_dim(),
                                          substream_seed(cfg.seed, "actor.stage1"));
    PpoConfig ppo = cfg.ppo;
    ppo.iterations = cfg.stage1_iterations;

    MetricsLog log(art.metrics_stage1(), cli::config_hash(cfg));
    train_ppo(actor, envs, ppo, substream_seed(cfg.seed, "stage1.train"), "stage1",
              [&](const IterationMetrics& m) {
                  log.write(m);
                  if ((m.iteration + 1) % ppo.checkpoint_interval == 0) {
                      nlohmann::json meta = base_meta(cfg);
                      meta["iteration"] = m.iteration + 1;
                      meta["stage"] = "stage1";
                      save_actor(actor, art.actor_stage1_iter(m.iteration + 1), meta);
                  }
                  return true;
              });
    nlohmann::json meta = base_meta(cfg);
    meta["iteration"] = ppo.iterations;
    meta["stage"] = "stage1";
    save_actor(actor, art.actor_stage1(), meta);
}

sensor::ScanDataset collect_dataset(const cli::RunConfig& cfg, const ActorCritic& actor,
                                    const latent::VaeModel& vae,
                                    const memory::MemoryModel& mem, int episodes) {
    sensor::ScanDataset ds(cfg.camera.ray_count, cfg.dt);
    ds.set_config_hash(fnv1a64(cli::config_hash(cfg)));

    // one env per clutter level, cycled per episode
    std::vector<std::unique_ptr<Env>> envs;
    for (std::size_t i = 0; i < cfg.collect_radii.size(); ++i) {
        WorldSource src;
        src.kind = WorldSource::Kind::poisson;
        src.base = cfg.world_base;
        src.radius_min = src.radius_max = cfg.collect_radii[i];
        envs.push_back(std::make_unique<Env>(make_env_config(cfg, src), &vae, &mem,
                                             substream_seed(cfg.seed, "collect.env"),
                                             static_cast<std::uint64_t>(i)));
    }
    Rng act_rng = substream(cfg.seed, "collect.act");

    for (int ep = 0; ep < episodes; ++ep) {
        Env& env = *envs[static_cast<std::size_t>(ep) % envs.size()];
        env.reset();
        ds.begin_episode();
        ds.append_frame(env.last_scan());
        while (true) {
            const ActOut a = act(actor, env.observation(), act_rng);
            const Env::StepResult sr = env.step(a.action);
            if (sr.done || sr.timeout) break;
            ds.append_frame(env.last_scan());
        }
    }
    return ds;
}

void stage2_collect(const cli::RunConfig& cfg) {
    Artifacts art{cfg.out_dir};
    require_artifact(art.vae_random(), "pipeline stage 1");
    require_artifact(art.memory_random(), "pipeline stage 1");
    require_artifact(art.actor_stage1(), "pipeline stage 1");
    const latent::VaeModel vae = latent::load_vae(art.vae_random());
    const memory::MemoryModel mem = memory::load_memory(art.memory_random());
    const ActorCritic actor = load_actor(art.actor_stage1());
    const sensor::ScanDataset ds = collect_dataset(cfg, actor, vae, mem, cfg.collect_episodes);
    ds.save(art.dataset());
}

void stage3_train_vae(const cli::RunConfig& cfg) {
    Artifacts art{cfg.out_dir};
    require_artifact(art.dataset(), "pipeline stage 2");
    const sensor::ScanDataset full = sensor::ScanDataset::load(art.dataset());
    const auto [train_ids, held_ids] =
        dataset_split(full.episode_count(), cfg.holdout_fraction, cfg.seed);
    const sensor::ScanDataset train = full.subset(train_ids);

    std::ofstream mlog(art.vae_metrics(), std::ios::binary);
    const std::string hash = cli::config_hash(cfg);
    auto result = latent::train_vae(train, cfg.vae, substream_seed(cfg.seed, "vae.train"),
                                    [&](const latent::VaeEpochStats& s) {
                                        mlog << nlohmann::json{{"epoch", s.epoch},
                                                               {"recon", s.recon},
                                                               {"kl", s.kl},
                                                               {"total", s.total},
                                                               {"config_hash", hash}}
                                                    .dump()
                                             << '\n';
                                    });
    latent::save_vae(result.model, art.vae(), base_meta(cfg));
}

void stage4_train_memory(const cli::RunConfig& cfg) {
    Artifacts art{cfg.out_dir};
    require_artifact(art.dataset(), "pipeline stage 2");
    require_artifact(art.vae(), "pipeline stage 3");
    const latent::VaeModel vae = latent::load_vae(art.vae());
    const sensor::ScanDataset full = sensor::ScanDataset::load(art.dataset());
    const auto [train_ids, held_ids] =
        dataset_split(full.episode_count(), cfg.holdout_fraction, cfg.seed);
    const sensor::ScanDataset train = full.subset(train_ids);

    const std::string variant = cfg.latent_variant;
    std::ofstream mlog(art.memory_metrics(variant), std::ios::binary);
    const std::string hash = cli::config_hash(cfg);
    memory::MemoryModel mem = memory::train_memory(
        train, vae, cfg.memory_cfg, substream_seed(cfg.seed, "memory.train"),
        [&](const memory::MemoryEpochStats& s) {
            mlog << nlohmann::json{{"epoch", s.epoch}, {"loss", s.loss}, {"config_hash", hash}}
                        .dump()
                 << '\n';
        });
    memory::save_memory(mem, art.memory_model(variant), base_meta(cfg));
}

void stage5_train_policy(const cli::RunConfig& cfg) {
    Artifacts art{cfg.out_dir};
    const std::string variant = cfg.latent_variant;
    require_artifact(art.vae(), "pipeline stage 3");
    require_artifact(art.memory_model(variant), "pipeline stage 4");
    const latent::VaeModel vae = latent::load_vae(art.vae());
    const memory::MemoryModel mem = memory::load_memory(art.memory_model(variant));

    ActorCritic actor = ActorCritic::init(
        cfg.policy_net, mem.cfg.n_l + dynamics::kFeatureCount,
        substream_seed(cfg.seed, "actor.stage5"));
    MetricsLog log(art.metrics_policy(variant), cli::config_hash(cfg));

    int global_iter = 0;
    const auto stages = curriculum_stages(cfg);
    for (std::size_t si = 0; si < stages.size(); ++si) {
        const CurriculumStage& st = stages[si];
        WorldSource src;
        src.kind = st.obstacle_free ? WorldSource::Kind::empty : WorldSource::Kind::poisson;
        src.base = cfg.world_base;
        src.radius_min = st.radius_min;
        src.radius_max = st.radius_max;
        auto envs = make_envs(cfg, src, vae, mem, "stage5.env." + st.name);

        PpoConfig ppo = cfg.ppo;
        ppo.iterations = st.iterations;
        train_ppo(actor, envs, ppo, substream_seed(cfg.seed, "stage5.train." + st.name),
                  st.name, [&](IterationMetrics m) {
                      m.iteration = global_iter;
                      log.write(m);
                      ++global_iter;
                      if (global_iter % ppo.checkpoint_interval == 0) {
                          nlohmann::json meta = base_meta(cfg);
                          meta["iteration"] = global_iter;
                          meta["stage"] = m.stage;
                          save_actor(actor, art.actor_iter(variant, global_iter), meta);
                      }
                      return true;
                  });
    }
    nlohmann::json meta = base_meta(cfg);
    meta["iteration"] = global_iter;
    meta["stage"] = "final";
    save_actor(actor, art.actor(variant), meta);
}

void run_pipeline(const cli::RunConfig& cfg) {
    stage1_initial_policy(cfg);
    stage2_collect(cfg);
    stage3_train_vae(cfg);
    stage4_train_memory(cfg);
    stage5_train_policy(cfg);
}

} // namespace memnav::policy
