// memnav: memory-augmented varying-speed navigation sandbox.
// Subcommands cover the training pipeline, evaluation, and benchmarking;
// all randomness flows from --seed through named sub-streams.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "memnav/bench/report.hpp"
#include "memnav/core/errors.hpp"
#include "memnav/core/version.hpp"
#include "memnav/kernels/kernels.hpp"
#include "memnav/policy/pipeline.hpp"

namespace fs = std::filesystem;
using namespace memnav;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1; // -1: keep config value
};

cli::RunConfig resolve_config(const GlobalOpts& g) {
    cli::RunConfig cfg = cli::load_config(g.config_path);
    if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    cfg.validate();
    return cfg;
}

void cmd_gen_world(const cli::RunConfig& cfg, double poisson_radius) {
    world::WorldSpec spec = cfg.world_base;
    spec.poisson_radius = poisson_radius;
    spec.seed = cfg.seed;
    const world::World w = world::generate_world(spec);
    fs::create_directories(cfg.out_dir);
    const std::string path =
        cfg.out_dir + "/world-" + std::to_string(cfg.seed) + ".json";
    world::save_world(w, path);
    std::cout << path << " obstacles=" << w.obstacles.size() << "\n";
}

std::vector<world::World> eval_maps(const cli::RunConfig& cfg,
                                    const std::vector<std::string>& world_files,
                                    bool large_obstacles) {
    std::vector<world::World> maps;
    for (const std::string& f : world_files) maps.push_back(world::load_world(f));
    const std::uint64_t map_seed = substream_seed(cfg.seed, "eval.maps");
    for (int i = static_cast<int>(maps.size()); i < cfg.eval_maps; ++i) {
        if (large_obstacles) {
            maps.push_back(bench::make_large_obstacle_map(
                cfg, substream_seed(map_seed, "wall", static_cast<std::uint64_t>(i))));
        } else {
            const double r = cfg.clutter_radius_min +
                             (cfg.clutter_radius_max - cfg.clutter_radius_min) *
                                 (cfg.eval_maps > 1
                                      ? static_cast<double>(i) / (cfg.eval_maps - 1)
                                      : 0.5);
            maps.push_back(bench::make_clutter_map(
                cfg, r, substream_seed(map_seed, "clutter", static_cast<std::uint64_t>(i))));
        }
    }
    return maps;
}

int count_successes(const std::vector<bench::TrialResult>& trials) {
    int n = 0;
    for (const auto& t : trials)
        if (t.outcome == policy::Outcome::success) ++n;
    return n;
}

void cmd_eval(const cli::RunConfig& cfg, const std::string& vae_path,
              const std::string& memory_path, const std::string& actor_path,
              const std::vector<std::string>& world_files, bool large_obstacles) {
    const bench::PolicyBundle bundle = bench::load_bundle(vae_path, memory_path, actor_path);
    const auto maps = eval_maps(cfg, world_files, large_obstacles);
    const auto trials = bench::evaluate(bundle, cfg, maps, cfg.eval_trials,
                                        substream_seed(cfg.seed, "eval"));
    fs::create_directories(cfg.out_dir);
    bench::write_trials_csv(trials, cfg.out_dir + "/trials.csv");
    bench::write_agv_vs_trav_csv(trials, 6, cfg.out_dir + "/agv_vs_trav.csv");

    std::vector<double> speeds, brightness;
    for (const auto& t : trials) {
        speeds.insert(speeds.end(), t.frame_speeds.begin(), t.frame_speeds.end());
        brightness.insert(brightness.end(), t.frame_brightness.begin(),
                          t.frame_brightness.end());
    }
    bench::write_speed_density_csv(bench::speed_vs_density(speeds, brightness, 6),
                                   cfg.out_dir + "/speed_density.csv");

    nlohmann::json summary{
        {"config_hash", cli::config_hash(cfg)},
        {"tool_version", kToolVersion},
        {"maps", maps.size()},
        {"trials", trials.size()},
        {"success_rate", trials.empty()
                             ? 0.0
                             : static_cast<double>(count_successes(trials)) /
                                   static_cast<double>(trials.size())}};
    std::ofstream f(cfg.out_dir + "/eval-summary.json", std::ios::binary);
    f << summary.dump(2) << '\n';
    std::cout << summary.dump() << "\n";
}

// success rate of a checkpoint on a fixed map set
double checkpoint_success(const cli::RunConfig& cfg, const std::string& vae_path,
                          const std::string& memory_path, const std::string& actor_path,
                          const std::vector<world::World>& maps, std::uint64_t eval_seed) {
    const bench::PolicyBundle bundle = bench::load_bundle(vae_path, memory_path, actor_path);
    const auto trials = bench::evaluate(bundle, cfg, maps, cfg.eval_trials, eval_seed);
    return trials.empty() ? 0.0
                          : static_cast<double>(count_successes(trials)) /
                                static_cast<double>(trials.size());
}

void run_policy_seeds(const cli::RunConfig& base, const std::string& variant, int seeds,
                      std::vector<cli::RunConfig>& out_cfgs) {
    // each seed trains in its own output directory, in parallel pairs
    std::vector<std::thread> pool;
    out_cfgs.clear();
    for (int s = 0; s < seeds; ++s) {
        cli::RunConfig cfg = base;
        cfg.latent_variant = variant;
        cfg.memory_cfg.apply_variant(memory::parse_variant(variant));
        cfg.seed = substream_seed(base.seed, "bench.seed", static_cast<std::uint64_t>(s));
        cfg.out_dir = base.out_dir + "/" + variant + "-seed" + std::to_string(s);
        out_cfgs.push_back(cfg);
    }
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t i = 0; i < out_cfgs.size(); i += hw) {
        const std::size_t j1 = std::min(out_cfgs.size(), i + hw);
        std::vector<std::thread> batch;
        for (std::size_t j = i; j < j1; ++j) {
            batch.emplace_back([&, j] {
                fs::create_directories(out_cfgs[j].out_dir);
                fs::copy_file(base.out_dir + "/vae.ckpt", out_cfgs[j].out_dir + "/vae.ckpt",
                              fs::copy_options::overwrite_existing);
                fs::copy_file(base.out_dir + "/memory-" + variant + ".ckpt",
                              out_cfgs[j].out_dir + "/memory-" + variant + ".ckpt",
                              fs::copy_options::overwrite_existing);
                policy::stage5_train_policy(out_cfgs[j]);
            });
        }
        for (auto& t : batch) t.join();
    }
}

bench::LatentRuns collect_latent_runs(const cli::RunConfig& base, const std::string& variant,
                                      const std::vector<cli::RunConfig>& seed_cfgs,
                                      const std::vector<world::World>& maps) {
    bench::LatentRuns runs;
    runs.variant = variant;
    for (int it = base.ppo.checkpoint_interval; it <= base.ppo.iterations;
         it += base.ppo.checkpoint_interval)
        runs.checkpoint_iterations.push_back(it);
    for (const cli::RunConfig& cfg : seed_cfgs) {
        const policy::Artifacts art{cfg.out_dir};
        std::vector<double> row;
        for (const int it : runs.checkpoint_iterations) {
            row.push_back(checkpoint_success(cfg, art.vae(), art.memory_model(variant),
                                             art.actor_iter(variant, it), maps,
                                             substream_seed(base.seed, "bench.eval")));
        }
        runs.success.push_back(row);
    }
    return runs;
}

void cmd_bench_latents(const cli::RunConfig& base, const std::vector<std::string>& variants,
                       int seeds) {
    const policy::Artifacts art{base.out_dir};

    std::vector<bench::LatentRuns> all_runs;
    const auto maps = eval_maps(base, {}, /*large_obstacles=*/true);
    for (const std::string& variant : variants) {
        // one memory model per configuration, shared by all its policy seeds
        cli::RunConfig mcfg = base;
        mcfg.latent_variant = variant;
        mcfg.memory_cfg.apply_variant(memory::parse_variant(variant));
        if (!fs::exists(art.memory_model(variant))) policy::stage4_train_memory(mcfg);

        std::vector<cli::RunConfig> seed_cfgs;
        run_policy_seeds(mcfg, variant, seeds, seed_cfgs);
        all_runs.push_back(collect_latent_runs(mcfg, variant, seed_cfgs, maps));
    }

    const bench::BenchmarkReport report =
        bench::compare_latents(all_runs, 10000, substream_seed(base.seed, "bench.perm"));
    nlohmann::json j = bench::report_to_json(report);
    j["config_hash"] = cli::config_hash(base);
    std::ofstream f(base.out_dir + "/latents-report.json", std::ios::binary);
    f << j.dump(2) << '\n';
    bench::write_success_vs_iteration_csv(all_runs, base.out_dir + "/success_vs_iteration.csv");
    std::cout << j.dump() << "\n";
}

void cmd_bench_speed(const cli::RunConfig& base, const std::vector<double>& v_desires,
                     int seeds) {
    const auto maps = eval_maps(base, {}, /*large_obstacles=*/false);

    struct VariantResult {
        std::string name;
        std::vector<bench::TrialResult> trials;
        bench::ParetoPoint point;
    };
    std::vector<VariantResult> results;

    auto run_policy_set = [&](const std::string& name, reward::SpeedMode mode,
                              double v_desire) {
        cli::RunConfig cfg = base;
        cfg.weights.mode = mode;
        cfg.weights.v_desire = v_desire;
        std::vector<cli::RunConfig> seed_cfgs;
        run_policy_seeds(cfg, cfg.latent_variant, seeds, seed_cfgs);

        VariantResult vr;
        vr.name = name;
        std::vector<double> agvs;
        int successes = 0, total = 0;
        for (const cli::RunConfig& sc : seed_cfgs) {
            const policy::Artifacts art{sc.out_dir};
            const bench::PolicyBundle bundle = bench::load_bundle(
                art.vae(), art.memory_model(sc.latent_variant), art.actor(sc.latent_variant));
            auto trials = bench::evaluate(bundle, sc, maps, sc.eval_trials,
                                          substream_seed(base.seed, "bench.speed.eval"));
            for (const auto& t : trials) {
                ++total;
                if (t.outcome == policy::Outcome::success) {
                    ++successes;
                    agvs.push_back(bench::agv(t));
                }
            }
            vr.trials.insert(vr.trials.end(), trials.begin(), trials.end());
        }
        vr.point.success_rate = total ? static_cast<double>(successes) / total : 0.0;
        vr.point.speed = agvs.empty() ? 0.0 : bench::mean_of(agvs);
        results.push_back(std::move(vr));
    };

    run_policy_set("varying", reward::SpeedMode::varying, base.weights.v_desire);
    for (const double vd : v_desires)
        run_policy_set("fixed-" + std::to_string(vd).substr(0, 3), reward::SpeedMode::fixed, vd);

    std::vector<bench::ParetoPoint> points;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& vr : results) {
        points.push_back(vr.point);
        rows.push_back({{"name", vr.name},
                        {"speed", vr.point.speed},
                        {"success_rate", vr.point.success_rate}});
    }
    nlohmann::json j{{"rows", rows}, {"config_hash", cli::config_hash(base)}};
    fs::create_directories(base.out_dir);
    std::ofstream f(base.out_dir + "/speed-report.json", std::ios::binary);
    f << j.dump(2) << '\n';
    bench::write_pareto_csv(points, base.out_dir + "/pareto.csv");
    for (const auto& vr : results)
        bench::write_trials_csv(vr.trials, base.out_dir + "/trials-" + vr.name + ".csv");
    std::cout << j.dump() << "\n";
}

void cmd_plot_data(const cli::RunConfig& cfg, const std::string& metrics_path,
                   const std::string& trials_path) {
    fs::create_directories(cfg.out_dir);
    if (!metrics_path.empty()) {
        std::ifstream f(metrics_path);
        if (!f) throw memnav::RuntimeError("cannot open metrics: " + metrics_path);
        std::ofstream out(cfg.out_dir + "/success_vs_iteration.csv", std::ios::binary);
        out << "iteration,stage,success_rate,mean_return,mean_v_hor\n";
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            const nlohmann::json j = nlohmann::json::parse(line);
            out << j.at("iteration").get<int>() << ',' << j.at("stage").get<std::string>()
                << ',' << j.at("success_rate").get<double>() << ','
                << j.at("mean_return").get<double>() << ','
                << j.at("mean_v_hor").get<double>() << '\n';
        }
    }
    if (!trials_path.empty()) {
        std::ifstream f(trials_path);
        if (!f) throw memnav::RuntimeError("cannot open trials: " + trials_path);
        // pass-through with trav binning for the AGV plot
        std::vector<bench::TrialResult> trials;
        std::string line;
        std::getline(f, line); // header
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            bench::TrialResult t;
            std::stringstream ss(line);
            std::string field;
            std::getline(ss, field, ',');
            t.map_id = std::stoi(field);
            std::getline(ss, field, ',');
            t.seed = std::stoull(field);
            std::getline(ss, field, ',');
            if (field == "success") t.outcome = policy::Outcome::success;
            else if (field == "collision") t.outcome = policy::Outcome::collision;
            else if (field == "exceed") t.outcome = policy::Outcome::exceed;
            else t.outcome = policy::Outcome::timeout;
            std::getline(ss, field, ',');
            t.flight_time_s = std::stod(field);
            std::getline(ss, field, ',');
            t.path_length_m = std::stod(field);
            std::getline(ss, field, ',');
            t.straight_dist_m = std::stod(field);
            std::getline(ss, field, ',');
            t.mean_v_hor = std::stod(field);
            std::getline(ss, field, ',');
            t.trav = std::stod(field);
            trials.push_back(t);
        }
        bench::write_agv_vs_trav_csv(trials, 6, cfg.out_dir + "/agv_vs_trav.csv");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"memnav: memory-augmented varying-speed navigation sandbox"};
    app.set_version_flag("--version", kToolVersion);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "run configuration file (TOML-style key=value)");
    app.add_option("--seed", g.seed, "master seed (overrides config)");
    app.add_option("--out", g.out_dir, "output directory (overrides config)");
    std::string kernel_backend = "auto";
    app.add_option("--kernel", kernel_backend,
                   "kernel backend: auto|scalar|avx2|neon (default auto)");
    app.require_subcommand(1);

    double poisson_radius = 5.0;
    auto* gen = app.add_subcommand("gen-world", "generate a Poisson-disk obstacle world");
    gen->add_option("--poisson-radius", poisson_radius, "minimum obstacle spacing in meters")
        ->required();

    app.add_subcommand("pipeline", "run all training stages in order");
    app.add_subcommand("train-vae", "train the depth VAE on the collected dataset");
    app.add_subcommand("train-memory", "train the LSTM memory latent (frozen VAE)");
    auto* tppo = app.add_subcommand("train-ppo", "train the PPO policy");
    bool stage1_only = false;
    tppo->add_flag("--stage1", stage1_only,
                   "train the initial obstacle-free policy instead of the curriculum");
    app.add_subcommand("collect", "collect a depth-sequence dataset with the initial policy");

    auto* ev = app.add_subcommand("eval", "evaluate a policy bundle on maps");
    std::string vae_path, memory_path, actor_path;
    std::vector<std::string> world_files;
    bool large_obstacles = false;
    ev->add_option("--vae", vae_path, "VAE checkpoint (default <out>/vae.ckpt)");
    ev->add_option("--memory", memory_path, "memory checkpoint");
    ev->add_option("--actor", actor_path, "actor checkpoint");
    ev->add_option("--world", world_files, "world JSON file(s) to evaluate on");
    ev->add_flag("--large-obstacles", large_obstacles,
                 "generate large-obstacle maps instead of clutter maps");

    auto* bl = app.add_subcommand("bench-latents", "compare latent configurations");
    std::string configs_csv = "cur,cur+past20";
    int bench_seeds = 10;
    bl->add_option("--configs", configs_csv, "comma-separated latent variants");
    bl->add_option("--seeds", bench_seeds, "training seeds per variant");

    auto* bs = app.add_subcommand("bench-speed", "varying vs fixed speed benchmark");
    std::vector<double> v_desires = {1.5, 2.5, 3.5};
    int speed_seeds = 5;
    bs->add_option("--v-desire", v_desires, "fixed-speed targets to train against");
    bs->add_option("--seeds", speed_seeds, "training seeds per policy variant");

    auto* pd = app.add_subcommand("plot-data", "emit plot-ready CSVs from stored artifacts");
    std::string metrics_path, trials_path;
    pd->add_option("--metrics", metrics_path, "training metrics JSONL");
    pd->add_option("--trials", trials_path, "trials CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (kernel_backend == "scalar")
            kernels::force_backend(kernels::Backend::scalar);
        else if (kernel_backend == "avx2")
            kernels::force_backend(kernels::Backend::avx2);
        else if (kernel_backend == "neon")
            kernels::force_backend(kernels::Backend::neon);
        else if (kernel_backend != "auto")
            throw memnav::ConfigError("unknown kernel backend: " + kernel_backend);

        const cli::RunConfig cfg = resolve_config(g);
        const policy::Artifacts art{cfg.out_dir};

        if (gen->parsed()) {
            cmd_gen_world(cfg, poisson_radius);
        } else if (app.got_subcommand("pipeline")) {
            policy::run_pipeline(cfg);
        } else if (app.got_subcommand("collect")) {
            policy::stage2_collect(cfg);
        } else if (app.got_subcommand("train-vae")) {
            policy::stage3_train_vae(cfg);
        } else if (app.got_subcommand("train-memory")) {
            policy::stage4_train_memory(cfg);
        } else if (app.got_subcommand("train-ppo")) {
            if (stage1_only)
                policy::stage1_initial_policy(cfg);
            else
                policy::stage5_train_policy(cfg);
        } else if (ev->parsed()) {
            if (vae_path.empty()) vae_path = art.vae();
            if (memory_path.empty()) memory_path = art.memory_model(cfg.latent_variant);
            if (actor_path.empty()) actor_path = art.actor(cfg.latent_variant);
            cmd_eval(cfg, vae_path, memory_path, actor_path, world_files, large_obstacles);
        } else if (bl->parsed()) {
            std::vector<std::string> variants;
            std::stringstream ss(configs_csv);
            std::string item;
            while (std::getline(ss, item, ',')) variants.push_back(item);
            cmd_bench_latents(cfg, variants, bench_seeds);
        } else if (bs->parsed()) {
            cmd_bench_speed(cfg, v_desires, speed_seeds);
        } else if (pd->parsed()) {
            cmd_plot_data(cfg, metrics_path, trials_path);
        }
    } catch (const memnav::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
