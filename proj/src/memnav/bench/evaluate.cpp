#include "memnav/bench/evaluate.hpp"

#include <cmath>

#include "memnav/core/errors.hpp"

namespace memnav::bench {

PolicyBundle load_bundle(const std::string& vae_path, const std::string& memory_path,
                         const std::string& actor_path) {
    PolicyBundle b{latent::load_vae(vae_path), memory::load_memory(memory_path),
                   policy::load_actor(actor_path)};
    if (b.mem.n_e != b.vae.cfg.n_e)
        throw ConfigError("bundle: memory n_e does not match VAE latent dimension");
    if (b.actor.obs_dim != b.mem.cfg.n_l + dynamics::kFeatureCount)
        throw ConfigError("bundle: actor observation size does not match n_l + feature count");
    return b;
}

std::vector<TrialResult> evaluate(const PolicyBundle& bundle, const cli::RunConfig& cfg,
                                  const std::vector<world::World>& maps, int trials_per_map,
                                  std::uint64_t seed) {
    std::vector<TrialResult> results;
    results.reserve(maps.size() * static_cast<std::size_t>(trials_per_map));
    Rng dummy(0); // deterministic mode never draws

    for (std::size_t mi = 0; mi < maps.size(); ++mi) {
        policy::WorldSource src;
        src.kind = policy::WorldSource::Kind::fixed_maps;
        src.base = maps[mi].spec;
        src.maps = {maps[mi]};
        const policy::EnvConfig ec = policy::make_env_config(cfg, src);

        for (int trial = 0; trial < trials_per_map; ++trial) {
            const std::uint64_t trial_seed =
                substream_seed(seed, "eval.trial",
                               static_cast<std::uint64_t>(mi) * 100003u +
                                   static_cast<std::uint64_t>(trial));
            policy::Env env(ec, &bundle.vae, &bundle.mem, trial_seed, 0);
            env.reset();

            TrialResult r;
            r.map_id = static_cast<int>(mi);
            r.seed = trial_seed;
            r.trav = env.trav();
            const Vec3 start = env.state().p;
            r.straight_dist_m = (env.goal() - start).norm();
            Vec3 prev = start;

            while (true) {
                r.frame_speeds.push_back(env.v_hor());
                double brightness = 0;
                for (const double v : env.last_scan().values) brightness += v;
                r.frame_brightness.push_back(brightness /
                                             static_cast<double>(env.last_scan().values.size()));

                const policy::ActOut a =
                    policy::act(bundle.actor, env.observation(), dummy, /*deterministic=*/true);
                const policy::Env::StepResult sr = env.step(a.action);
                r.path_length_m += (env.state().p - prev).norm();
                prev = env.state().p;
                r.mean_v_hor += env.v_hor();

                if (sr.done || sr.timeout) {
                    if (sr.done) {
                        switch (sr.event) {
                        case reward::EventKind::arrive:
                            r.outcome = policy::Outcome::success;
                            break;
                        case reward::EventKind::collision:
                            r.outcome = policy::Outcome::collision;
                            break;
                        case reward::EventKind::exceed:
                            r.outcome = policy::Outcome::exceed;
                            break;
                        default:
                            r.outcome = policy::Outcome::timeout;
                        }
                    } else {
                        r.outcome = policy::Outcome::timeout;
                    }
                    break;
                }
            }
            r.flight_time_s = env.steps_in_episode() * ec.dt;
            if (env.steps_in_episode() > 0)
                r.mean_v_hor /= static_cast<double>(env.steps_in_episode());
            results.push_back(std::move(r));
        }
    }
    return results;
}

double agv(const TrialResult& trial) {
    if (trial.outcome != policy::Outcome::success)
        throw RuntimeError("agv: defined only for successful trials");
    if (trial.flight_time_s <= 0) throw RuntimeError("agv: zero flight time");
    return trial.straight_dist_m / trial.flight_time_s;
}

world::World make_clutter_map(const cli::RunConfig& cfg, double poisson_radius,
                              std::uint64_t seed) {
    world::WorldSpec spec = cfg.world_base;
    spec.poisson_radius = poisson_radius;
    spec.seed = seed;
    return world::generate_world(spec);
}

world::World make_large_obstacle_map(const cli::RunConfig& cfg, std::uint64_t seed) {
    world::WorldSpec spec = cfg.world_base;
    spec.poisson_radius = 8.0;
    spec.obstacle_radius_min = 0.6;
    spec.obstacle_radius_max = std::min(2.5, spec.poisson_radius / 2.0);
    spec.seed = seed;

    Rng rng = substream(seed, "wall_map");
    world::World w = world::World::empty(spec);

    // a solid wall of overlapping large cylinders, randomly placed and
    // oriented near the center of the field
    const double span_x = spec.bounds_max.x - spec.bounds_min.x;
    const double cx = rng.uniform(spec.bounds_min.x + 0.35 * span_x,
                                  spec.bounds_max.x - 0.35 * span_x);
    const double cy = rng.uniform(spec.bounds_min.y + 0.35 * span_x,
                                  spec.bounds_max.y - 0.35 * span_x);
    const double angle = rng.uniform(0.0, 3.14159265358979323846);
    const double wall_half = rng.uniform(5.0, 7.0);
    const double r_wall = 2.2;
    const double pitch = 1.6; // overlap keeps the wall gap-free
    for (double s = -wall_half; s <= wall_half; s += pitch) {
        w.obstacles.push_back({cx + s * std::cos(angle), cy + s * std::sin(angle), r_wall});
    }

    // sparse clutter away from the wall
    world::WorldSpec clutter = spec;
    clutter.poisson_radius = 9.0;
    clutter.seed = rng.next();
    const world::World scatter = world::generate_world(clutter);
    for (const world::Obstacle& o : scatter.obstacles) {
        const double dx = o.cx - cx, dy = o.cy - cy;
        const double along = dx * std::cos(angle) + dy * std::sin(angle);
        const double across = -dx * std::sin(angle) + dy * std::cos(angle);
        if (std::abs(along) < wall_half + 4.0 && std::abs(across) < 4.0) continue;
        w.obstacles.push_back(o);
    }
    return w;
}

} // namespace memnav::bench
