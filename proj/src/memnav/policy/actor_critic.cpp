#include "memnav/policy/actor_critic.hpp"

#include <cmath>

#include "memnav/core/errors.hpp"
#include "memnav/neural/checkpoint.hpp"

namespace memnav::policy {

using neural::Graph;
using neural::TensorPtr;

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
} // namespace

ActorCritic ActorCritic::init(const PolicyNetConfig& cfg, int obs_dim, std::uint64_t seed) {
    if (obs_dim < 1) throw ConfigError("actor_critic: obs_dim must be >= 1");
    if (cfg.trunk_widths.empty()) throw ConfigError("actor_critic: trunk must have layers");
    ActorCritic ac;
    ac.cfg = cfg;
    ac.obs_dim = obs_dim;
    Rng rng = substream(seed, "policy.init");
    std::size_t in = static_cast<std::size_t>(obs_dim);
    for (std::size_t i = 0; i < cfg.trunk_widths.size(); ++i) {
        const auto w = static_cast<std::size_t>(cfg.trunk_widths[i]);
        auto W = ac.params.add("trunk.l" + std::to_string(i) + ".W", {w, in});
        auto b = ac.params.add("trunk.l" + std::to_string(i) + ".b", {w});
        neural::init_kaiming_uniform(*W, in, rng);
        neural::init_constant(*b, 0.0);
        in = w;
    }
    {
        auto W = ac.params.add("actor.W", {kActionDim, in});
        auto b = ac.params.add("actor.b", {kActionDim});
        // small actor head keeps the initial policy near zero action
        neural::init_uniform(*W, -0.01, 0.01, rng);
        neural::init_constant(*b, 0.0);
    }
    {
        auto W = ac.params.add("critic.W", {1, in});
        auto b = ac.params.add("critic.b", {1});
        neural::init_kaiming_uniform(*W, in, rng);
        neural::init_constant(*b, 0.0);
    }
    auto logstd = ac.params.add("actor.logstd", {kActionDim});
    neural::init_constant(*logstd, cfg.logstd_init);
    return ac;
}

std::array<double, kActionDim> ActorCritic::action_limits() const {
    return {cfg.limits.accel_max, cfg.limits.accel_max, cfg.limits.accel_max,
            cfg.limits.yaw_rate_max};
}

PolicyHeads policy_graph(Graph& g, const ActorCritic& ac, const TensorPtr& obs) {
    if (obs->shape.size() != 2 || obs->dim(1) != static_cast<std::size_t>(ac.obs_dim))
        throw RuntimeError("policy_graph: observation must be [B, obs_dim]");
    TensorPtr h = obs;
    for (std::size_t i = 0; i < ac.cfg.trunk_widths.size(); ++i) {
        h = g.affine(h, ac.params.at("trunk.l" + std::to_string(i) + ".W"),
                     ac.params.at("trunk.l" + std::to_string(i) + ".b"));
        h = g.tanh_(h);
    }
    const auto lim = ac.action_limits();
    auto lim_t = g.constant({kActionDim}, {lim[0], lim[1], lim[2], lim[3]});
    auto mean = g.rowwise_scale(
        g.tanh_(g.affine(h, ac.params.at("actor.W"), ac.params.at("actor.b"))), lim_t);
    auto value = g.sum_rows(g.affine(h, ac.params.at("critic.W"), ac.params.at("critic.b")));
    return {mean, value, ac.params.at("actor.logstd")};
}

TensorPtr gaussian_logp(Graph& g, const TensorPtr& mean, const TensorPtr& logstd,
                        const TensorPtr& actions) {
    const auto N = static_cast<double>(mean->dim(1));
    auto inv_sigma = g.exp_(g.scale_const(logstd, -1.0));
    auto t = g.rowwise_scale(g.sub(actions, mean), inv_sigma);
    auto quad = g.scale_const(g.sum_rows(g.mul(t, t)), -0.5); // [B]
    auto norm = g.add_const(g.scale_const(g.sum_all(logstd), -1.0), -0.5 * N * kLog2Pi);
    return g.add_scalar_node(quad, norm);
}

TensorPtr entropy_node(Graph& g, const TensorPtr& logstd) {
    const auto N = static_cast<double>(logstd->numel());
    return g.add_const(g.sum_all(logstd), 0.5 * N * (1.0 + kLog2Pi));
}

ActOut act(const ActorCritic& ac, const std::vector<double>& obs, Rng& rng,
           bool deterministic) {
    Graph g;
    auto o = g.constant({1, obs.size()}, obs);
    auto heads = policy_graph(g, ac, o);
    ActOut out;
    out.value = heads.value->v[0];
    double quad = 0.0, sum_logstd = 0.0;
    for (int k = 0; k < kActionDim; ++k) {
        const double m = heads.mean->v[static_cast<std::size_t>(k)];
        const double ls = heads.logstd->v[static_cast<std::size_t>(k)];
        const double sd = std::exp(ls);
        const double a = deterministic ? m : m + sd * rng.normal();
        out.raw[static_cast<std::size_t>(k)] = a;
        const double zn = (a - m) / sd;
        quad += zn * zn;
        sum_logstd += ls;
    }
    out.logp = -0.5 * quad - sum_logstd - 0.5 * kActionDim * kLog2Pi;
    out.action.accel = {out.raw[0], out.raw[1], out.raw[2]};
    out.action.yaw_rate = out.raw[3];
    return out;
}

void save_actor(const ActorCritic& ac, const std::string& path, const nlohmann::json& extra) {
    nlohmann::json meta = extra;
    meta["kind"] = "actor";
    meta["obs_dim"] = ac.obs_dim;
    meta["trunk_widths"] = ac.cfg.trunk_widths;
    meta["logstd_init"] = ac.cfg.logstd_init;
    meta["accel_max"] = ac.cfg.limits.accel_max;
    meta["yaw_rate_max"] = ac.cfg.limits.yaw_rate_max;
    neural::save_checkpoint(ac.params, meta, path);
}

ActorCritic load_actor(const std::string& path) {
    auto ckpt = neural::load_checkpoint(path);
    if (ckpt.metadata.value("kind", "") != "actor")
        throw ConfigError("checkpoint is not an actor model: " + path);
    PolicyNetConfig cfg;
    cfg.trunk_widths = ckpt.metadata.at("trunk_widths").get<std::vector<int>>();
    cfg.logstd_init = ckpt.metadata.at("logstd_init");
    cfg.limits.accel_max = ckpt.metadata.at("accel_max");
    cfg.limits.yaw_rate_max = ckpt.metadata.at("yaw_rate_max");
    ActorCritic ac = ActorCritic::init(cfg, ckpt.metadata.at("obs_dim"), 0);
    for (const auto& [name, t] : ac.params.items()) {
        const auto s = ckpt.params.at(name);
        if (s->shape != t->shape)
            throw ConfigError("checkpoint: shape mismatch for " + name);
        t->v = s->v;
    }
    return ac;
}

} // namespace memnav::policy
