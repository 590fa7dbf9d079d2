#include "memnav/policy/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "memnav/core/errors.hpp"

namespace memnav::policy {

using neural::Graph;
using neural::TensorPtr;

void PpoConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must be in (0, 1]");
    if (gae_lambda < 0.0 || gae_lambda > 1.0) throw ConfigError("ppo: lambda must be in [0, 1]");
    if (!(clip_eps > 0.0)) throw ConfigError("ppo: clip_eps must be > 0");
    if (update_epochs < 1 || minibatch < 1 || horizon < 1 || workers < 1)
        throw ConfigError("ppo: epochs/minibatch/horizon/workers must be >= 1");
    if (iterations < 0 || checkpoint_interval < 1) throw ConfigError("ppo: bad iteration counts");
}

double value_of(const ActorCritic& ac, const std::vector<double>& obs) {
    Graph g;
    auto o = g.constant({1, obs.size()}, obs);
    return policy_graph(g, ac, o).value->v[0];
}

UpdateStats ppo_update(ActorCritic& ac, const RolloutBuffer& buffer, const PpoConfig& cfg,
                       Rng& rng) {
    const std::size_t n = buffer.steps.size();
    if (n == 0) throw RuntimeError("ppo_update: empty buffer");
    if (buffer.advantages.size() != n) throw RuntimeError("ppo_update: run compute_gae first");

    // normalize advantages per update
    std::vector<double> adv = buffer.advantages;
    double mean = 0;
    for (const double a : adv) mean += a;
    mean /= static_cast<double>(n);
    double var = 0;
    for (const double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : adv) a = (a - mean) / (sd + 1e-8);

    const auto D = static_cast<std::size_t>(ac.obs_dim);
    neural::AdamConfig adam;
    adam.lr = cfg.learning_rate;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    UpdateStats stats;
    std::size_t stat_batches = 0;
    for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[rng.uniform_int(i)]);
        std::size_t done = 0;
        while (done < n) {
            const std::size_t b = std::min<std::size_t>(cfg.minibatch, n - done);
            std::vector<double> obs_v(b * D), act_v(b * kActionDim), old_v(b), adv_v(b),
                ret_v(b);
            for (std::size_t k = 0; k < b; ++k) {
                const std::size_t idx = order[done + k];
                const StepRecord& s = buffer.steps[idx];
                std::copy(s.obs.begin(), s.obs.end(), obs_v.begin() + static_cast<long>(k * D));
                for (int a = 0; a < kActionDim; ++a)
                    act_v[k * kActionDim + static_cast<std::size_t>(a)] =
                        s.action[static_cast<std::size_t>(a)];
                old_v[k] = s.logp;
                adv_v[k] = adv[idx];
                ret_v[k] = buffer.returns[idx];
            }

            Graph g;
            auto obs = g.constant({b, D}, obs_v);
            auto actions = g.constant({b, kActionDim}, act_v);
            auto logp_old = g.constant({b}, old_v);
            auto adv_c = g.constant({b}, adv_v);
            auto ret_c = g.constant({b}, ret_v);

            auto heads = policy_graph(g, ac, obs);
            auto logp = gaussian_logp(g, heads.mean, heads.logstd, actions);
            auto ratio = g.exp_(g.sub(logp, logp_old));
            auto surr1 = g.mul(ratio, adv_c);
            auto surr2 =
                g.mul(g.clamp_const(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps), adv_c);
            auto pg_loss = g.scale_const(g.mean_all(g.min_(surr1, surr2)), -1.0);
            auto v_loss = g.mse(heads.value, ret_c);
            auto ent = entropy_node(g, heads.logstd);
            auto loss = g.add(g.add(pg_loss, g.scale_const(v_loss, cfg.vf_coef)),
                              g.scale_const(ent, -cfg.ent_coef));
            if (!std::isfinite(loss->v[0]))
                throw NumericalError("ppo_update: non-finite loss (pg=" +
                                     std::to_string(pg_loss->v[0]) +
                                     ", v=" + std::to_string(v_loss->v[0]) + ")");

            ac.params.zero_grad();
            g.backward(loss);
            ac.params.adam_step(adam);

            stats.policy_loss += pg_loss->v[0];
            stats.value_loss += v_loss->v[0];
            stats.entropy += ent->v[0];
            ++stat_batches;
            done += b;
        }
    }
    if (stat_batches > 0) {
        stats.policy_loss /= static_cast<double>(stat_batches);
        stats.value_loss /= static_cast<double>(stat_batches);
        stats.entropy /= static_cast<double>(stat_batches);
    }
    return stats;
}

void collect_segment(const ActorCritic& ac, Env& env, int horizon, Rng& act_rng,
                     RolloutBuffer& out, bool& env_needs_reset) {
    if (env_needs_reset) {
        env.reset();
        env_needs_reset = false;
    }
    for (int t = 0; t < horizon; ++t) {
        StepRecord rec;
        rec.obs = env.observation();
        const ActOut a = act(ac, rec.obs, act_rng);
        const Env::StepResult sr = env.step(a.action);
        rec.action = a.raw;
        rec.logp = a.logp;
        rec.value = a.value;
        rec.reward = sr.reward;
        rec.v_hor = env.v_hor();

        const bool last = t == horizon - 1;
        if (sr.done || sr.timeout) {
            EpisodeTag tag;
            tag.trav = env.trav();
            tag.steps = env.steps_in_episode();
            tag.total_reward = env.episode_return();
            if (sr.done) {
                rec.terminal = true;
                switch (sr.event) {
                case reward::EventKind::arrive:
                    tag.outcome = Outcome::success;
                    break;
                case reward::EventKind::collision:
                    tag.outcome = Outcome::collision;
                    break;
                case reward::EventKind::exceed:
                    tag.outcome = Outcome::exceed;
                    break;
                default:
                    tag.outcome = Outcome::timeout;
                }
            } else {
                rec.truncated = true;
                rec.next_value = value_of(ac, env.observation());
                tag.outcome = Outcome::timeout;
            }
            out.episodes.push_back(tag);
            if (last) {
                env_needs_reset = true;
            } else {
                env.reset();
            }
        } else if (last) {
            rec.truncated = true;
            rec.next_value = value_of(ac, env.observation());
        }
        out.steps.push_back(std::move(rec));
    }
}

void train_ppo(ActorCritic& ac, std::vector<std::unique_ptr<Env>>& envs, const PpoConfig& cfg,
               std::uint64_t master_seed, const std::string& stage_name,
               const std::function<bool(const IterationMetrics&)>& on_iteration) {
    cfg.validate();
    if (envs.size() != static_cast<std::size_t>(cfg.workers))
        throw ConfigError("train_ppo: env count must equal worker count");

    std::vector<Rng> act_rngs;
    for (int w = 0; w < cfg.workers; ++w)
        act_rngs.push_back(substream(master_seed, "policy.act", static_cast<std::uint64_t>(w)));
    Rng update_rng = substream(master_seed, "policy.update");
    std::vector<std::uint8_t> needs_reset(static_cast<std::size_t>(cfg.workers), 1);

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        std::vector<RolloutBuffer> segments(static_cast<std::size_t>(cfg.workers));
        {
            std::vector<std::thread> threads;
            threads.reserve(static_cast<std::size_t>(cfg.workers));
            for (int w = 0; w < cfg.workers; ++w) {
                threads.emplace_back([&, w] {
                    bool nr = needs_reset[static_cast<std::size_t>(w)] != 0;
                    collect_segment(ac, *envs[static_cast<std::size_t>(w)], cfg.horizon,
                                    act_rngs[static_cast<std::size_t>(w)],
                                    segments[static_cast<std::size_t>(w)], nr);
                    needs_reset[static_cast<std::size_t>(w)] = nr ? 1 : 0;
                });
            }
            for (auto& t : threads) t.join();
        }

        RolloutBuffer buffer;
        for (auto& seg : segments) {
            for (auto& s : seg.steps) buffer.steps.push_back(std::move(s));
            for (auto& e : seg.episodes) buffer.episodes.push_back(e);
        }
        compute_gae(buffer, cfg.gamma, cfg.gae_lambda);

        IterationMetrics m;
        m.iteration = iter;
        m.stage = stage_name;
        m.episodes = static_cast<int>(buffer.episodes.size());
        int successes = 0;
        for (const EpisodeTag& e : buffer.episodes) {
            m.mean_return += e.total_reward;
            if (e.outcome == Outcome::success) ++successes;
        }
        if (m.episodes > 0) {
            m.mean_return /= m.episodes;
            m.success_rate = static_cast<double>(successes) / m.episodes;
        }
        for (const StepRecord& s : buffer.steps) m.mean_v_hor += s.v_hor;
        if (!buffer.steps.empty()) m.mean_v_hor /= static_cast<double>(buffer.steps.size());

        m.losses = ppo_update(ac, buffer, cfg, update_rng);
        if (on_iteration && !on_iteration(m)) return;
    }
}

} // namespace memnav::policy
