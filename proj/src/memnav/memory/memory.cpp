#include "memnav/memory/memory.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "memnav/core/errors.hpp"
#include "memnav/kernels/kernels.hpp"
#include "memnav/neural/checkpoint.hpp"

namespace memnav::memory {

using neural::Graph;
using neural::TensorPtr;

const char* variant_name(LatentVariant v) {
    switch (v) {
    case LatentVariant::cur:
        return "cur";
    case LatentVariant::fut10:
        return "fut10";
    case LatentVariant::cur_fut10:
        return "cur+fut10";
    case LatentVariant::cur_fut20:
        return "cur+fut20";
    case LatentVariant::cur_past10:
        return "cur+past10";
    case LatentVariant::cur_past20:
        return "cur+past20";
    case LatentVariant::past10_cur_fut10:
        return "past10+cur+fut10";
    }
    return "?";
}

const std::vector<LatentVariant>& all_variants() {
    static const std::vector<LatentVariant> v = {
        LatentVariant::cur,        LatentVariant::fut10,      LatentVariant::cur_fut10,
        LatentVariant::cur_fut20,  LatentVariant::cur_past10, LatentVariant::cur_past20,
        LatentVariant::past10_cur_fut10,
    };
    return v;
}

LatentVariant parse_variant(const std::string& name) {
    for (const LatentVariant v : all_variants())
        if (name == variant_name(v)) return v;
    throw ConfigError("unknown latent variant: " + name);
}

void MemoryConfig::apply_variant(LatentVariant v) {
    use_past = use_cur = use_fut = false;
    offset_multiplier = 1;
    switch (v) {
    case LatentVariant::cur:
        use_cur = true;
        break;
    case LatentVariant::fut10:
        use_fut = true;
        break;
    case LatentVariant::cur_fut10:
        use_cur = use_fut = true;
        break;
    case LatentVariant::cur_fut20:
        use_cur = use_fut = true;
        offset_multiplier = 2;
        break;
    case LatentVariant::cur_past10:
        use_cur = use_past = true;
        break;
    case LatentVariant::cur_past20:
        use_cur = use_past = true;
        offset_multiplier = 2;
        break;
    case LatentVariant::past10_cur_fut10:
        use_past = use_cur = use_fut = true;
        break;
    }
}

LatentVariant MemoryConfig::variant() const {
    for (const LatentVariant v : all_variants()) {
        MemoryConfig c = *this;
        c.apply_variant(v);
        if (c.use_past == use_past && c.use_cur == use_cur && c.use_fut == use_fut &&
            c.offset_multiplier == offset_multiplier)
            return v;
    }
    throw ConfigError("memory config does not match any canonical variant");
}

void MemoryConfig::validate() const {
    if (n_l < 1) throw ConfigError("memory: n_l must be >= 1");
    if (offset_frames < 1) throw ConfigError("memory: offset_frames must be >= 1");
    if (offset_multiplier != 1 && offset_multiplier != 2)
        throw ConfigError("memory: offset_multiplier must be 1 or 2");
    if (offset() >= seq_len) throw ConfigError("memory: offset must be < seq_len");
    if (batch_size < 1 || epochs < 0) throw ConfigError("memory: bad batch_size/epochs");
}

MemoryModel MemoryModel::init(const MemoryConfig& cfg, int n_e, std::uint64_t seed) {
    cfg.validate();
    MemoryModel m;
    m.cfg = cfg;
    m.n_e = n_e;
    Rng rng = substream(seed, "memory.init");
    const auto H = static_cast<std::size_t>(cfg.n_l);
    const auto In = static_cast<std::size_t>(n_e);
    const double bound = 1.0 / std::sqrt(static_cast<double>(H));

    auto Wx = m.params.add("lstm.Wx", {4 * H, In});
    auto Wh = m.params.add("lstm.Wh", {4 * H, H});
    auto b = m.params.add("lstm.b", {4 * H});
    neural::init_uniform(*Wx, -bound, bound, rng);
    neural::init_uniform(*Wh, -bound, bound, rng);
    neural::init_constant(*b, 0.0);
    for (std::size_t k = H; k < 2 * H; ++k) b->v[k] = 1.0; // forget gate bias

    auto hW = m.params.add("head.W", {3 * In, H});
    auto hb = m.params.add("head.b", {3 * In});
    neural::init_kaiming_uniform(*hW, H, rng);
    neural::init_constant(*hb, 0.0);
    return m;
}

MemoryState MemoryState::zero(int n_l) {
    MemoryState s;
    s.h.assign(static_cast<std::size_t>(n_l), 0.0);
    s.c.assign(static_cast<std::size_t>(n_l), 0.0);
    return s;
}

std::vector<double> step_state(const MemoryModel& m, const std::vector<double>& z_vae,
                               MemoryState& state) {
    Graph g;
    auto x = g.constant({1, z_vae.size()}, z_vae);
    auto h = g.constant({1, state.h.size()}, state.h);
    auto c = g.constant({1, state.c.size()}, state.c);
    auto out = g.lstm_cell(x, h, c, m.params.at("lstm.Wx"), m.params.at("lstm.Wh"),
                           m.params.at("lstm.b"));
    state.h = out.h->v;
    state.c = out.c->v;
    return state.h;
}

std::vector<std::vector<double>> roll(const MemoryModel& m,
                                      const std::vector<std::vector<double>>& z_vae_seq) {
    if (z_vae_seq.empty()) throw RuntimeError("roll: empty sequence");
    MemoryState s = MemoryState::zero(m.cfg.n_l);
    std::vector<std::vector<double>> out;
    out.reserve(z_vae_seq.size());
    for (const auto& z : z_vae_seq) out.push_back(step_state(m, z, s));
    return out;
}

namespace {

// head output [T, 3*n_e] for a rolled hidden sequence [T, n_l]
TensorPtr head_graph(Graph& g, const MemoryModel& m, const TensorPtr& zt) {
    return g.affine(zt, m.params.at("head.W"), m.params.at("head.b"));
}

// teacher latents: deterministic encoder means for every frame of episode e
std::vector<double> episode_means(const latent::VaeModel& vae,
                                  const sensor::ScanDataset& dataset, std::size_t e) {
    const std::size_t len = dataset.episode_length(e);
    const auto L = static_cast<std::size_t>(dataset.ray_count());
    std::vector<double> xv(len * L);
    for (std::size_t i = 0; i < len; ++i) {
        const float* p = dataset.frame_ptr(e, i);
        for (std::size_t r = 0; r < L; ++r) xv[i * L + r] = p[r];
    }
    Graph g;
    auto x = g.constant({len, L, 1}, xv);
    auto heads = latent::encode_graph(g, vae, x);
    return heads.mu->v; // [len * n_e]
}

struct HeadSpec {
    int index;  // 0 past, 1 cur, 2 fut
    int offset; // target frame = t + offset
};

std::vector<HeadSpec> enabled_heads(const MemoryConfig& cfg) {
    std::vector<HeadSpec> heads;
    if (cfg.use_past) heads.push_back({0, -cfg.offset()});
    if (cfg.use_cur) heads.push_back({1, 0});
    if (cfg.use_fut) heads.push_back({2, cfg.offset()});
    return heads;
}

} // namespace

HeadScans reconstruct_heads(const MemoryModel& m, const latent::VaeModel& vae,
                            const std::vector<double>& z_t) {
    if (static_cast<int>(z_t.size()) != m.cfg.n_l)
        throw RuntimeError("reconstruct_heads: z_t size mismatch");
    Graph g;
    auto zt = g.constant({1, z_t.size()}, z_t);
    auto seg = head_graph(g, m, zt);
    const auto ne = static_cast<std::size_t>(m.n_e);
    HeadScans out;
    sensor::DepthScan* scans[3] = {&out.past, &out.cur, &out.fut};
    for (std::size_t k = 0; k < 3; ++k) {
        auto z = g.slice_cols(seg, k * ne, (k + 1) * ne);
        auto recon = latent::decode_graph(g, vae, z);
        scans[k]->values = recon->v;
    }
    return out;
}

double memory_loss(const MemoryModel& m, const latent::VaeModel& vae,
                   const std::vector<std::vector<sensor::DepthScan>>& episodes) {
    const auto heads = enabled_heads(m.cfg);
    if (heads.empty()) return 0.0; // no reconstruction targets configured
    const auto ne = static_cast<std::size_t>(m.n_e);
    std::array<double, 3> sums{0, 0, 0};
    std::array<std::size_t, 3> counts{0, 0, 0};

    for (const auto& ep : episodes) {
        if (ep.empty()) continue;
        const std::size_t len = ep.size();
        const auto L = ep[0].values.size();
        // teacher means
        std::vector<double> xv(len * L);
        for (std::size_t i = 0; i < len; ++i)
            std::copy(ep[i].values.begin(), ep[i].values.end(), xv.begin() + i * L);
        Graph g;
        auto x = g.constant({len, L, 1}, xv);
        auto mu = latent::encode_graph(g, vae, x).mu;

        MemoryState s = MemoryState::zero(m.cfg.n_l);
        std::vector<double> zt_flat(len * static_cast<std::size_t>(m.cfg.n_l));
        for (std::size_t t = 0; t < len; ++t) {
            std::vector<double> zv(mu->v.begin() + t * ne, mu->v.begin() + (t + 1) * ne);
            const auto h = step_state(m, zv, s);
            std::copy(h.begin(), h.end(), zt_flat.begin() + t * h.size());
        }

        Graph g2;
        auto zt = g2.constant({len, static_cast<std::size_t>(m.cfg.n_l)}, zt_flat);
        auto seg = head_graph(g2, m, zt);
        for (const HeadSpec& hs : heads) {
            auto z = g2.slice_cols(seg, static_cast<std::size_t>(hs.index) * ne,
                                   (static_cast<std::size_t>(hs.index) + 1) * ne);
            auto recon = latent::decode_graph(g2, vae, z); // [len, L, 1]
            for (std::size_t t = 0; t < len; ++t) {
                const auto target = static_cast<long>(t) + hs.offset;
                if (target < 0 || target >= static_cast<long>(len)) continue;
                const double* rv = recon->v.data() + t * L;
                const double* tv = ep[static_cast<std::size_t>(target)].values.data();
                double sq = 0.0;
                for (std::size_t r = 0; r < L; ++r) {
                    const double d = rv[r] - tv[r];
                    sq += d * d;
                }
                sums[static_cast<std::size_t>(hs.index)] += sq / static_cast<double>(L);
                counts[static_cast<std::size_t>(hs.index)] += 1;
            }
        }
    }

    double loss = 0.0;
    std::size_t total = 0;
    for (const HeadSpec& hs : heads) {
        const auto i = static_cast<std::size_t>(hs.index);
        if (counts[i] > 0) loss += sums[i] / static_cast<double>(counts[i]);
        total += counts[i];
    }
    if (total == 0) throw RuntimeError("memory_loss: every frame masked (episodes too short)");
    return loss;
}

MemoryModel train_memory(const sensor::ScanDataset& dataset, const latent::VaeModel& vae,
                         const MemoryConfig& cfg, std::uint64_t seed,
                         const std::function<void(const MemoryEpochStats&)>& on_epoch) {
    cfg.validate();
    if (!cfg.use_past && !cfg.use_cur && !cfg.use_fut)
        throw ConfigError("train_memory: at least one reconstruction flag must be set");
    if (dataset.total_frames() == 0) throw ConfigError("train_memory: empty dataset");
    MemoryModel m = MemoryModel::init(cfg, vae.cfg.n_e, seed);
    const auto heads = enabled_heads(cfg);
    const auto H = static_cast<std::size_t>(cfg.n_l);
    const auto ne = static_cast<std::size_t>(m.n_e);
    const auto L = static_cast<std::size_t>(dataset.ray_count());

    // teacher latents, encoded once with the frozen encoder
    std::vector<std::vector<double>> teacher(dataset.episode_count());
    for (std::size_t e = 0; e < dataset.episode_count(); ++e)
        teacher[e] = episode_means(vae, dataset, e);

    // global mask sanity
    {
        std::size_t total = 0;
        for (std::size_t e = 0; e < dataset.episode_count(); ++e) {
            const auto len = static_cast<long>(dataset.episode_length(e));
            for (const HeadSpec& hs : heads) {
                const long lo = std::max<long>(0, -hs.offset);
                const long hi = std::min<long>(len, len - hs.offset);
                total += static_cast<std::size_t>(std::max<long>(0, hi - lo));
            }
        }
        if (total == 0)
            throw ConfigError("train_memory: configured offsets mask out every frame");
    }

    std::vector<std::size_t> order(dataset.episode_count());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng = substream(seed, "memory.shuffle");
    neural::AdamConfig adam;
    adam.lr = cfg.learning_rate;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_int(i)]);
        MemoryEpochStats stats;
        stats.epoch = epoch;
        std::size_t weight_frames = 0;

        std::size_t done = 0;
        while (done < order.size()) {
            const std::size_t bsz =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                      order.size() - done);
            // per-head valid counts over this batch (for normalization)
            std::array<std::size_t, 3> counts{0, 0, 0};
            for (std::size_t k = 0; k < bsz; ++k) {
                const auto len = static_cast<long>(dataset.episode_length(order[done + k]));
                for (const HeadSpec& hs : heads) {
                    const long lo = std::max<long>(0, -hs.offset);
                    const long hi = std::min<long>(len, len - hs.offset);
                    counts[static_cast<std::size_t>(hs.index)] +=
                        static_cast<std::size_t>(std::max<long>(0, hi - lo));
                }
            }

            m.params.zero_grad();
            double batch_loss = 0.0;
            for (std::size_t k = 0; k < bsz; ++k) {
                const std::size_t e = order[done + k];
                const std::size_t len = dataset.episode_length(e);
                std::vector<double> carry_h(H, 0.0), carry_c(H, 0.0);
                for (std::size_t s0 = 0; s0 < len; s0 += static_cast<std::size_t>(cfg.seq_len)) {
                    const std::size_t s1 =
                        std::min(len, s0 + static_cast<std::size_t>(cfg.seq_len));
                    const std::size_t T = s1 - s0;
                    Graph g;
                    auto h = g.constant({1, H}, carry_h);
                    auto c = g.constant({1, H}, carry_c);
                    std::vector<TensorPtr> hs_list;
                    hs_list.reserve(T);
                    for (std::size_t t = s0; t < s1; ++t) {
                        std::vector<double> zv(teacher[e].begin() + t * ne,
                                               teacher[e].begin() + (t + 1) * ne);
                        auto xin = g.constant({1, ne}, zv);
                        auto out = g.lstm_cell(xin, h, c, m.params.at("lstm.Wx"),
                                               m.params.at("lstm.Wh"), m.params.at("lstm.b"));
                        h = out.h;
                        c = out.c;
                        hs_list.push_back(h);
                    }
                    auto zt = g.concat_rows(hs_list); // [T, H]
                    auto seg = head_graph(g, m, zt);  // [T, 3*n_e]

                    TensorPtr loss;
                    for (const HeadSpec& hspec : heads) {
                        const auto hi_idx = static_cast<std::size_t>(hspec.index);
                        if (counts[hi_idx] == 0) continue;
                        std::vector<std::size_t> valid_rows;
                        std::vector<double> target;
                        for (std::size_t t = s0; t < s1; ++t) {
                            const auto tgt = static_cast<long>(t) + hspec.offset;
                            if (tgt < 0 || tgt >= static_cast<long>(len)) continue;
                            valid_rows.push_back(t - s0);
                            const float* p =
                                dataset.frame_ptr(e, static_cast<std::size_t>(tgt));
                            target.insert(target.end(), p, p + L);
                        }
                        if (valid_rows.empty()) continue;
                        auto z = g.slice_cols(seg, hi_idx * ne, (hi_idx + 1) * ne);
                        auto zv = g.gather_rows(z, valid_rows);
                        auto recon = latent::decode_graph(g, vae, zv);
                        auto recon_flat = g.reshape(recon, {valid_rows.size(), L});
                        auto tgt = g.constant({valid_rows.size(), L}, target);
                        // scan MSE summed over valid frames, normalized by the
                        // batch-wide valid count of this head
                        auto term = g.scale_const(g.mse(recon_flat, tgt),
                                                  static_cast<double>(valid_rows.size()) /
                                                      static_cast<double>(counts[hi_idx]));
                        loss = loss ? g.add(loss, term) : term;
                    }
                    if (loss) {
                        g.backward(loss);
                        batch_loss += loss->v[0];
                    }
                    carry_h = h->v; // detached carry into the next window
                    carry_c = c->v;
                }
            }
            for (const auto& [_, t] : vae.params.items()) t->zero_grad(); // frozen
            m.params.adam_step(adam);
            stats.loss += batch_loss * static_cast<double>(bsz);
            weight_frames += bsz;
            done += bsz;
        }
        if (weight_frames > 0) stats.loss /= static_cast<double>(weight_frames);
        if (on_epoch) on_epoch(stats);
    }
    return m;
}

HeadErrors head_errors(const MemoryModel& m, const latent::VaeModel& vae,
                       const sensor::ScanDataset& dataset) {
    HeadErrors out;
    const auto ne = static_cast<std::size_t>(m.n_e);
    const auto L = static_cast<std::size_t>(dataset.ray_count());
    const int off = m.cfg.offset();
    std::array<double, 3> sums{0, 0, 0};
    std::array<std::size_t, 3> counts{0, 0, 0};
    const std::array<int, 3> offsets{-off, 0, off};

    for (std::size_t e = 0; e < dataset.episode_count(); ++e) {
        const std::size_t len = dataset.episode_length(e);
        if (len == 0) continue;
        const std::vector<double> mu = episode_means(vae, dataset, e);
        MemoryState s = MemoryState::zero(m.cfg.n_l);
        std::vector<double> zt_flat(len * static_cast<std::size_t>(m.cfg.n_l));
        for (std::size_t t = 0; t < len; ++t) {
            std::vector<double> zv(mu.begin() + t * ne, mu.begin() + (t + 1) * ne);
            const auto h = step_state(m, zv, s);
            std::copy(h.begin(), h.end(), zt_flat.begin() + t * h.size());
        }
        Graph g;
        auto zt = g.constant({len, static_cast<std::size_t>(m.cfg.n_l)}, zt_flat);
        auto seg = head_graph(g, m, zt);
        for (std::size_t hi = 0; hi < 3; ++hi) {
            auto z = g.slice_cols(seg, hi * ne, (hi + 1) * ne);
            auto recon = latent::decode_graph(g, vae, z);
            for (std::size_t t = 0; t < len; ++t) {
                const auto tgt = static_cast<long>(t) + offsets[hi];
                if (tgt < 0 || tgt >= static_cast<long>(len)) continue;
                const double* rv = recon->v.data() + t * L;
                const float* tv = dataset.frame_ptr(e, static_cast<std::size_t>(tgt));
                double sq = 0.0;
                for (std::size_t r = 0; r < L; ++r) {
                    const double d = rv[r] - static_cast<double>(tv[r]);
                    sq += d * d;
                }
                sums[hi] += sq / static_cast<double>(L);
                counts[hi] += 1;
            }
        }
    }
    out.past = counts[0] ? sums[0] / static_cast<double>(counts[0]) : 0.0;
    out.cur = counts[1] ? sums[1] / static_cast<double>(counts[1]) : 0.0;
    out.fut = counts[2] ? sums[2] / static_cast<double>(counts[2]) : 0.0;
    out.past_count = counts[0];
    out.cur_count = counts[1];
    out.fut_count = counts[2];
    return out;
}

void save_memory(const MemoryModel& m, const std::string& path, const nlohmann::json& extra) {
    nlohmann::json meta = extra;
    meta["kind"] = "memory";
    meta["n_l"] = m.cfg.n_l;
    meta["n_e"] = m.n_e;
    meta["offset_frames"] = m.cfg.offset_frames;
    meta["variant"] = variant_name(m.cfg.variant());
    meta["seq_len"] = m.cfg.seq_len;
    neural::save_checkpoint(m.params, meta, path);
}

MemoryModel load_memory(const std::string& path) {
    auto ckpt = neural::load_checkpoint(path);
    if (ckpt.metadata.value("kind", "") != "memory")
        throw ConfigError("checkpoint is not a memory model: " + path);
    MemoryConfig cfg;
    cfg.n_l = ckpt.metadata.at("n_l");
    cfg.offset_frames = ckpt.metadata.at("offset_frames");
    cfg.seq_len = ckpt.metadata.at("seq_len");
    cfg.apply_variant(parse_variant(ckpt.metadata.at("variant")));
    MemoryModel m = MemoryModel::init(cfg, ckpt.metadata.at("n_e"), 0);
    for (const auto& [name, t] : m.params.items()) {
        const auto s = ckpt.params.at(name);
        if (s->shape != t->shape)
            throw ConfigError("checkpoint: shape mismatch for " + name);
        t->v = s->v;
    }
    return m;
}

} // namespace memnav::memory
