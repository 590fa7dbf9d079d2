#include "memnav/latent/vae.hpp"

#include <algorithm>
#include <cmath>

#include "memnav/core/errors.hpp"
#include "memnav/neural/checkpoint.hpp"

namespace memnav::latent {

using neural::Graph;
using neural::TensorPtr;

void VaeConfig::validate(int ray_count) const {
    if (n_e < 1) throw ConfigError("vae: n_e must be >= 1");
    if (beta_norm < 0) throw ConfigError("vae: beta_norm must be >= 0");
    if (channels.size() != 6) throw ConfigError("vae: exactly six conv layers expected");
    for (const int c : channels)
        if (c < 1) throw ConfigError("vae: channel counts must be positive");
    if (kernel != 2 * stride || pad * 2 != kernel - stride)
        throw ConfigError("vae: kernel/stride/pad must halve length exactly (k=2s, 2p=k-s)");
    if (ray_count % 64 != 0)
        throw ConfigError("vae: ray_count must be divisible by 64 (six stride-2 layers)");
    if (batch_size < 1 || epochs < 0) throw ConfigError("vae: bad batch_size/epochs");
}

int VaeModel::flat_size() const { return cfg.channels.back() * (ray_count >> 6); }

VaeModel VaeModel::init(const VaeConfig& cfg, int ray_count, std::uint64_t seed) {
    cfg.validate(ray_count);
    VaeModel m;
    m.cfg = cfg;
    m.ray_count = ray_count;
    Rng rng = substream(seed, "vae.init");
    const auto K = static_cast<std::size_t>(cfg.kernel);

    int cin = 1;
    for (int i = 0; i < 6; ++i) {
        const auto cout = static_cast<std::size_t>(cfg.channels[static_cast<std::size_t>(i)]);
        auto W = m.params.add("enc.conv" + std::to_string(i) + ".W",
                              {cout, K * static_cast<std::size_t>(cin)});
        auto b = m.params.add("enc.conv" + std::to_string(i) + ".b", {cout});
        neural::init_kaiming_uniform(*W, K * static_cast<std::size_t>(cin), rng);
        neural::init_constant(*b, 0.0);
        cin = static_cast<int>(cout);
    }
    const auto flat = static_cast<std::size_t>(m.flat_size());
    const auto ne = static_cast<std::size_t>(cfg.n_e);
    for (const char* head : {"enc.mu", "enc.logvar"}) {
        auto W = m.params.add(std::string(head) + ".W", {ne, flat});
        auto b = m.params.add(std::string(head) + ".b", {ne});
        neural::init_kaiming_uniform(*W, flat, rng);
        neural::init_constant(*b, 0.0);
    }
    {
        auto W = m.params.add("dec.fc.W", {flat, ne});
        auto b = m.params.add("dec.fc.b", {flat});
        neural::init_kaiming_uniform(*W, ne, rng);
        neural::init_constant(*b, 0.0);
    }
    // decoder channel chain mirrors the encoder
    std::vector<int> dchain;
    dchain.push_back(cfg.channels[5]);
    for (int i = 4; i >= 0; --i) dchain.push_back(cfg.channels[static_cast<std::size_t>(i)]);
    dchain.push_back(1);
    for (int i = 0; i < 6; ++i) {
        const auto ci = static_cast<std::size_t>(dchain[static_cast<std::size_t>(i)]);
        const auto co = static_cast<std::size_t>(dchain[static_cast<std::size_t>(i + 1)]);
        auto W = m.params.add("dec.deconv" + std::to_string(i) + ".W", {ci, K * co});
        auto b = m.params.add("dec.deconv" + std::to_string(i) + ".b", {co});
        neural::init_kaiming_uniform(*W, K * ci, rng);
        neural::init_constant(*b, 0.0);
    }
    return m;
}

EncodeHeads encode_graph(Graph& g, const VaeModel& m, const TensorPtr& x) {
    const VaeConfig& c = m.cfg;
    TensorPtr h = x;
    for (int i = 0; i < 6; ++i) {
        h = g.conv1d(h, m.params.at("enc.conv" + std::to_string(i) + ".W"),
                     m.params.at("enc.conv" + std::to_string(i) + ".b"), c.kernel, c.stride,
                     c.pad);
        h = g.relu(h);
    }
    const std::size_t B = h->dim(0);
    auto flat = g.reshape(h, {B, h->dim(1) * h->dim(2)});
    auto mu = g.affine(flat, m.params.at("enc.mu.W"), m.params.at("enc.mu.b"));
    auto logvar = g.clamp_min_const(
        g.affine(flat, m.params.at("enc.logvar.W"), m.params.at("enc.logvar.b")), c.logvar_floor);
    return {mu, logvar};
}

TensorPtr decode_graph(Graph& g, const VaeModel& m, const TensorPtr& z) {
    const VaeConfig& c = m.cfg;
    const std::size_t B = z->dim(0);
    auto h = g.affine(z, m.params.at("dec.fc.W"), m.params.at("dec.fc.b"));
    const auto cl = static_cast<std::size_t>(c.channels.back());
    h = g.reshape(h, {B, h->dim(1) / cl, cl});
    for (int i = 0; i < 6; ++i) {
        h = g.deconv1d(h, m.params.at("dec.deconv" + std::to_string(i) + ".W"),
                       m.params.at("dec.deconv" + std::to_string(i) + ".b"), c.kernel, c.stride,
                       c.pad);
        if (i < 5)
            h = g.relu(h);
        else
            h = g.sigmoid(h);
    }
    return h;
}

EncodeResult encode(const VaeModel& m, const sensor::DepthScan& scan, bool sample, Rng* rng) {
    if (static_cast<int>(scan.values.size()) != m.ray_count)
        throw RuntimeError("encode: scan ray_count mismatch");
    Graph g;
    auto x = g.constant({1, static_cast<std::size_t>(m.ray_count), 1}, scan.values);
    auto heads = encode_graph(g, m, x);
    EncodeResult r;
    r.mu = heads.mu->v;
    r.logvar = heads.logvar->v;
    if (sample) {
        if (rng == nullptr) throw RuntimeError("encode: sampling requires an rng");
        r.z.resize(r.mu.size());
        for (std::size_t i = 0; i < r.z.size(); ++i)
            r.z[i] = r.mu[i] + std::exp(0.5 * r.logvar[i]) * rng->normal();
    } else {
        r.z = r.mu;
    }
    return r;
}

sensor::DepthScan decode(const VaeModel& m, const std::vector<double>& z) {
    if (static_cast<int>(z.size()) != m.cfg.n_e) throw RuntimeError("decode: z size mismatch");
    Graph g;
    auto zt = g.constant({1, z.size()}, z);
    auto recon = decode_graph(g, m, zt);
    sensor::DepthScan scan;
    scan.values = recon->v;
    return scan;
}

VaeLossOut vae_loss_graph(Graph& g, const VaeModel& m, const TensorPtr& x,
                          const TensorPtr& eps) {
    auto heads = encode_graph(g, m, x);
    auto z = g.reparameterize(heads.mu, heads.logvar, eps);
    auto recon = decode_graph(g, m, z);
    auto recon_loss = g.mse(x, recon);
    auto kl = g.kl_unit_gaussian(heads.mu, heads.logvar);
    auto total = g.add(recon_loss, g.scale_const(kl, m.cfg.beta_norm));
    return {total, recon_loss, kl};
}

VaeTrainResult train_vae(const sensor::ScanDataset& dataset, const VaeConfig& cfg,
                         std::uint64_t seed,
                         const std::function<void(const VaeEpochStats&)>& on_epoch) {
    if (dataset.total_frames() == 0) throw ConfigError("train_vae: empty dataset");
    VaeTrainResult result{VaeModel::init(cfg, dataset.ray_count(), seed), {}};
    VaeModel& m = result.model;

    const std::size_t total = dataset.total_frames();
    std::vector<std::pair<std::size_t, std::size_t>> frames; // (episode, index)
    frames.reserve(total);
    for (std::size_t e = 0; e < dataset.episode_count(); ++e)
        for (std::size_t i = 0; i < dataset.episode_length(e); ++i) frames.emplace_back(e, i);

    Rng shuffle_rng = substream(seed, "vae.shuffle");
    Rng eps_rng = substream(seed, "vae.eps");
    neural::AdamConfig adam;
    adam.lr = cfg.learning_rate;
    const auto L = static_cast<std::size_t>(dataset.ray_count());
    const auto ne = static_cast<std::size_t>(cfg.n_e);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = frames.size(); i > 1; --i)
            std::swap(frames[i - 1], frames[shuffle_rng.uniform_int(i)]);
        VaeEpochStats stats;
        stats.epoch = epoch;
        std::size_t done = 0;
        while (done < frames.size()) {
            const std::size_t b = std::min<std::size_t>(cfg.batch_size, frames.size() - done);
            std::vector<double> xv(b * L);
            for (std::size_t k = 0; k < b; ++k) {
                const auto [e, idx] = frames[done + k];
                const float* p = dataset.frame_ptr(e, idx);
                for (std::size_t r = 0; r < L; ++r) xv[k * L + r] = p[r];
            }
            std::vector<double> ev(b * ne);
            for (double& x : ev) x = eps_rng.normal();

            Graph g;
            auto x = g.constant({b, L, 1}, xv);
            auto eps = g.constant({b, ne}, ev);
            auto loss = vae_loss_graph(g, m, x, eps);
            m.params.zero_grad();
            g.backward(loss.total);
            m.params.adam_step(adam);

            const double wgt = static_cast<double>(b) / static_cast<double>(frames.size());
            stats.recon += wgt * loss.recon->v[0];
            stats.kl += wgt * loss.kl->v[0];
            stats.total += wgt * loss.total->v[0];
            done += b;
        }
        result.curve.push_back(stats);
        if (on_epoch) on_epoch(stats);
    }
    return result;
}

double reconstruction_mse(const VaeModel& m, const sensor::ScanDataset& dataset) {
    if (dataset.total_frames() == 0) throw ConfigError("reconstruction_mse: empty dataset");
    const auto L = static_cast<std::size_t>(dataset.ray_count());
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t e = 0; e < dataset.episode_count(); ++e) {
        const std::size_t len = dataset.episode_length(e);
        // batch an episode at a time
        std::vector<double> xv(len * L);
        for (std::size_t i = 0; i < len; ++i) {
            const float* p = dataset.frame_ptr(e, i);
            for (std::size_t r = 0; r < L; ++r) xv[i * L + r] = p[r];
        }
        Graph g;
        auto x = g.constant({len, L, 1}, xv);
        auto heads = encode_graph(g, m, x);
        auto recon = decode_graph(g, m, heads.mu);
        const std::size_t n = recon->numel();
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = recon->v[i] - xv[i];
            sq += d * d;
        }
        acc += sq / static_cast<double>(L);
        count += len;
    }
    return acc / static_cast<double>(count);
}

namespace {

// values copied by name so shapes are validated against a fresh init
void adopt_values(neural::ParameterSet& dst, const neural::ParameterSet& src) {
    for (const auto& [name, t] : dst.items()) {
        const auto s = src.at(name);
        if (s->shape != t->shape)
            throw ConfigError("checkpoint: shape mismatch for " + name);
        t->v = s->v;
    }
    if (src.count() != dst.count()) throw ConfigError("checkpoint: parameter set mismatch");
}

} // namespace

void save_vae(const VaeModel& m, const std::string& path, const nlohmann::json& extra) {
    nlohmann::json meta = extra;
    meta["kind"] = "vae";
    meta["n_e"] = m.cfg.n_e;
    meta["beta_norm"] = m.cfg.beta_norm;
    meta["channels"] = m.cfg.channels;
    meta["ray_count"] = m.ray_count;
    meta["logvar_floor"] = m.cfg.logvar_floor;
    neural::save_checkpoint(m.params, meta, path);
}

VaeModel load_vae(const std::string& path) {
    auto ckpt = neural::load_checkpoint(path);
    if (ckpt.metadata.value("kind", "") != "vae")
        throw ConfigError("checkpoint is not a VAE model: " + path);
    VaeConfig cfg;
    cfg.n_e = ckpt.metadata.at("n_e");
    cfg.beta_norm = ckpt.metadata.at("beta_norm");
    cfg.channels = ckpt.metadata.at("channels").get<std::vector<int>>();
    cfg.logvar_floor = ckpt.metadata.at("logvar_floor");
    VaeModel m = VaeModel::init(cfg, ckpt.metadata.at("ray_count"), 0);
    adopt_values(m.params, ckpt.params);
    return m;
}

} // namespace memnav::latent
