#include "memnav/neural/params.hpp"

#include <cmath>
#include <cstring>

#include "memnav/core/errors.hpp"
#include "memnav/core/hash.hpp"

namespace memnav::neural {

TensorPtr ParameterSet::add(const std::string& name, std::vector<std::size_t> shape) {
    if (entries_.count(name)) throw RuntimeError("ParameterSet: duplicate name " + name);
    Entry e;
    e.t = make_tensor(std::move(shape));
    e.m.assign(e.t->numel(), 0.0);
    e.v.assign(e.t->numel(), 0.0);
    auto t = e.t;
    entries_.emplace(name, std::move(e));
    return t;
}

TensorPtr ParameterSet::at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw RuntimeError("ParameterSet: missing parameter " + name);
    return it->second.t;
}

std::size_t ParameterSet::total_values() const {
    std::size_t n = 0;
    for (const auto& [_, e] : entries_) n += e.t->numel();
    return n;
}

void ParameterSet::zero_grad() {
    for (auto& [_, e] : entries_) e.t->zero_grad();
}

void ParameterSet::adam_step(const AdamConfig& cfg) {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
    for (auto& [name, e] : entries_) {
        double* p = e.t->v.data();
        const double* g = e.t->g.data();
        double* m = e.m.data();
        double* v = e.v.data();
        const std::size_t n = e.t->numel();
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(g[i]))
                throw NumericalError("adam_step: non-finite gradient in " + name);
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

std::vector<std::pair<std::string, TensorPtr>> ParameterSet::items() const {
    std::vector<std::pair<std::string, TensorPtr>> out;
    out.reserve(entries_.size());
    for (const auto& [name, e] : entries_) out.emplace_back(name, e.t);
    return out;
}

std::uint64_t ParameterSet::value_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [name, e] : entries_) {
        h = fnv1a64(name, h);
        const char* bytes = reinterpret_cast<const char*>(e.t->v.data());
        h = fnv1a64(std::string_view(bytes, e.t->v.size() * sizeof(double)), h);
    }
    return h;
}

void init_kaiming_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    init_uniform(t, -bound, bound, rng);
}

void init_uniform(Tensor& t, double lo, double hi, Rng& rng) {
    for (double& x : t.v) x = rng.uniform(lo, hi);
}

void init_constant(Tensor& t, double value) {
    for (double& x : t.v) x = value;
}

} // namespace memnav::neural
