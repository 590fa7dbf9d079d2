#include "memnav/bench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "memnav/core/errors.hpp"
#include "memnav/core/rng.hpp"

namespace memnav::bench {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw RuntimeError("mean_of: empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0;
    for (const double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double permutation_test(const std::vector<double>& sample_a, const std::vector<double>& sample_b,
                        int n_perm, std::uint64_t seed) {
    if (sample_a.empty() || sample_b.empty())
        throw RuntimeError("permutation_test: empty sample");
    const double observed = std::abs(mean_of(sample_a) - mean_of(sample_b));

    std::vector<double> pool(sample_a);
    pool.insert(pool.end(), sample_b.begin(), sample_b.end());
    const std::size_t na = sample_a.size();
    const auto n = pool.size();

    Rng rng = substream(seed, "permutation");
    int hits = 0;
    std::vector<double> shuffled(pool);
    for (int p = 0; p < n_perm; ++p) {
        for (std::size_t i = n; i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.uniform_int(i)]);
        double ma = 0, mb = 0;
        for (std::size_t i = 0; i < na; ++i) ma += shuffled[i];
        for (std::size_t i = na; i < n; ++i) mb += shuffled[i];
        ma /= static_cast<double>(na);
        mb /= static_cast<double>(n - na);
        if (std::abs(ma - mb) >= observed) ++hits;
    }
    return (1.0 + hits) / (1.0 + n_perm);
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
    return a.speed >= b.speed && a.success_rate >= b.success_rate &&
           (a.speed > b.speed || a.success_rate > b.success_rate);
}

std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points) {
    std::vector<ParetoPoint> front;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j)
            if (j != i && dominates(points[j], points[i])) dominated = true;
        if (!dominated) front.push_back(points[i]);
    }
    return front;
}

namespace {

std::vector<double> ranks_of(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0; // average rank, 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

} // namespace

double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw RuntimeError("spearman_rho: need two same-length samples");
    const std::vector<double> rx = ranks_of(x);
    const std::vector<double> ry = ranks_of(y);
    const double mx = mean_of(rx), my = mean_of(ry);
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx == 0 || dy == 0) return 0.0;
    return num / std::sqrt(dx * dy);
}

} // namespace memnav::bench
