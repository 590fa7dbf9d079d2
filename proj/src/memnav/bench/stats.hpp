#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace memnav::bench {

// Two-sided permutation test on the difference of means, add-one estimator:
// p = (1 + #{|perm delta| >= |observed delta|}) / (1 + n_perm).
double permutation_test(const std::vector<double>& sample_a, const std::vector<double>& sample_b,
                        int n_perm = 10000, std::uint64_t seed = 0);

struct ParetoPoint {
    double speed = 0;        // mean flight speed, m/s
    double success_rate = 0; // [0, 1]
};

// Points not dominated by any other (>= in both coordinates, > in one).
std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& points);

// a dominates b
bool dominates(const ParetoPoint& a, const ParetoPoint& b);

// Spearman rank correlation (average ranks on ties).
double spearman_rho(const std::vector<double>& x, const std::vector<double>& y);

double mean_of(const std::vector<double>& v);
double stddev_of(const std::vector<double>& v); // population (n) convention

} // namespace memnav::bench
