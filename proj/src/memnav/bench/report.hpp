#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "memnav/bench/evaluate.hpp"
#include "memnav/bench/stats.hpp"

namespace memnav::bench {

struct SpeedDensityBin {
    double brightness_lo = 0, brightness_hi = 0;
    double mean_brightness = 0;
    double mean_speed = 0;
    double std_speed = 0;
    std::size_t count = 0;
};

struct SpeedDensityResult {
    std::vector<SpeedDensityBin> bins; // empty bins omitted
    bool degenerate = false;           // fewer frames than bins
};

// Bins frames by mean scan value into n_bins equal-width groups over the
// observed brightness range.
SpeedDensityResult speed_vs_density(const std::vector<double>& speeds,
                                    const std::vector<double>& brightness, int n_bins = 6);

// Success matrix for one latent configuration: success[seed][checkpoint].
struct LatentRuns {
    std::string variant;
    std::vector<int> checkpoint_iterations;
    std::vector<std::vector<double>> success; // [seed][checkpoint]
};

struct LatentSummary {
    std::string variant;
    int best_iteration = 0;
    double mean = 0;
    double std = 0;
    std::vector<double> per_seed; // at the best checkpoint
    std::optional<double> p_vs_cur;
    std::optional<double> p_vs_fut10;
    bool single_seed_warning = false;
};

struct BenchmarkReport {
    std::vector<LatentSummary> rows;
};

// Best checkpoint = iteration maximizing the seed-mean success; p-values are
// permutation tests of the per-seed best-checkpoint rates against the cur
// and fut10 baselines when those configurations are present.
BenchmarkReport compare_latents(const std::vector<LatentRuns>& runs, int n_perm = 10000,
                                std::uint64_t seed = 0);

nlohmann::json report_to_json(const BenchmarkReport& report);

const char* outcome_name(policy::Outcome o);

// One row per trial.
void write_trials_csv(const std::vector<TrialResult>& trials, const std::string& path);

// Plot-ready CSV emitters.
void write_success_vs_iteration_csv(const std::vector<LatentRuns>& runs,
                                    const std::string& path);
void write_agv_vs_trav_csv(const std::vector<TrialResult>& trials, int n_bins,
                           const std::string& path);
void write_pareto_csv(const std::vector<ParetoPoint>& points, const std::string& path);
void write_speed_density_csv(const SpeedDensityResult& result, const std::string& path);

} // namespace memnav::bench
