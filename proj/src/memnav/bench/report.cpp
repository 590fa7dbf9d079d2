#include "memnav/bench/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "memnav/core/errors.hpp"

namespace memnav::bench {

SpeedDensityResult speed_vs_density(const std::vector<double>& speeds,
                                    const std::vector<double>& brightness, int n_bins) {
    if (speeds.size() != brightness.size())
        throw RuntimeError("speed_vs_density: misaligned streams");
    if (n_bins < 1) throw RuntimeError("speed_vs_density: n_bins must be >= 1");
    SpeedDensityResult out;
    if (speeds.empty()) {
        out.degenerate = true;
        return out;
    }
    out.degenerate = speeds.size() < static_cast<std::size_t>(n_bins);

    const auto [lo_it, hi_it] = std::minmax_element(brightness.begin(), brightness.end());
    const double lo = *lo_it, hi = *hi_it;
    const double width = hi > lo ? (hi - lo) / n_bins : 1.0;

    std::vector<std::vector<double>> bin_speeds(static_cast<std::size_t>(n_bins));
    std::vector<std::vector<double>> bin_bright(static_cast<std::size_t>(n_bins));
    for (std::size_t i = 0; i < speeds.size(); ++i) {
        auto b = static_cast<std::size_t>((brightness[i] - lo) / width);
        if (b >= static_cast<std::size_t>(n_bins)) b = static_cast<std::size_t>(n_bins) - 1;
        bin_speeds[b].push_back(speeds[i]);
        bin_bright[b].push_back(brightness[i]);
    }
    for (int b = 0; b < n_bins; ++b) {
        const auto& vs = bin_speeds[static_cast<std::size_t>(b)];
        if (vs.empty()) continue;
        SpeedDensityBin bin;
        bin.brightness_lo = lo + b * width;
        bin.brightness_hi = lo + (b + 1) * width;
        bin.mean_brightness = mean_of(bin_bright[static_cast<std::size_t>(b)]);
        bin.mean_speed = mean_of(vs);
        bin.std_speed = stddev_of(vs);
        bin.count = vs.size();
        out.bins.push_back(bin);
    }
    return out;
}

BenchmarkReport compare_latents(const std::vector<LatentRuns>& runs, int n_perm,
                                std::uint64_t seed) {
    BenchmarkReport report;
    std::map<std::string, std::vector<double>> best_per_seed;

    for (const LatentRuns& r : runs) {
        if (r.success.empty()) throw RuntimeError("compare_latents: missing seeds for " + r.variant);
        const std::size_t n_ckpt = r.checkpoint_iterations.size();
        for (const auto& row : r.success)
            if (row.size() != n_ckpt)
                throw RuntimeError("compare_latents: ragged success matrix for " + r.variant);

        LatentSummary s;
        s.variant = r.variant;
        double best_mean = -1;
        std::size_t best_idx = 0;
        for (std::size_t c = 0; c < n_ckpt; ++c) {
            double m = 0;
            for (const auto& row : r.success) m += row[c];
            m /= static_cast<double>(r.success.size());
            if (m > best_mean) {
                best_mean = m;
                best_idx = c;
            }
        }
        s.best_iteration = r.checkpoint_iterations[best_idx];
        for (const auto& row : r.success) s.per_seed.push_back(row[best_idx]);
        s.mean = mean_of(s.per_seed);
        s.std = s.per_seed.size() > 1 ? stddev_of(s.per_seed) : 0.0;
        s.single_seed_warning = s.per_seed.size() < 2;
        best_per_seed[s.variant] = s.per_seed;
        report.rows.push_back(std::move(s));
    }

    for (LatentSummary& s : report.rows) {
        if (s.variant != "cur" && best_per_seed.count("cur"))
            s.p_vs_cur = permutation_test(s.per_seed, best_per_seed.at("cur"), n_perm,
                                          substream_seed(seed, "p.cur"));
        if (s.variant != "fut10" && best_per_seed.count("fut10"))
            s.p_vs_fut10 = permutation_test(s.per_seed, best_per_seed.at("fut10"), n_perm,
                                            substream_seed(seed, "p.fut10"));
    }
    return report;
}

nlohmann::json report_to_json(const BenchmarkReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const LatentSummary& s : report.rows) {
        nlohmann::json j{{"variant", s.variant},
                         {"best_iteration", s.best_iteration},
                         {"mean", s.mean},
                         {"std", s.std},
                         {"per_seed", s.per_seed},
                         {"single_seed_warning", s.single_seed_warning}};
        if (s.p_vs_cur) j["p_vs_cur"] = *s.p_vs_cur;
        if (s.p_vs_fut10) j["p_vs_fut10"] = *s.p_vs_fut10;
        rows.push_back(j);
    }
    return nlohmann::json{{"rows", rows}};
}

const char* outcome_name(policy::Outcome o) {
    switch (o) {
    case policy::Outcome::success:
        return "success";
    case policy::Outcome::collision:
        return "collision";
    case policy::Outcome::exceed:
        return "exceed";
    case policy::Outcome::timeout:
        return "timeout";
    }
    return "?";
}

void write_trials_csv(const std::vector<TrialResult>& trials, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for write: " + path);
    f << "map_id,seed,outcome,flight_time_s,path_length_m,straight_dist_m,mean_v_hor,trav\n";
    for (const TrialResult& t : trials) {
        f << t.map_id << ',' << t.seed << ',' << outcome_name(t.outcome) << ','
          << t.flight_time_s << ',' << t.path_length_m << ',' << t.straight_dist_m << ','
          << t.mean_v_hor << ',' << t.trav << '\n';
    }
}

void write_success_vs_iteration_csv(const std::vector<LatentRuns>& runs,
                                    const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for write: " + path);
    f << "variant,iteration,mean_success,std_success\n";
    for (const LatentRuns& r : runs) {
        for (std::size_t c = 0; c < r.checkpoint_iterations.size(); ++c) {
            std::vector<double> col;
            for (const auto& row : r.success) col.push_back(row[c]);
            f << r.variant << ',' << r.checkpoint_iterations[c] << ',' << mean_of(col) << ','
              << (col.size() > 1 ? stddev_of(col) : 0.0) << '\n';
        }
    }
}

void write_agv_vs_trav_csv(const std::vector<TrialResult>& trials, int n_bins,
                           const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for write: " + path);
    f << "trav_lo,trav_hi,mean_agv,std_agv,success_rate,count\n";
    if (trials.empty()) return;
    double lo = trials.front().trav, hi = trials.front().trav;
    for (const TrialResult& t : trials) {
        lo = std::min(lo, t.trav);
        hi = std::max(hi, t.trav);
    }
    const double width = hi > lo ? (hi - lo) / n_bins : 1.0;
    for (int b = 0; b < n_bins; ++b) {
        const double blo = lo + b * width, bhi = lo + (b + 1) * width;
        std::vector<double> agvs;
        int total = 0, successes = 0;
        for (const TrialResult& t : trials) {
            if (t.trav < blo || (b + 1 < n_bins ? t.trav >= bhi : t.trav > bhi)) continue;
            ++total;
            if (t.outcome == policy::Outcome::success) {
                ++successes;
                agvs.push_back(agv(t));
            }
        }
        if (total == 0) continue;
        f << blo << ',' << bhi << ',' << (agvs.empty() ? 0.0 : mean_of(agvs)) << ','
          << (agvs.size() > 1 ? stddev_of(agvs) : 0.0) << ','
          << static_cast<double>(successes) / total << ',' << total << '\n';
    }
}

void write_pareto_csv(const std::vector<ParetoPoint>& points, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for write: " + path);
    const std::vector<ParetoPoint> front = pareto_front(points);
    auto on_front = [&](const ParetoPoint& p) {
        for (const ParetoPoint& q : front)
            if (q.speed == p.speed && q.success_rate == p.success_rate) return true;
        return false;
    };
    f << "speed,success_rate,on_front\n";
    for (const ParetoPoint& p : points)
        f << p.speed << ',' << p.success_rate << ',' << (on_front(p) ? 1 : 0) << '\n';
}

void write_speed_density_csv(const SpeedDensityResult& result, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for write: " + path);
    f << "brightness_lo,brightness_hi,mean_brightness,mean_speed,std_speed,count\n";
    for (const SpeedDensityBin& b : result.bins)
        f << b.brightness_lo << ',' << b.brightness_hi << ',' << b.mean_brightness << ','
          << b.mean_speed << ',' << b.std_speed << ',' << b.count << '\n';
}

} // namespace memnav::bench
