#include "memnav/world/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "memnav/core/errors.hpp"
#include "memnav/core/rng.hpp"
#include "memnav/core/version.hpp"

namespace memnav::world {

namespace {
constexpr double kTravMin = 3.0;
constexpr double kTravMax = 13.0;
constexpr int kBridsonK = 30;
} // namespace

void WorldSpec::validate() const {
    if (!(bounds_min.x < bounds_max.x && bounds_min.y < bounds_max.y &&
          bounds_min.z < bounds_max.z))
        throw ConfigError("world: bounds_min must be < bounds_max componentwise");
    if (!(poisson_radius > 0.0)) throw ConfigError("world: poisson_radius must be > 0");
    if (!(obstacle_radius_min > 0.0) || obstacle_radius_max < obstacle_radius_min)
        throw ConfigError("world: obstacle radius range must be positive and ordered");
    if (obstacle_radius_max > poisson_radius / 2.0)
        throw ConfigError("world: obstacle radii must be <= poisson_radius / 2");
    if (!(drone_radius > 0.0)) throw ConfigError("world: drone_radius must be > 0");
}

double WorldSpec::diagonal_xy() const {
    const double w = bounds_max.x - bounds_min.x;
    const double h = bounds_max.y - bounds_min.y;
    return std::sqrt(w * w + h * h);
}

World World::empty(const WorldSpec& spec) {
    spec.validate();
    return World{spec, {}};
}

World generate_world(const WorldSpec& spec) {
    spec.validate();
    World w;
    w.spec = spec;

    // Centers are drawn from the bounds inset by the max obstacle radius so
    // every disc lies fully inside the box.
    const double r = spec.poisson_radius;
    const double x0 = spec.bounds_min.x + spec.obstacle_radius_max;
    const double y0 = spec.bounds_min.y + spec.obstacle_radius_max;
    const double x1 = spec.bounds_max.x - spec.obstacle_radius_max;
    const double y1 = spec.bounds_max.y - spec.obstacle_radius_max;
    if (x1 <= x0 || y1 <= y0) return w;

    const double width = x1 - x0;
    const double height = y1 - y0;
    const double cell = r / std::sqrt(2.0);
    const int gw = std::max(1, static_cast<int>(std::ceil(width / cell)));
    const int gh = std::max(1, static_cast<int>(std::ceil(height / cell)));
    std::vector<int> grid(static_cast<std::size_t>(gw) * gh, -1);

    struct P {
        double x, y;
    };
    std::vector<P> samples;
    std::vector<std::size_t> active;

    Rng rng = substream(spec.seed, "world.poisson");

    auto cell_of = [&](double x, double y) {
        int cx = std::min(gw - 1, static_cast<int>((x - x0) / cell));
        int cy = std::min(gh - 1, static_cast<int>((y - y0) / cell));
        return cy * gw + cx;
    };
    auto too_close = [&](double x, double y) {
        const int cx = std::min(gw - 1, static_cast<int>((x - x0) / cell));
        const int cy = std::min(gh - 1, static_cast<int>((y - y0) / cell));
        for (int yy = std::max(0, cy - 2); yy <= std::min(gh - 1, cy + 2); ++yy) {
            for (int xx = std::max(0, cx - 2); xx <= std::min(gw - 1, cx + 2); ++xx) {
                const int si = grid[static_cast<std::size_t>(yy) * gw + xx];
                if (si < 0) continue;
                const double dx = samples[static_cast<std::size_t>(si)].x - x;
                const double dy = samples[static_cast<std::size_t>(si)].y - y;
                if (dx * dx + dy * dy < r * r) return true;
            }
        }
        return false;
    };
    auto push = [&](double x, double y) {
        grid[static_cast<std::size_t>(cell_of(x, y))] = static_cast<int>(samples.size());
        samples.push_back({x, y});
        active.push_back(samples.size() - 1);
    };

    push(x0 + rng.uniform() * width, y0 + rng.uniform() * height);
    while (!active.empty()) {
        const std::size_t pick = rng.uniform_int(active.size());
        const P p = samples[active[pick]];
        bool found = false;
        for (int i = 0; i < kBridsonK; ++i) {
            const double rad = r * (1.0 + rng.uniform());
            const double ang = rng.uniform() * 6.283185307179586;
            const double qx = p.x + rad * std::cos(ang);
            const double qy = p.y + rad * std::sin(ang);
            if (qx < x0 || qx > x1 || qy < y0 || qy > y1) continue;
            if (too_close(qx, qy)) continue;
            push(qx, qy);
            found = true;
            break;
        }
        if (!found) {
            active[pick] = active.back();
            active.pop_back();
        }
    }

    Rng radius_rng = substream(spec.seed, "world.radii");
    w.obstacles.reserve(samples.size());
    for (const P& p : samples) {
        const double rad =
            radius_rng.uniform(spec.obstacle_radius_min, spec.obstacle_radius_max);
        w.obstacles.push_back({p.x, p.y, rad});
    }
    return w;
}

bool collision_check(const World& world, const Vec3& position, double drone_radius) {
    const WorldSpec& s = world.spec;
    if (position.x < s.bounds_min.x + drone_radius || position.x > s.bounds_max.x - drone_radius ||
        position.y < s.bounds_min.y + drone_radius || position.y > s.bounds_max.y - drone_radius ||
        position.z < s.bounds_min.z + drone_radius || position.z > s.bounds_max.z - drone_radius)
        return true;
    for (const Obstacle& o : world.obstacles) {
        const double dx = position.x - o.cx;
        const double dy = position.y - o.cy;
        const double rr = o.radius + drone_radius;
        if (dx * dx + dy * dy < rr * rr) return true;
    }
    return false;
}

double first_hit_distance(const World& world, double ox, double oy, double dx, double dy,
                          double inflate, double max_dist) {
    const WorldSpec& s = world.spec;
    // Inflated box: the reachable region of the drone center.
    const double bx0 = s.bounds_min.x + inflate, bx1 = s.bounds_max.x - inflate;
    const double by0 = s.bounds_min.y + inflate, by1 = s.bounds_max.y - inflate;
    if (ox < bx0 || ox > bx1 || oy < by0 || oy > by1) return 0.0;

    double best = max_dist;
    // Exit of the inflated box.
    if (dx > 0.0)
        best = std::min(best, (bx1 - ox) / dx);
    else if (dx < 0.0)
        best = std::min(best, (bx0 - ox) / dx);
    if (dy > 0.0)
        best = std::min(best, (by1 - oy) / dy);
    else if (dy < 0.0)
        best = std::min(best, (by0 - oy) / dy);

    for (const Obstacle& o : world.obstacles) {
        const double r = o.radius + inflate;
        const double ex = o.cx - ox;
        const double ey = o.cy - oy;
        const double proj = ex * dx + ey * dy;
        const double perp2 = ex * ex + ey * ey - proj * proj;
        if (perp2 > r * r) continue;
        const double thr = std::sqrt(r * r - perp2);
        const double t = proj - thr;
        if (t >= 0.0) {
            best = std::min(best, t);
        } else if (proj + thr > 0.0) {
            return 0.0; // origin inside the inflated obstacle
        }
    }
    return std::max(0.0, best);
}

TraversabilityReport traversability(const World& world, int n_samples, std::uint64_t rng_seed) {
    if (n_samples < 1) throw ConfigError("traversability: n_samples must be >= 1");
    const WorldSpec& s = world.spec;
    Rng rng = substream(rng_seed, "trav");
    const double diag = s.diagonal_xy();
    double sum = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double ox = rng.uniform(s.bounds_min.x, s.bounds_max.x);
        const double oy = rng.uniform(s.bounds_min.y, s.bounds_max.y);
        const double ang = rng.uniform() * 6.283185307179586;
        sum += first_hit_distance(world, ox, oy, std::cos(ang), std::sin(ang), s.drone_radius,
                                  diag);
    }
    TraversabilityReport rep;
    rep.raw_mean_free_path = sum / n_samples;
    rep.trav = std::clamp(rep.raw_mean_free_path, kTravMin, kTravMax);
    rep.sample_count = n_samples;
    return rep;
}

std::pair<Vec3, Vec3> sample_start_goal(const World& world, double min_separation,
                                        std::uint64_t rng_seed) {
    const WorldSpec& s = world.spec;
    const double ext_x = s.bounds_max.x - s.bounds_min.x;
    const double ext_y = s.bounds_max.y - s.bounds_min.y;
    if (min_separation >= std::sqrt(ext_x * ext_x + ext_y * ext_y))
        throw ConfigError("sample_start_goal: min_separation exceeds bounds extent");

    Rng rng = substream(rng_seed, "start_goal");
    const double m = s.drone_radius;
    auto draw = [&]() {
        return Vec3{rng.uniform(s.bounds_min.x + m, s.bounds_max.x - m),
                    rng.uniform(s.bounds_min.y + m, s.bounds_max.y - m),
                    rng.uniform(s.bounds_min.z + m, s.bounds_max.z - m)};
    };

    constexpr int kBudget = 20000;
    for (int attempt = 0; attempt < kBudget; ++attempt) {
        const Vec3 a = draw();
        if (collision_check(world, a, m)) continue;
        const Vec3 b = draw();
        if (collision_check(world, b, m)) continue;
        if ((b - a).norm_xy() < min_separation) continue;
        return {a, b};
    }
    throw RuntimeError("sample_start_goal: retry budget exhausted (world too blocked?)");
}

namespace {

nlohmann::json spec_to_json(const WorldSpec& s) {
    return nlohmann::json{
        {"bounds_min", {s.bounds_min.x, s.bounds_min.y, s.bounds_min.z}},
        {"bounds_max", {s.bounds_max.x, s.bounds_max.y, s.bounds_max.z}},
        {"poisson_radius", s.poisson_radius},
        {"obstacle_radius_range", {s.obstacle_radius_min, s.obstacle_radius_max}},
        {"drone_radius", s.drone_radius},
        {"seed", s.seed},
    };
}

WorldSpec spec_from_json(const nlohmann::json& j) {
    WorldSpec s;
    s.bounds_min = {j.at("bounds_min").at(0), j.at("bounds_min").at(1), j.at("bounds_min").at(2)};
    s.bounds_max = {j.at("bounds_max").at(0), j.at("bounds_max").at(1), j.at("bounds_max").at(2)};
    s.poisson_radius = j.at("poisson_radius");
    s.obstacle_radius_min = j.at("obstacle_radius_range").at(0);
    s.obstacle_radius_max = j.at("obstacle_radius_range").at(1);
    s.drone_radius = j.at("drone_radius");
    s.seed = j.at("seed");
    return s;
}

} // namespace

std::string to_json(const World& world) {
    nlohmann::json j;
    j["version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["spec"] = spec_to_json(world.spec);
    auto& obs = j["obstacles"] = nlohmann::json::array();
    for (const Obstacle& o : world.obstacles) obs.push_back({o.cx, o.cy, o.radius});
    return j.dump(2);
}

World world_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("world JSON parse error: ") + e.what());
    }
    if (j.at("version").get<int>() != kFormatVersion)
        throw ConfigError("world JSON: unsupported version");
    World w;
    w.spec = spec_from_json(j.at("spec"));
    w.spec.validate();
    for (const auto& o : j.at("obstacles"))
        w.obstacles.push_back({o.at(0), o.at(1), o.at(2)});
    return w;
}

void save_world(const World& world, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for write: " + path);
    f << to_json(world) << '\n';
}

World load_world(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw RuntimeError("cannot open for read: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return world_from_json(ss.str());
}

} // namespace memnav::world
