#include "memnav/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "memnav/core/errors.hpp"
#include "memnav/core/hash.hpp"
#include "memnav/core/version.hpp"

namespace memnav::cli {

namespace {

using TomlValue = std::variant<bool, double, std::string, std::vector<double>,
                               std::vector<std::string>>;
using TomlMap = std::map<std::string, TomlValue>;

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

TomlValue parse_value(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError("config: empty value for " + where);
    if (v == "true") return true;
    if (v == "false") return false;
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError("config: unterminated string for " + where);
        return v.substr(1, v.size() - 2);
    }
    if (v.front() == '[') {
        if (v.back() != ']') throw ConfigError("config: unterminated array for " + where);
        std::vector<double> nums;
        std::vector<std::string> strs;
        std::string inner = v.substr(1, v.size() - 2);
        std::stringstream ss(inner);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string it = trim(item);
            if (it.empty()) continue;
            if (it.front() == '"') {
                if (it.size() < 2 || it.back() != '"')
                    throw ConfigError("config: bad string array item for " + where);
                strs.push_back(it.substr(1, it.size() - 2));
            } else {
                char* end = nullptr;
                const double d = std::strtod(it.c_str(), &end);
                if (end == it.c_str() || *end != '\0')
                    throw ConfigError("config: bad number '" + it + "' for " + where);
                nums.push_back(d);
            }
        }
        if (!strs.empty() && !nums.empty())
            throw ConfigError("config: mixed array types for " + where);
        if (!strs.empty()) return strs;
        return nums;
    }
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config: cannot parse value '" + v + "' for " + where);
    return d;
}

TomlMap parse_toml(const std::string& text) {
    TomlMap out;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: bad section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string full = section.empty() ? key : section + "." + key;
        out[full] = parse_value(line.substr(eq + 1), full);
    }
    return out;
}

// MEMNAV_SECTION_KEY=value overrides section.key
void apply_env_overrides(TomlMap& m, const std::vector<std::string>& known_keys) {
    for (const std::string& key : known_keys) {
        std::string env_name = "MEMNAV_";
        for (const char c : key)
            env_name += c == '.' ? '_' : static_cast<char>(std::toupper(c));
        if (const char* v = std::getenv(env_name.c_str()))
            m[key] = parse_value(v, key + " (from " + env_name + ")");
    }
}

class Reader {
public:
    explicit Reader(TomlMap m) : map_(std::move(m)) {}

    double number(const std::string& key, double def) {
        seen_.insert(key);
        auto it = map_.find(key);
        if (it == map_.end()) return def;
        if (const double* d = std::get_if<double>(&it->second)) return *d;
        throw ConfigError("config: " + key + " must be a number");
    }
    int integer(const std::string& key, int def) {
        const double d = number(key, def);
        if (d != static_cast<double>(static_cast<long long>(d)))
            throw ConfigError("config: " + key + " must be an integer");
        return static_cast<int>(d);
    }
    bool boolean(const std::string& key, bool def) {
        seen_.insert(key);
        auto it = map_.find(key);
        if (it == map_.end()) return def;
        if (const bool* b = std::get_if<bool>(&it->second)) return *b;
        throw ConfigError("config: " + key + " must be true/false");
    }
    std::string text(const std::string& key, const std::string& def) {
        seen_.insert(key);
        auto it = map_.find(key);
        if (it == map_.end()) return def;
        if (const std::string* s = std::get_if<std::string>(&it->second)) return *s;
        throw ConfigError("config: " + key + " must be a string");
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> def) {
        seen_.insert(key);
        auto it = map_.find(key);
        if (it == map_.end()) return def;
        if (const auto* v = std::get_if<std::vector<double>>(&it->second)) return *v;
        throw ConfigError("config: " + key + " must be a number array");
    }

    void check_unknown() const {
        for (const auto& [key, _] : map_)
            if (!seen_.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    }

    std::vector<std::string> seen_keys() const {
        return std::vector<std::string>(seen_.begin(), seen_.end());
    }

private:
    TomlMap map_;
    std::set<std::string> seen_;
};

RunConfig build(Reader& r) {
    RunConfig c;
    c.seed = static_cast<std::uint64_t>(r.number("run.seed", static_cast<double>(c.seed)));
    c.out_dir = r.text("run.out_dir", c.out_dir);

    auto vec3 = [&](const std::string& key, Vec3 def) {
        const auto v = r.numbers(key, {def.x, def.y, def.z});
        if (v.size() != 3) throw ConfigError("config: " + key + " must have 3 entries");
        return Vec3{v[0], v[1], v[2]};
    };
    c.world_base.bounds_min = vec3("world.bounds_min", c.world_base.bounds_min);
    c.world_base.bounds_max = vec3("world.bounds_max", c.world_base.bounds_max);
    c.world_base.drone_radius = r.number("world.drone_radius", c.world_base.drone_radius);
    {
        const auto rr = r.numbers("world.obstacle_radius_range",
                                  {c.world_base.obstacle_radius_min,
                                   c.world_base.obstacle_radius_max});
        if (rr.size() != 2)
            throw ConfigError("config: world.obstacle_radius_range must have 2 entries");
        c.world_base.obstacle_radius_min = rr[0];
        c.world_base.obstacle_radius_max = rr[1];
    }

    c.camera.ray_count = r.integer("camera.ray_count", c.camera.ray_count);
    c.camera.fov = r.number("camera.fov", c.camera.fov);
    c.camera.max_range = r.number("camera.max_range", c.camera.max_range);
    c.camera.yaw_offset = r.number("camera.yaw_offset", c.camera.yaw_offset);

    c.noise.multiplicative_sigma =
        r.number("noise.multiplicative_sigma", c.noise.multiplicative_sigma);
    c.noise.dropout_probability =
        r.number("noise.dropout_probability", c.noise.dropout_probability);
    c.noise.quantization_levels =
        r.integer("noise.quantization_levels", c.noise.quantization_levels);
    c.noise_enabled = r.boolean("noise.enabled", c.noise_enabled);

    c.weights.lambda_d = r.number("reward.lambda_d", c.weights.lambda_d);
    c.weights.lambda_b = r.number("reward.lambda_b", c.weights.lambda_b);
    c.weights.lambda_v = r.number("reward.lambda_v", c.weights.lambda_v);
    c.weights.lambda_z = r.number("reward.lambda_z", c.weights.lambda_z);
    c.weights.lambda_f = r.number("reward.lambda_f", c.weights.lambda_f);
    c.weights.lambda_a = r.number("reward.lambda_a", c.weights.lambda_a);
    c.weights.v_max = r.number("reward.v_max", c.weights.v_max);
    c.weights.v_desire = r.number("reward.v_desire", c.weights.v_desire);
    const std::string mode = r.text("reward.mode", "varying");
    if (mode == "varying")
        c.weights.mode = reward::SpeedMode::varying;
    else if (mode == "fixed")
        c.weights.mode = reward::SpeedMode::fixed;
    else
        throw ConfigError("config: reward.mode must be varying|fixed");

    c.terminal.r_exceed = r.number("terminal.r_exceed", c.terminal.r_exceed);
    c.terminal.r_arrive = r.number("terminal.r_arrive", c.terminal.r_arrive);
    c.terminal.r_collision = r.number("terminal.r_collision", c.terminal.r_collision);
    c.terminal.d_min = r.number("terminal.d_min", c.terminal.d_min);

    c.limits.accel_max = r.number("limits.accel_max", c.limits.accel_max);
    c.limits.yaw_rate_max = r.number("limits.yaw_rate_max", c.limits.yaw_rate_max);
    c.dt = r.number("dynamics.dt", c.dt);
    c.max_steps = r.integer("dynamics.max_steps", c.max_steps);
    c.min_separation = r.number("dynamics.min_separation", c.min_separation);
    c.trav_samples = r.integer("dynamics.trav_samples", c.trav_samples);

    c.vae.n_e = r.integer("vae.n_e", c.vae.n_e);
    c.vae.beta_norm = r.number("vae.beta_norm", c.vae.beta_norm);
    c.vae.learning_rate = r.number("vae.learning_rate", c.vae.learning_rate);
    c.vae.batch_size = r.integer("vae.batch_size", c.vae.batch_size);
    c.vae.epochs = r.integer("vae.epochs", c.vae.epochs);
    {
        std::vector<double> ch(c.vae.channels.begin(), c.vae.channels.end());
        const auto v = r.numbers("vae.channels", ch);
        if (v.size() != 6) throw ConfigError("config: vae.channels must have 6 entries");
        c.vae.channels.assign(v.begin(), v.end());
    }

    c.memory_cfg.n_l = r.integer("memory.n_l", c.memory_cfg.n_l);
    c.memory_cfg.offset_frames = r.integer("memory.offset_frames", c.memory_cfg.offset_frames);
    c.memory_cfg.seq_len = r.integer("memory.seq_len", c.memory_cfg.seq_len);
    c.memory_cfg.learning_rate = r.number("memory.learning_rate", c.memory_cfg.learning_rate);
    c.memory_cfg.batch_size = r.integer("memory.batch_size", c.memory_cfg.batch_size);
    c.memory_cfg.epochs = r.integer("memory.epochs", c.memory_cfg.epochs);
    c.latent_variant = r.text("memory.variant", c.latent_variant);
    c.memory_cfg.apply_variant(memory::parse_variant(c.latent_variant));

    c.ppo.gamma = r.number("ppo.gamma", c.ppo.gamma);
    c.ppo.gae_lambda = r.number("ppo.gae_lambda", c.ppo.gae_lambda);
    c.ppo.clip_eps = r.number("ppo.clip_eps", c.ppo.clip_eps);
    c.ppo.update_epochs = r.integer("ppo.update_epochs", c.ppo.update_epochs);
    c.ppo.minibatch = r.integer("ppo.minibatch", c.ppo.minibatch);
    c.ppo.horizon = r.integer("ppo.horizon", c.ppo.horizon);
    c.ppo.workers = r.integer("ppo.workers", c.ppo.workers);
    c.ppo.ent_coef = r.number("ppo.ent_coef", c.ppo.ent_coef);
    c.ppo.vf_coef = r.number("ppo.vf_coef", c.ppo.vf_coef);
    c.ppo.learning_rate = r.number("ppo.learning_rate", c.ppo.learning_rate);
    c.ppo.iterations = r.integer("ppo.iterations", c.ppo.iterations);
    c.ppo.checkpoint_interval = r.integer("ppo.checkpoint_interval", c.ppo.checkpoint_interval);

    {
        std::vector<double> tw(c.policy_net.trunk_widths.begin(),
                               c.policy_net.trunk_widths.end());
        const auto v = r.numbers("policy.trunk_widths", tw);
        if (v.empty()) throw ConfigError("config: policy.trunk_widths must not be empty");
        c.policy_net.trunk_widths.assign(v.begin(), v.end());
    }
    c.policy_net.logstd_init = r.number("policy.logstd_init", c.policy_net.logstd_init);
    c.policy_net.limits = c.limits;

    c.stage1_iterations = r.integer("pipeline.stage1_iterations", c.stage1_iterations);
    c.collect_episodes = r.integer("pipeline.collect_episodes", c.collect_episodes);
    c.collect_radii = r.numbers("pipeline.collect_radii", c.collect_radii);
    c.holdout_fraction = r.number("pipeline.holdout_fraction", c.holdout_fraction);
    c.warmup_radius = r.number("pipeline.warmup_radius", c.warmup_radius);
    c.warmup_iterations = r.integer("pipeline.warmup_iterations", c.warmup_iterations);
    c.clutter_radius_min = r.number("pipeline.clutter_radius_min", c.clutter_radius_min);
    c.clutter_radius_max = r.number("pipeline.clutter_radius_max", c.clutter_radius_max);

    c.eval_trials = r.integer("eval.trials_per_map", c.eval_trials);
    c.eval_maps = r.integer("eval.maps", c.eval_maps);

    r.check_unknown();
    c.validate();
    return c;
}

} // namespace

void RunConfig::validate() const {
    world::WorldSpec spec = world_base;
    spec.poisson_radius = std::max(clutter_radius_min, 2.0 * world_base.obstacle_radius_max);
    spec.validate();
    camera.validate();
    noise.validate();
    weights.validate();
    vae.validate(camera.ray_count);
    memory_cfg.validate();
    ppo.validate();
    if (!(dt > 0)) throw ConfigError("config: dynamics.dt must be > 0");
    if (max_steps < 1) throw ConfigError("config: dynamics.max_steps must be >= 1");
    if (holdout_fraction < 0 || holdout_fraction >= 1)
        throw ConfigError("config: pipeline.holdout_fraction must be in [0, 1)");
    if (clutter_radius_min > clutter_radius_max)
        throw ConfigError("config: clutter radius range inverted");
    if (clutter_radius_min < 2.0 * world_base.obstacle_radius_max)
        throw ConfigError("config: clutter_radius_min must be >= 2 * max obstacle radius");
    if (collect_radii.empty()) throw ConfigError("config: collect_radii must not be empty");
    if (eval_trials < 1 || eval_maps < 1) throw ConfigError("config: bad eval settings");
}

RunConfig config_from_text(const std::string& text) {
    // defaults-only pass to learn the known key set
    Reader defaults{TomlMap{}};
    (void)build(defaults);
    TomlMap m = parse_toml(text);
    apply_env_overrides(m, defaults.seen_keys());
    Reader r(std::move(m));
    return build(r);
}

RunConfig load_config(const std::string& path) {
    std::string text;
    if (!path.empty()) {
        std::ifstream f(path);
        if (!f) throw ConfigError("config file not found: " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    return config_from_text(text);
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["run"] = {{"seed", c.seed}, {"out_dir", c.out_dir}};
    j["world"] = {{"bounds_min", {c.world_base.bounds_min.x, c.world_base.bounds_min.y,
                                  c.world_base.bounds_min.z}},
                  {"bounds_max", {c.world_base.bounds_max.x, c.world_base.bounds_max.y,
                                  c.world_base.bounds_max.z}},
                  {"drone_radius", c.world_base.drone_radius},
                  {"obstacle_radius_range",
                   {c.world_base.obstacle_radius_min, c.world_base.obstacle_radius_max}}};
    j["camera"] = {{"ray_count", c.camera.ray_count},
                   {"fov", c.camera.fov},
                   {"max_range", c.camera.max_range},
                   {"yaw_offset", c.camera.yaw_offset}};
    j["noise"] = {{"multiplicative_sigma", c.noise.multiplicative_sigma},
                  {"dropout_probability", c.noise.dropout_probability},
                  {"quantization_levels", c.noise.quantization_levels},
                  {"enabled", c.noise_enabled}};
    j["reward"] = {{"lambda_d", c.weights.lambda_d}, {"lambda_b", c.weights.lambda_b},
                   {"lambda_v", c.weights.lambda_v}, {"lambda_z", c.weights.lambda_z},
                   {"lambda_f", c.weights.lambda_f}, {"lambda_a", c.weights.lambda_a},
                   {"v_max", c.weights.v_max},       {"v_desire", c.weights.v_desire},
                   {"mode", c.weights.mode == reward::SpeedMode::varying ? "varying" : "fixed"}};
    j["terminal"] = {{"r_exceed", c.terminal.r_exceed},
                     {"r_arrive", c.terminal.r_arrive},
                     {"r_collision", c.terminal.r_collision},
                     {"d_min", c.terminal.d_min}};
    j["limits"] = {{"accel_max", c.limits.accel_max}, {"yaw_rate_max", c.limits.yaw_rate_max}};
    j["dynamics"] = {{"dt", c.dt},
                     {"max_steps", c.max_steps},
                     {"min_separation", c.min_separation},
                     {"trav_samples", c.trav_samples}};
    j["vae"] = {{"n_e", c.vae.n_e},
                {"beta_norm", c.vae.beta_norm},
                {"learning_rate", c.vae.learning_rate},
                {"batch_size", c.vae.batch_size},
                {"epochs", c.vae.epochs},
                {"channels", c.vae.channels}};
    j["memory"] = {{"n_l", c.memory_cfg.n_l},
                   {"offset_frames", c.memory_cfg.offset_frames},
                   {"seq_len", c.memory_cfg.seq_len},
                   {"learning_rate", c.memory_cfg.learning_rate},
                   {"batch_size", c.memory_cfg.batch_size},
                   {"epochs", c.memory_cfg.epochs},
                   {"variant", c.latent_variant}};
    j["ppo"] = {{"gamma", c.ppo.gamma},
                {"gae_lambda", c.ppo.gae_lambda},
                {"clip_eps", c.ppo.clip_eps},
                {"update_epochs", c.ppo.update_epochs},
                {"minibatch", c.ppo.minibatch},
                {"horizon", c.ppo.horizon},
                {"workers", c.ppo.workers},
                {"ent_coef", c.ppo.ent_coef},
                {"vf_coef", c.ppo.vf_coef},
                {"learning_rate", c.ppo.learning_rate},
                {"iterations", c.ppo.iterations},
                {"checkpoint_interval", c.ppo.checkpoint_interval}};
    j["policy"] = {{"trunk_widths", c.policy_net.trunk_widths},
                   {"logstd_init", c.policy_net.logstd_init}};
    j["pipeline"] = {{"stage1_iterations", c.stage1_iterations},
                     {"collect_episodes", c.collect_episodes},
                     {"collect_radii", c.collect_radii},
                     {"holdout_fraction", c.holdout_fraction},
                     {"warmup_radius", c.warmup_radius},
                     {"warmup_iterations", c.warmup_iterations},
                     {"clutter_radius_min", c.clutter_radius_min},
                     {"clutter_radius_max", c.clutter_radius_max}};
    j["eval"] = {{"trials_per_map", c.eval_trials}, {"maps", c.eval_maps}};
    return j;
}

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(to_json(cfg).dump())); }

} // namespace memnav::cli
