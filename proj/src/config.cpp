#include "eqrl/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "eqrl/errors.hpp"

namespace eqrl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  std::size_t pos = 0;
  const double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return d;
}

std::int64_t to_int(const std::string& v) {
  std::size_t pos = 0;
  const long long i = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("trailing characters");
  return i;
}

std::vector<double> to_doubles(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  return out;
}

Vec3 to_vec3(const std::string& v) {
  const auto d = to_doubles(v);
  if (d.size() != 3) throw std::invalid_argument("expected three comma-separated numbers");
  return Vec3(d[0], d[1], d[2]);
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      // run
      {"algo", [](RunConfig& c, const std::string& v) { c.algo = parse_algorithm(v); }},
      {"mode", [](RunConfig& c, const std::string& v) { c.mode = parse_mode(v); }},
      {"seeds", [](RunConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); }},
      {"total_steps", [](RunConfig& c, const std::string& v) { c.total_steps = to_int(v); }},
      {"eval_interval", [](RunConfig& c, const std::string& v) { c.eval_interval = to_int(v); }},
      {"eval_episodes", [](RunConfig& c, const std::string& v) { c.eval_episodes = static_cast<int>(to_int(v)); }},
      {"checkpoint_interval", [](RunConfig& c, const std::string& v) { c.checkpoint_interval = to_int(v); }},
      {"threshold_fraction", [](RunConfig& c, const std::string& v) { c.threshold_fraction = to_double(v); }},
      {"jobs", [](RunConfig& c, const std::string& v) { c.jobs = static_cast<int>(to_int(v)); }},
      {"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
      // vehicle
      {"mass", [](RunConfig& c, const std::string& v) { c.params.mass = to_double(v); }},
      {"inertia", [](RunConfig& c, const std::string& v) { c.params.inertia = to_vec3(v).asDiagonal(); }},
      {"gravity", [](RunConfig& c, const std::string& v) { c.params.gravity = to_double(v); }},
      {"arm_length", [](RunConfig& c, const std::string& v) { c.params.arm_length = to_double(v); }},
      {"c_tau_f", [](RunConfig& c, const std::string& v) { c.params.c_tau_f = to_double(v); }},
      {"thrust_max", [](RunConfig& c, const std::string& v) { c.params.thrust_max = to_double(v); }},
      // environment
      {"x_d", [](RunConfig& c, const std::string& v) { c.env.x_d = to_vec3(v); }},
      {"e_x_max", [](RunConfig& c, const std::string& v) { c.env.e_x_max = to_double(v); }},
      {"c_x", [](RunConfig& c, const std::string& v) { c.env.c_x = to_double(v); }},
      {"c_v", [](RunConfig& c, const std::string& v) { c.env.c_v = to_double(v); }},
      {"c_omega", [](RunConfig& c, const std::string& v) { c.env.c_omega = to_double(v); }},
      {"c_a", [](RunConfig& c, const std::string& v) { c.env.c_a = to_double(v); }},
      {"reward_scale", [](RunConfig& c, const std::string& v) { c.env.reward_scale = to_double(v); }},
      {"dt", [](RunConfig& c, const std::string& v) { c.env.dt = to_double(v); }},
      {"max_steps", [](RunConfig& c, const std::string& v) { c.env.max_steps = static_cast<int>(to_int(v)); }},
      {"init_pos_half_width", [](RunConfig& c, const std::string& v) { c.env.init_pos_half_width = to_double(v); }},
      {"init_vel", [](RunConfig& c, const std::string& v) { c.env.init_vel = to_double(v); }},
      {"init_tilt", [](RunConfig& c, const std::string& v) { c.env.init_tilt = to_double(v); }},
      {"init_omega", [](RunConfig& c, const std::string& v) { c.env.init_omega = to_double(v); }},
      {"v_max", [](RunConfig& c, const std::string& v) { c.env.v_max = to_double(v); }},
      {"omega_max", [](RunConfig& c, const std::string& v) { c.env.omega_max = to_double(v); }},
      // shared learner settings (applied to both algorithms)
      {"gamma", [](RunConfig& c, const std::string& v) { c.td3.gamma = c.sac.gamma = to_double(v); }},
      {"tau", [](RunConfig& c, const std::string& v) { c.td3.tau = c.sac.tau = to_double(v); }},
      {"batch_size", [](RunConfig& c, const std::string& v) { c.td3.batch_size = c.sac.batch_size = static_cast<int>(to_int(v)); }},
      {"warmup_steps", [](RunConfig& c, const std::string& v) { c.td3.warmup_steps = c.sac.warmup_steps = to_int(v); }},
      {"buffer_capacity", [](RunConfig& c, const std::string& v) {
         const auto n = to_int(v);
         if (n <= 0) throw std::invalid_argument("must be positive");
         c.td3.buffer_capacity = c.sac.buffer_capacity = static_cast<std::size_t>(n);
       }},
      {"actor_lr", [](RunConfig& c, const std::string& v) { c.td3.actor_lr = c.sac.actor_lr = to_double(v); }},
      {"critic_lr", [](RunConfig& c, const std::string& v) { c.td3.critic_lr = c.sac.critic_lr = to_double(v); }},
      {"hidden_units", [](RunConfig& c, const std::string& v) { c.td3.hidden_units = c.sac.hidden_units = static_cast<int>(to_int(v)); }},
      // TD3
      {"td3_exploration_noise", [](RunConfig& c, const std::string& v) { c.td3.exploration_noise = to_double(v); }},
      {"td3_target_noise", [](RunConfig& c, const std::string& v) { c.td3.target_noise = to_double(v); }},
      {"td3_noise_clip", [](RunConfig& c, const std::string& v) { c.td3.noise_clip = to_double(v); }},
      {"td3_policy_delay", [](RunConfig& c, const std::string& v) { c.td3.policy_delay = static_cast<int>(to_int(v)); }},
      // SAC
      {"sac_target_entropy", [](RunConfig& c, const std::string& v) { c.sac.target_entropy = to_double(v); }},
      {"sac_alpha_lr", [](RunConfig& c, const std::string& v) { c.sac.alpha_lr = to_double(v); }},
      {"sac_initial_alpha", [](RunConfig& c, const std::string& v) { c.sac.initial_alpha = to_double(v); }},
  };
  return table;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("seed '" + t + "' is not a non-negative integer");
    }
    seeds.push_back(std::stoull(t));
  }
  if (seeds.empty()) throw std::invalid_argument("seed list is empty");
  return seeds;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  try {
    it->second(cfg, value);
  } catch (const std::exception& e) {
    throw ConfigError("bad value '" + value + "' for key '" + key + "': " + e.what());
  }
}

void RunConfig::validate() const {
  try {
    if (seeds.empty()) throw ConfigError("seeds: list must not be empty");
    if (total_steps < 0) throw ConfigError("total_steps: must be non-negative");
    if (eval_interval < 1) throw ConfigError("eval_interval: must be positive");
    if (total_steps > 0 && eval_interval > total_steps) {
      throw ConfigError("eval_interval: must not exceed total_steps");
    }
    if (eval_episodes < 1) throw ConfigError("eval_episodes: must be positive");
    if (checkpoint_interval < 0) throw ConfigError("checkpoint_interval: must be non-negative");
    if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0)) {
      throw ConfigError("threshold_fraction: must lie in (0, 1]");
    }
    if (jobs < 1) throw ConfigError("jobs: must be positive");
    env.validate();
    params.validate();
    td3.validate();
    sac.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
}

TrainConfig RunConfig::train_config(std::uint64_t seed) const {
  TrainConfig t;
  t.algo = algo;
  t.mode = mode;
  t.total_steps = total_steps;
  t.eval_interval = eval_interval;
  t.eval_episodes = eval_episodes;
  t.seed = seed;
  t.env = env;
  t.params = params;
  t.td3 = td3;
  t.sac = sac;
  return t;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  bool thrust_max_given = false;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + "expected 'key = value'");
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
    if (key == "thrust_max") thrust_max_given = true;
  }
  // Per-rotor ceiling defaults to m g (hover at 25% of range) for the
  // configured vehicle.
  if (!thrust_max_given) cfg.params.thrust_max = cfg.params.mass * cfg.params.gravity;
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config file not found: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace eqrl
