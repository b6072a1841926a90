#include "drtraffic/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "drtraffic/errors.hpp"
#include "drtraffic/randomization.hpp"

namespace drtraffic {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, key, v);
  out = v;
}

std::vector<TrafficMode> read_flows(const json& j) {
  std::vector<TrafficMode> out;
  for (const auto& f : j) out.push_back(parse_traffic_mode(f.get<std::string>()));
  return out;
}

json flows_json(const std::vector<TrafficMode>& flows) {
  json a = json::array();
  for (auto f : flows) a.push_back(std::string(traffic_mode_name(f)));
  return a;
}

}  // namespace

long desk_budget(Scene scene) { return scene == Scene::kMerging ? 50'000 : 100'000; }
long full_budget(Scene scene) { return scene == Scene::kMerging ? 200'000 : 400'000; }

std::vector<double> default_phi_grid(Scene scene) {
  if (scene == Scene::kMerging) return {0.56, 0.72, 0.89};
  return {0.14, 0.18, 0.20};
}

RunConfig RunConfig::defaults(Scene scene) {
  RunConfig c;
  c.env = EnvConfig::defaults(scene);
  c.sac.hidden = {64, 64};
  c.sac.batch_size = 128;
  // At desk budgets the default -(action dim) keeps enough exploration noise
  // that the per-step jerk penalty outweighs the terminal rewards, and the
  // merging policy learns to crash early. A lower target lets alpha decay.
  c.sac.target_entropy = kDeskTargetEntropy;
  c.experiment.budget = desk_budget(scene);
  c.experiment.phi_test = default_phi_grid(scene);
  return c;
}

void RunConfig::apply_full_scale() {
  sac.hidden = {256, 256};
  sac.batch_size = 256;
  sac.target_entropy.reset();
  experiment.budget = full_budget(env.scene);
}

RunConfig parse_config(const json& j) {
  check_keys(j, "config", {"scene", "sim", "geometry", "env", "planner", "merging_reward",
                           "freeway_reward", "sac", "experiment"});
  std::string scene = "merging";
  read(j, "scene", scene);
  RunConfig c = RunConfig::defaults(parse_scene(scene));

  if (j.contains("sim")) {
    const json& s = j["sim"];
    check_keys(s, "sim", {"dt", "spawn_probability", "seed", "traffic_mode", "episode_timeout",
                          "spawn_block_distance", "vehicle_length", "randomization"});
    read(s, "dt", c.env.sim.dt);
    read(s, "spawn_probability", c.env.sim.spawn_probability);
    read(s, "seed", c.env.sim.seed);
    if (s.contains("traffic_mode")) {
      c.env.sim.traffic_mode = parse_traffic_mode(s["traffic_mode"].get<std::string>());
    }
    read(s, "episode_timeout", c.env.sim.episode_timeout);
    read(s, "spawn_block_distance", c.env.sim.spawn_block_distance);
    read(s, "vehicle_length", c.env.sim.vehicle_length);
    if (s.contains("randomization")) {
      for (const auto& [name, r] : s["randomization"].items()) {
        ParamRange& range = c.env.sim.randomization[parse_param(name)];
        check_keys(r, "randomization entry", {"enabled", "min", "max"});
        read(r, "enabled", range.enabled);
        read(r, "min", range.s_min);
        read(r, "max", range.s_max);
      }
      if (!c.env.sim.randomization.valid()) throw ConfigError("randomization bounds need min < max");
    }
  }
  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    check_keys(g, "geometry", {"lane_count_main", "lane_length", "lane_width", "speed_limit",
                               "merge_point_s", "control_half_width", "ramp_start_s"});
    read_opt(g, "lane_count_main", c.env.geometry.lane_count_main);
    read_opt(g, "lane_length", c.env.geometry.lane_length);
    read_opt(g, "lane_width", c.env.geometry.lane_width);
    read_opt(g, "speed_limit", c.env.geometry.speed_limit);
    read_opt(g, "merge_point_s", c.env.geometry.merge_point_s);
    read_opt(g, "control_half_width", c.env.geometry.control_half_width);
    read_opt(g, "ramp_start_s", c.env.geometry.ramp_start_s);
  }
  if (j.contains("env")) {
    const json& e = j["env"];
    check_keys(e, "env", {"warmup_seconds", "sensing_horizon", "agent_entry_speed",
                          "freeway_ego_start_s", "accel_low", "accel_high"});
    read(e, "warmup_seconds", c.env.warmup_seconds);
    read(e, "sensing_horizon", c.env.sensing_horizon);
    read(e, "agent_entry_speed", c.env.agent_entry_speed);
    read(e, "freeway_ego_start_s", c.env.freeway_ego_start_s);
    read(e, "accel_low", c.env.accel_low);
    read(e, "accel_high", c.env.accel_high);
  }
  if (j.contains("planner")) {
    const json& p = j["planner"];
    PlannerConfig& pc = c.env.planner;
    check_keys(p, "planner", {"perception_radius", "replan_period", "horizon", "dt",
                              "lateral_offsets", "speed_offsets", "weights", "risk_length",
                              "max_accel", "max_speed", "max_curvature", "vehicle_width",
                              "vehicle_length"});
    read(p, "perception_radius", pc.perception_radius);
    read(p, "replan_period", pc.replan_period);
    read(p, "horizon", pc.horizon);
    read(p, "dt", pc.dt);
    read(p, "lateral_offsets", pc.lateral_offsets);
    read(p, "speed_offsets", pc.speed_offsets);
    if (p.contains("weights")) {
      const json& w = p["weights"];
      check_keys(w, "planner.weights", {"smoothness", "stability", "collision", "speed", "lateral"});
      read(w, "smoothness", pc.weights.smoothness);
      read(w, "stability", pc.weights.stability);
      read(w, "collision", pc.weights.collision);
      read(w, "speed", pc.weights.speed);
      read(w, "lateral", pc.weights.lateral);
    }
    read(p, "risk_length", pc.risk_length);
    read(p, "max_accel", pc.max_accel);
    read(p, "max_speed", pc.max_speed);
    read(p, "max_curvature", pc.max_curvature);
    read(p, "vehicle_width", pc.vehicle_width);
    read(p, "vehicle_length", pc.vehicle_length);
  }
  if (j.contains("merging_reward")) {
    const json& m = j["merging_reward"];
    MergingRewardParams& r = c.env.merging_reward;
    check_keys(m, "merging_reward", {"w_m", "w_b", "w_j", "dv_max", "j_max", "r_stop",
                                     "r_collision", "r_success", "a_min", "a_max", "length_p1",
                                     "length_m", "dt"});
    read(m, "w_m", r.w_m);
    read(m, "w_b", r.w_b);
    read(m, "w_j", r.w_j);
    read(m, "dv_max", r.dv_max);
    read(m, "j_max", r.j_max);
    read(m, "r_stop", r.r_stop);
    read(m, "r_collision", r.r_collision);
    read(m, "r_success", r.r_success);
    read(m, "a_min", r.a_min);
    read(m, "a_max", r.a_max);
    read(m, "length_p1", r.length_p1);
    read(m, "length_m", r.length_m);
    read(m, "dt", r.dt);
  }
  if (j.contains("freeway_reward")) {
    const json& f = j["freeway_reward"];
    FreewayRewardParams& r = c.env.freeway_reward;
    check_keys(f, "freeway_reward", {"w0", "w1", "w2", "w3", "w4", "w5", "w6", "v_safe",
                                     "v_stable", "d_safe", "d_star", "r_collision", "jerk_dt"});
    read(f, "w0", r.w0);
    read(f, "w1", r.w1);
    read(f, "w2", r.w2);
    read(f, "w3", r.w3);
    read(f, "w4", r.w4);
    read(f, "w5", r.w5);
    read(f, "w6", r.w6);
    read(f, "v_safe", r.v_safe);
    read(f, "v_stable", r.v_stable);
    read(f, "d_safe", r.d_safe);
    read(f, "d_star", r.d_star);
    read(f, "r_collision", r.r_collision);
    read(f, "jerk_dt", r.jerk_dt);
  }
  if (j.contains("sac")) {
    const json& s = j["sac"];
    check_keys(s, "sac", {"gamma", "tau", "lr", "batch_size", "buffer_capacity", "hidden",
                          "activation", "warmup_steps", "updates_per_step", "auto_alpha",
                          "initial_alpha", "target_entropy"});
    read(s, "gamma", c.sac.gamma);
    read(s, "tau", c.sac.tau);
    read(s, "lr", c.sac.lr);
    read(s, "batch_size", c.sac.batch_size);
    read(s, "buffer_capacity", c.sac.buffer_capacity);
    read(s, "hidden", c.sac.hidden);
    if (s.contains("activation")) c.sac.activation = parse_activation(s["activation"].get<std::string>());
    read(s, "warmup_steps", c.sac.warmup_steps);
    read(s, "updates_per_step", c.sac.updates_per_step);
    read(s, "auto_alpha", c.sac.auto_alpha);
    read(s, "initial_alpha", c.sac.initial_alpha);
    read_opt(s, "target_entropy", c.sac.target_entropy);
    c.sac.validate();
  }
  if (j.contains("experiment")) {
    const json& e = j["experiment"];
    ExperimentSettings& x = c.experiment;
    check_keys(e, "experiment", {"train_flows", "test_flows", "budget", "eval_episodes", "phi_test",
                                 "seeds", "ablations", "output_dir", "eval_interval"});
    if (e.contains("train_flows")) x.train_flows = read_flows(e["train_flows"]);
    if (e.contains("test_flows")) x.test_flows = read_flows(e["test_flows"]);
    read(e, "budget", x.budget);
    read(e, "eval_episodes", x.eval_episodes);
    read(e, "phi_test", x.phi_test);
    read(e, "seeds", x.seeds);
    read(e, "ablations", x.ablations);
    for (const auto& a : x.ablations) {
      if (a != "none" && a != "all") parse_param(a);
    }
    read(e, "output_dir", x.output_dir);
    read(e, "eval_interval", x.eval_interval);
    if (x.eval_episodes < 1) throw ConfigError("eval_episodes must be positive");
    if (x.budget < 1) throw ConfigError("budget must be positive");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["scene"] = std::string(scene_name(c.env.scene));
  const SimConfig& s = c.env.sim;
  json rnd;
  for (std::size_t i = 0; i < kDriverParamCount; ++i) {
    const auto p = static_cast<DriverParam>(i);
    const ParamRange& r = s.randomization[p];
    rnd[std::string(param_name(p))] = {{"enabled", r.enabled}, {"min", r.s_min}, {"max", r.s_max}};
  }
  j["sim"] = {{"dt", s.dt},
              {"spawn_probability", s.spawn_probability},
              {"seed", s.seed},
              {"traffic_mode", std::string(traffic_mode_name(s.traffic_mode))},
              {"episode_timeout", s.episode_timeout},
              {"spawn_block_distance", s.spawn_block_distance},
              {"vehicle_length", s.vehicle_length},
              {"randomization", rnd}};
  json g = json::object();
  const GeometryOverrides& go = c.env.geometry;
  auto put = [&g](const char* k, const auto& opt) {
    if (opt) g[k] = *opt;
  };
  put("lane_count_main", go.lane_count_main);
  put("lane_length", go.lane_length);
  put("lane_width", go.lane_width);
  put("speed_limit", go.speed_limit);
  put("merge_point_s", go.merge_point_s);
  put("control_half_width", go.control_half_width);
  put("ramp_start_s", go.ramp_start_s);
  j["geometry"] = g;
  j["env"] = {{"warmup_seconds", c.env.warmup_seconds},
              {"sensing_horizon", c.env.sensing_horizon},
              {"agent_entry_speed", c.env.agent_entry_speed},
              {"freeway_ego_start_s", c.env.freeway_ego_start_s},
              {"accel_low", c.env.accel_low},
              {"accel_high", c.env.accel_high}};
  const PlannerConfig& p = c.env.planner;
  j["planner"] = {{"perception_radius", p.perception_radius},
                  {"replan_period", p.replan_period},
                  {"horizon", p.horizon},
                  {"dt", p.dt},
                  {"lateral_offsets", p.lateral_offsets},
                  {"speed_offsets", p.speed_offsets},
                  {"weights",
                   {{"smoothness", p.weights.smoothness},
                    {"stability", p.weights.stability},
                    {"collision", p.weights.collision},
                    {"speed", p.weights.speed},
                    {"lateral", p.weights.lateral}}},
                  {"risk_length", p.risk_length},
                  {"max_accel", p.max_accel},
                  {"max_speed", p.max_speed},
                  {"max_curvature", p.max_curvature},
                  {"vehicle_width", p.vehicle_width},
                  {"vehicle_length", p.vehicle_length}};
  const MergingRewardParams& m = c.env.merging_reward;
  j["merging_reward"] = {{"w_m", m.w_m}, {"w_b", m.w_b}, {"w_j", m.w_j},
                         {"dv_max", m.dv_max}, {"j_max", m.j_max}, {"r_stop", m.r_stop},
                         {"r_collision", m.r_collision}, {"r_success", m.r_success},
                         {"a_min", m.a_min}, {"a_max", m.a_max}, {"length_p1", m.length_p1},
                         {"length_m", m.length_m}, {"dt", m.dt}};
  const FreewayRewardParams& f = c.env.freeway_reward;
  j["freeway_reward"] = {{"w0", f.w0}, {"w1", f.w1}, {"w2", f.w2}, {"w3", f.w3},
                         {"w4", f.w4}, {"w5", f.w5}, {"w6", f.w6}, {"v_safe", f.v_safe},
                         {"v_stable", f.v_stable}, {"d_safe", f.d_safe}, {"d_star", f.d_star},
                         {"r_collision", f.r_collision}, {"jerk_dt", f.jerk_dt}};
  const SacHyper& h = c.sac;
  j["sac"] = {{"gamma", h.gamma},
              {"tau", h.tau},
              {"lr", h.lr},
              {"batch_size", h.batch_size},
              {"buffer_capacity", h.buffer_capacity},
              {"hidden", h.hidden},
              {"activation", std::string(activation_name(h.activation))},
              {"warmup_steps", h.warmup_steps},
              {"updates_per_step", h.updates_per_step},
              {"auto_alpha", h.auto_alpha},
              {"initial_alpha", h.initial_alpha},
              {"target_entropy", h.target_entropy ? json(*h.target_entropy) : json(nullptr)}};
  const ExperimentSettings& x = c.experiment;
  j["experiment"] = {{"train_flows", flows_json(x.train_flows)},
                     {"test_flows", flows_json(x.test_flows)},
                     {"budget", x.budget},
                     {"eval_episodes", x.eval_episodes},
                     {"phi_test", x.phi_test},
                     {"seeds", x.seeds},
                     {"ablations", x.ablations},
                     {"output_dir", x.output_dir},
                     {"eval_interval", x.eval_interval}};
  return j;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fingerprint(const json& j) { return fnv1a_hex(j.dump()); }

}  // namespace drtraffic
