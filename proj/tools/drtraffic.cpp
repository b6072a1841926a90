// drtraffic: command-line front end for training, evaluation, ablations,
// density sweeps, planner inspection, episode replay and the env server.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "drtraffic/config.hpp"
#include "drtraffic/errors.hpp"
#include "drtraffic/frenet.hpp"
#include "drtraffic/harness.hpp"
#include "drtraffic/protocol.hpp"
#include "drtraffic/randomization.hpp"

using namespace drtraffic;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string scene = "merging";
  std::vector<std::uint64_t> seeds;
  bool full_scale = false;
  bool force = false;
  bool trace = false;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file");
  app->add_option("--scene", c.scene, "merging | freeway (when no config is given)");
  app->add_option("--seed", c.seeds, "seed(s); overrides experiment.seeds");
  app->add_flag("--full-scale", c.full_scale, "full budgets and 2x256 networks");
  app->add_flag("--force", c.force, "overwrite an existing run directory");
  app->add_option("--out", c.out, "output base directory (default experiment.output_dir)");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig::defaults(parse_scene(c.scene)) : load_config(c.config);
  if (c.full_scale) cfg.apply_full_scale();
  if (!c.seeds.empty()) cfg.experiment.seeds = c.seeds;
  return cfg;
}

fs::path out_base(const Common& c, const RunConfig& cfg) {
  return c.out.empty() ? fs::path(cfg.experiment.output_dir) : fs::path(c.out);
}

void log(const std::string& msg) { std::cerr << "[drtraffic] " << msg << std::endl; }

void write_manifest(const fs::path& dir, const std::vector<TrainedPolicy>& policies) {
  std::ofstream m(dir / "policies.csv");
  m << "label,variant,seed,checkpoint,curve\n";
  for (const auto& p : policies) {
    m << p.label << ',' << p.variant << ',' << p.seed << ',' << p.checkpoint.filename().string()
      << ',' << p.curve.filename().string() << '\n';
  }
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingCheckpoint("missing checkpoint " + p.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fnv1a_hex(bytes);
}

TrafficMode flow_or(const std::string& s, TrafficMode fallback) {
  return s.empty() ? fallback : parse_traffic_mode(s);
}

int cmd_train(const Common& c) {
  const RunConfig cfg = resolve(c);
  const nlohmann::json j = to_json(cfg);
  const fs::path dir = make_run_directory(out_base(c, cfg), "train-" + std::string(scene_name(cfg.env.scene)), j, c.force);
  log("run directory " + dir.string());
  const auto policies = run_training(cfg, flow_variants(cfg), dir, log);
  write_manifest(dir, policies);
  const auto reports = run_cross_eval(cfg, policies, log);
  std::ofstream table(dir / ("cross_eval-" + fingerprint(j) + ".csv"));
  write_reports_csv(table, reports);
  write_reports_csv(std::cout, reports);
  return 0;
}

int cmd_ablate(const Common& c) {
  RunConfig cfg = resolve(c);
  cfg.experiment.test_flows = {TrafficMode::kRuleBasedRandomized, TrafficMode::kHighFidelity};
  const nlohmann::json j = to_json(cfg);
  const fs::path dir = make_run_directory(out_base(c, cfg), "ablate-" + std::string(scene_name(cfg.env.scene)), j, c.force);
  log("run directory " + dir.string());
  const auto policies = run_training(cfg, ablation_variants(cfg), dir, log);
  write_manifest(dir, policies);
  const auto reports = run_cross_eval(cfg, policies, log);
  std::ofstream table(dir / ("ablation-" + fingerprint(j) + ".csv"));
  write_reports_csv(table, reports);
  write_reports_csv(std::cout, reports);
  return 0;
}

struct EvalArgs {
  std::vector<std::string> checkpoints;
  std::string flow;
  std::vector<double> phis;
  int episodes = 0;
  bool serial = false;
};

int cmd_eval(const Common& c, const EvalArgs& a) {
  RunConfig cfg = resolve(c);
  if (a.episodes > 0) cfg.experiment.eval_episodes = a.episodes;
  const std::uint64_t seed = cfg.experiment.seeds.empty() ? 0 : cfg.experiment.seeds.front();
  const TrafficMode flow = flow_or(a.flow, cfg.env.sim.traffic_mode);
  const std::optional<double> phi = a.phis.empty() ? std::nullopt : std::optional(a.phis.front());
  const EnvConfig env = test_env(cfg, flow, phi);

  nlohmann::json key = to_json(cfg);
  key["eval_flow"] = std::string(traffic_mode_name(flow));
  key["eval_phi"] = env.sim.spawn_probability;
  key["eval_seed"] = seed;
  key["trace"] = c.trace;
  for (const auto& ck : a.checkpoints) key["checkpoints"].push_back(file_hash(ck));
  const fs::path dir = make_run_directory(out_base(c, cfg), "eval-" + std::string(scene_name(cfg.env.scene)), key, c.force);
  const std::string fp = fingerprint(key);

  std::vector<EvalReport> reports;
  std::ofstream trace_file;
  if (c.trace) trace_file.open(dir / ("trace-" + fp + ".jsonl"));
  std::ofstream episodes(dir / ("episodes-" + fp + ".csv"));
  for (const auto& ck : a.checkpoints) {
    const SacAgent agent = SacAgent::load(fs::path(ck));
    EvalOptions opt;
    opt.episodes = cfg.experiment.eval_episodes;
    opt.seed = seed;
    opt.parallel = !a.serial;
    opt.trace = c.trace ? &trace_file : nullptr;
    const std::string label = fs::path(ck).stem().string();
    log("eval " + label + " on " + std::string(traffic_mode_name(flow)));
    const auto eps = evaluate_episodes(env, agent, opt);
    write_episodes_csv(episodes, eps);
    reports.push_back(summarize(eps, env, label, seed));
  }
  std::ofstream table(dir / ("report-" + fp + ".csv"));
  write_reports_csv(table, reports);
  write_reports_csv(std::cout, reports);
  log("wrote " + dir.string());
  return 0;
}

int cmd_density(const Common& c, const EvalArgs& a) {
  RunConfig cfg = resolve(c);
  if (a.episodes > 0) cfg.experiment.eval_episodes = a.episodes;
  const std::vector<double> phis = a.phis.empty() ? cfg.experiment.phi_test : a.phis;
  nlohmann::json key = to_json(cfg);
  key["phis"] = phis;
  std::vector<TrainedPolicy> policies;
  const std::uint64_t seed = cfg.experiment.seeds.empty() ? 0 : cfg.experiment.seeds.front();
  for (const auto& ck : a.checkpoints) {
    key["checkpoints"].push_back(file_hash(ck));
    policies.push_back({fs::path(ck).stem().string(), "", seed, ck, {}});
  }
  const fs::path dir = make_run_directory(out_base(c, cfg), "density-" + std::string(scene_name(cfg.env.scene)), key, c.force);
  const auto reports = run_density_sweep(cfg, policies, phis, log);
  std::ofstream table(dir / ("density-" + fingerprint(key) + ".csv"));
  write_reports_csv(table, reports);
  write_reports_csv(std::cout, reports);
  return 0;
}

int cmd_sample_params(std::size_t n, std::uint64_t seed, const std::vector<std::string>& drop) {
  RandomizationSpec spec = RandomizationSpec::full();
  for (const auto& d : drop) spec = ablation_spec(spec, d);
  RngStream rng(seed, StreamId::kParams);
  std::cout << "index";
  for (std::size_t i = 0; i < kDriverParamCount; ++i) std::cout << ',' << param_name(static_cast<DriverParam>(i));
  std::cout << '\n';
  for (std::size_t k = 0; k < n; ++k) {
    const DriverParams p = sample_params(spec, rng);
    std::cout << k;
    for (std::size_t i = 0; i < kDriverParamCount; ++i) {
      std::cout << ',' << format_real(p.get(static_cast<DriverParam>(i)));
    }
    std::cout << '\n';
  }
  return 0;
}

// Scene file: {"ego": {"s","s_d","s_dd","d","d_d","d_dd"}, "ref_speed", "ref_d",
// "lane_centers": [...], "obstacles": [{"s","v","d","length"}], "planner": {...}}
int cmd_plan(const std::string& scene_path, const std::string& out_path) {
  std::ifstream in(scene_path);
  if (!in) throw ConfigError("cannot open scene " + scene_path);
  const nlohmann::json j = nlohmann::json::parse(in);
  PlanRequest req;
  const auto& e = j.at("ego");
  req.current = {e.value("s", 0.0), e.value("s_d", 0.0), e.value("s_dd", 0.0),
                 e.value("d", 0.0), e.value("d_d", 0.0), e.value("d_dd", 0.0)};
  req.ref_speed = j.value("ref_speed", req.current.s_d);
  req.ref_d = j.value("ref_d", req.current.d);
  req.lane_centers = j.value("lane_centers", std::vector<double>{1.6});
  for (const auto& o : j.value("obstacles", nlohmann::json::array())) {
    req.obstacles.push_back({o.value("s", 0.0), o.value("v", 0.0), o.value("d", 0.0), o.value("length", 5.0)});
  }
  RunConfig base = RunConfig::defaults(Scene::kFreeway);
  if (j.contains("planner")) base = parse_config({{"planner", j["planner"]}});
  const PlanResult r = plan_fan(req, base.env.planner);

  std::ofstream file;
  std::ostream& out = out_path.empty() ? std::cout : (file.open(out_path), file);
  out << "grid_index,target_d,target_speed,smoothness,stability,collision_risk,speed_dev,"
         "lateral_dev,total_cost,feasible,selected\n";
  for (const auto& c : r.candidates) {
    out << c.grid_index << ',' << format_real(c.target_d) << ',' << format_real(c.target_speed) << ','
        << format_real(c.cost.smoothness) << ',' << format_real(c.cost.stability) << ','
        << format_real(c.cost.collision_risk) << ',' << format_real(c.cost.speed_dev) << ','
        << format_real(c.cost.lateral_dev) << ',' << format_real(c.total_cost) << ','
        << (c.feasible ? 1 : 0) << ',' << (r.best && *r.best == c.grid_index ? 1 : 0) << '\n';
  }
  if (!r.best) log("no feasible trajectory; a vehicle would fall back to emergency braking");
  return 0;
}

int cmd_replay(const Common& c, const std::string& checkpoint, const std::string& flow, long episode,
               const std::string& trace_path) {
  const RunConfig cfg = resolve(c);
  const std::uint64_t seed = cfg.experiment.seeds.empty() ? 0 : cfg.experiment.seeds.front();
  const EnvConfig env_cfg = test_env(cfg, flow_or(flow, cfg.env.sim.traffic_mode));
  const SacAgent agent = SacAgent::load(fs::path(checkpoint));
  std::ofstream file;
  std::ostream& trace = trace_path.empty() ? std::cout : (file.open(trace_path), file);
  const std::unique_ptr<Env> env = make_env(env_cfg);
  env->set_trace(&trace);
  const std::uint64_t ep_seed = eval_episode_seed(seed, episode);
  RngStream unused(ep_seed, StreamId::kPolicy);
  auto obs = env->reset(ep_seed);
  StepResult r;
  double ret = 0.0;
  long steps = 0;
  do {
    r = env->step(agent.act(obs, true, unused).env);
    ret += r.reward;
    ++steps;
    obs = r.observation;
  } while (!r.done);
  log("episode " + std::to_string(episode) + ": " + std::string(outcome_name(r.outcome)) + " after " +
      std::to_string(steps) + " steps, return " + format_real(ret));
  return 0;
}

int cmd_serve(const Common& c, int port, int max_sessions) {
  const RunConfig cfg = resolve(c);
  ServerOptions opt;
  opt.port = port;
  opt.max_sessions = max_sessions;
  serve(cfg.env, opt, [](int p) { std::cout << "listening 127.0.0.1:" << p << std::endl; });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drtraffic: domain-randomized traffic simulation and RL experiments"};
  app.require_subcommand(1);
  Common common;
  EvalArgs eval_args;

  auto* train = app.add_subcommand("train", "train one policy per train flow and seed, then cross-evaluate");
  add_common(train, common);

  auto* eval = app.add_subcommand("eval", "evaluate checkpoints deterministically");
  add_common(eval, common);
  eval->add_option("--checkpoint", eval_args.checkpoints, "checkpoint file(s)")->required();
  eval->add_option("--flow", eval_args.flow, "rule_based | randomized | high_fidelity");
  eval->add_option("--phi", eval_args.phis, "spawn probability for testing");
  eval->add_option("--episodes", eval_args.episodes, "episodes per checkpoint");
  eval->add_flag("--serial", eval_args.serial, "use the serial reference path");
  eval->add_flag("--trace", common.trace, "write a JSONL per-step trace");

  auto* ablate = app.add_subcommand("ablate", "ablation grid: train and test one policy per dropped parameter");
  add_common(ablate, common);

  EvalArgs sweep_args;
  auto* sweep = app.add_subcommand("density-sweep", "evaluate under high-fidelity flow at several phi");
  add_common(sweep, common);
  sweep->add_option("--checkpoint", sweep_args.checkpoints, "checkpoint file(s)")->required();
  sweep->add_option("--phi", sweep_args.phis, "spawn probabilities (default: scene grid)");
  sweep->add_option("--episodes", sweep_args.episodes, "episodes per cell");

  std::size_t n_samples = 1000;
  std::uint64_t sample_seed = 0;
  std::vector<std::string> drop;
  auto* sample = app.add_subcommand("sample-params", "emit sampled driver parameters as CSV");
  sample->add_option("-n,--count", n_samples, "number of drivers");
  sample->add_option("--seed", sample_seed, "seed");
  sample->add_option("--drop", drop, "parameter(s) to hold at their defaults");

  std::string scene_file, plan_out;
  auto* plan_cmd = app.add_subcommand("plan", "score the Frenet candidate fan for a scene file");
  plan_cmd->add_option("--scene-file", scene_file, "JSON scene")->required();
  plan_cmd->add_option("--out", plan_out, "CSV path (default stdout)");

  std::string replay_ckpt, replay_flow, replay_trace;
  long replay_episode = 0;
  auto* replay = app.add_subcommand("replay", "re-run one evaluation episode and trace it");
  add_common(replay, common);
  replay->add_option("--checkpoint", replay_ckpt, "checkpoint file")->required();
  replay->add_option("--flow", replay_flow, "test flow");
  replay->add_option("--episode", replay_episode, "evaluation episode index");
  replay->add_option("--trace", replay_trace, "JSONL path (default stdout)");

  int port = 0, max_sessions = 0;
  auto* serve_cmd = app.add_subcommand("serve", "serve the environment over a local socket");
  add_common(serve_cmd, common);
  serve_cmd->add_option("--port", port, "TCP port on 127.0.0.1 (0 = any free port)");
  serve_cmd->add_option("--max-sessions", max_sessions, "exit after this many sessions");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(common);
    if (*eval) return cmd_eval(common, eval_args);
    if (*ablate) return cmd_ablate(common);
    if (*sweep) return cmd_density(common, sweep_args);
    if (*sample) return cmd_sample_params(n_samples, sample_seed, drop);
    if (*plan_cmd) return cmd_plan(scene_file, plan_out);
    if (*replay) return cmd_replay(common, replay_ckpt, replay_flow, replay_episode, replay_trace);
    if (*serve_cmd) return cmd_serve(common, port, max_sessions);
  } catch (const std::exception& e) {
    std::cerr << "drtraffic: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
