#include "drtraffic/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "drtraffic/errors.hpp"
#include "drtraffic/randomization.hpp"

namespace drtraffic {

namespace fs = std::filesystem;

WilsonInterval wilson_interval(long k, long n, double z) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  // The bounds are exactly 0 / 1 at the extremes; rounding would leave a
  // residue of order 1e-17.
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

namespace {

EpisodeSummary run_one(Env& env, const SacAgent& agent, long index, std::uint64_t seed,
                       std::ostream* trace) {
  EpisodeSummary e;
  e.index = index;
  e.seed = seed;
  if (trace) *trace << R"({"episode":)" << index << R"(,"seed":)" << seed << "}\n";
  env.set_trace(trace);
  RngStream unused(seed, StreamId::kPolicy);
  std::vector<double> obs = env.reset(seed);
  StepResult r;
  do {
    r = env.step(agent.act(obs, true, unused).env);
    e.ret += r.reward;
    e.speed_sum += env.ego_speed();
    ++e.length;
    obs = std::move(r.observation);
  } while (!r.done);
  env.set_trace(nullptr);
  e.outcome = r.outcome;
  return e;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<EpisodeSummary> evaluate_episodes(const EnvConfig& cfg, const SacAgent& agent,
                                              const EvalOptions& opt) {
  {
    const auto probe = make_env(cfg);
    const ActionSpace want = probe->action_space();
    const ActionSpace& have = agent.action_space();
    if (probe->observation_dim() != agent.obs_dim() || want.low.size() != have.low.size() ||
        want.discrete_count != have.discrete_count) {
      throw ConfigError("checkpoint does not fit the " + std::string(scene_name(cfg.scene)) +
                        " scene (observation " + std::to_string(agent.obs_dim()) + " vs " +
                        std::to_string(probe->observation_dim()) + ")");
    }
  }
  const long n = opt.episodes;
  std::vector<EpisodeSummary> out(static_cast<std::size_t>(n));
  std::vector<std::ostringstream> traces(opt.trace ? static_cast<std::size_t>(n) : 0);
  auto trace_for = [&](long i) -> std::ostream* {
    return opt.trace ? &traces[static_cast<std::size_t>(i)] : nullptr;
  };
  if (opt.parallel) {
    std::exception_ptr error;
#pragma omp parallel
    {
      std::unique_ptr<Env> env = make_env(cfg);
#pragma omp for schedule(dynamic)
      for (long i = 0; i < n; ++i) {
        try {
          out[static_cast<std::size_t>(i)] =
              run_one(*env, agent, i, eval_episode_seed(opt.seed, i), trace_for(i));
        } catch (...) {
#pragma omp critical
          if (!error) error = std::current_exception();
        }
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    std::unique_ptr<Env> env = make_env(cfg);
    for (long i = 0; i < n; ++i) {
      out[static_cast<std::size_t>(i)] =
          run_one(*env, agent, i, eval_episode_seed(opt.seed, i), trace_for(i));
    }
  }
  if (opt.trace) {
    for (const auto& t : traces) *opt.trace << t.str();
  }
  return out;
}

EvalReport summarize(const std::vector<EpisodeSummary>& eps, const EnvConfig& env,
                     std::string policy, std::uint64_t seed) {
  EvalReport r;
  r.policy = std::move(policy);
  r.scene = env.scene;
  r.test_flow = env.sim.traffic_mode;
  r.phi = env.sim.spawn_probability;
  r.episodes = static_cast<long>(eps.size());
  r.seed = seed;
  long steps = 0;
  double reward = 0.0, speed = 0.0;
  for (const auto& e : eps) {
    switch (e.outcome) {
      case Outcome::kSuccess: ++r.successes; break;
      case Outcome::kCollision: ++r.collisions; break;
      default: ++r.timeouts; break;
    }
    steps += e.length;
    reward += e.ret;
    speed += e.speed_sum;
  }
  const double n = std::max<double>(1.0, static_cast<double>(r.episodes));
  r.success_rate = static_cast<double>(r.successes) / n;
  r.collision_rate = static_cast<double>(r.collisions) / n;
  r.timeout_rate = static_cast<double>(r.timeouts) / n;
  r.success_ci = wilson_interval(r.successes, r.episodes);
  r.average_return = reward / n;
  r.average_reward = steps > 0 ? reward / static_cast<double>(steps) : 0.0;
  r.average_speed = steps > 0 ? speed / static_cast<double>(steps) : 0.0;
  RunConfig rc;
  rc.env = env;
  r.fingerprint = fingerprint(to_json(rc)["sim"]);
  return r;
}

EvalReport evaluate(const EnvConfig& env, const SacAgent& agent, const EvalOptions& opt,
                    std::string policy) {
  return summarize(evaluate_episodes(env, agent, opt), env, std::move(policy), opt.seed);
}

static const char* kReportHeader =
    "policy,scene,test_flow,phi,episodes,successes,collisions,timeouts,success_rate,"
    "collision_rate,timeout_rate,success_ci_low,success_ci_high,average_reward,"
    "average_return,average_speed,fingerprint,seed";

void write_reports_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << kReportHeader << '\n';
  for (const auto& r : reports) {
    out << r.policy << ',' << scene_name(r.scene) << ',' << traffic_mode_name(r.test_flow) << ','
        << fmt(r.phi) << ',' << r.episodes << ',' << r.successes << ',' << r.collisions << ','
        << r.timeouts << ',' << fmt(r.success_rate) << ',' << fmt(r.collision_rate) << ','
        << fmt(r.timeout_rate) << ',' << fmt(r.success_ci.low) << ',' << fmt(r.success_ci.high)
        << ',' << fmt(r.average_reward) << ',' << fmt(r.average_return) << ','
        << fmt(r.average_speed) << ',' << r.fingerprint << ',' << r.seed << '\n';
  }
}

std::vector<EvalReport> parse_reports_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw ConfigError("not an evaluation report table");
  }
  std::vector<EvalReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 18) throw ConfigError("report row has " + std::to_string(c.size()) + " cells");
    EvalReport r;
    r.policy = c[0];
    r.scene = parse_scene(c[1]);
    r.test_flow = parse_traffic_mode(c[2]);
    r.phi = std::stod(c[3]);
    r.episodes = std::stol(c[4]);
    r.successes = std::stol(c[5]);
    r.collisions = std::stol(c[6]);
    r.timeouts = std::stol(c[7]);
    r.success_rate = std::stod(c[8]);
    r.collision_rate = std::stod(c[9]);
    r.timeout_rate = std::stod(c[10]);
    r.success_ci = {std::stod(c[11]), std::stod(c[12])};
    r.average_reward = std::stod(c[13]);
    r.average_return = std::stod(c[14]);
    r.average_speed = std::stod(c[15]);
    r.fingerprint = c[16];
    r.seed = std::stoull(c[17]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_episodes_csv(std::ostream& out, const std::vector<EpisodeSummary>& eps) {
  out << "episode,seed,outcome,length,return,mean_speed\n";
  for (const auto& e : eps) {
    out << e.index << ',' << e.seed << ',' << outcome_name(e.outcome) << ',' << e.length << ','
        << fmt(e.ret) << ',' << fmt(e.length > 0 ? e.speed_sum / static_cast<double>(e.length) : 0.0)
        << '\n';
  }
}

// ------------------------------------------------------------ experiments

std::vector<TrainVariant> flow_variants(const RunConfig& cfg) {
  std::vector<TrainVariant> out;
  for (TrafficMode f : cfg.experiment.train_flows) {
    out.push_back({std::string(traffic_mode_name(f)), f, RandomizationSpec::full()});
  }
  return out;
}

std::vector<TrainVariant> ablation_variants(const RunConfig& cfg) {
  std::vector<std::string> names = cfg.experiment.ablations;
  if (names.empty()) {
    names = {"none", "all", "delta", "T", "a_max", "a_min", "v_max"};
    if (cfg.env.scene == Scene::kFreeway) {
      names.push_back("lcSpeedGain");
      names.push_back("lcAssertive");
    }
  }
  std::vector<TrainVariant> out;
  for (const auto& n : names) {
    if (n == "none") {
      out.push_back({"none", TrafficMode::kRuleBased, RandomizationSpec::none()});
    } else if (n == "all") {
      out.push_back({"all", TrafficMode::kRuleBasedRandomized, RandomizationSpec::full()});
    } else {
      const DriverParam p = parse_param(n);
      out.push_back({"no_" + std::string(param_name(p)), TrafficMode::kRuleBasedRandomized,
                     ablation_spec(RandomizationSpec::full(), n)});
    }
  }
  return out;
}

fs::path make_run_directory(const fs::path& base, const std::string& name,
                            const nlohmann::json& config, bool force) {
  const fs::path dir = base / (name + "-" + fingerprint(config));
  if (fs::exists(dir) && !force) {
    throw std::runtime_error("run directory " + dir.string() +
                             " already exists; pass --force to overwrite");
  }
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << config.dump(2) << '\n';
  std::ofstream env(dir / "env.txt");
  env << "compiler " << __VERSION__ << '\n'
      << "cplusplus " << __cplusplus << '\n'
      << "config_fingerprint " << fingerprint(config) << '\n';
  return dir;
}

EnvConfig variant_env(const RunConfig& cfg, const TrainVariant& v) {
  EnvConfig e = cfg.env;
  e.sim.traffic_mode = v.flow;
  e.sim.randomization = v.randomization;
  return e;
}

EnvConfig test_env(const RunConfig& cfg, TrafficMode flow, std::optional<double> phi) {
  EnvConfig e = cfg.env;
  e.sim.traffic_mode = flow;
  e.sim.randomization = RandomizationSpec::full();
  if (phi) {
    if (!(*phi > 0.0 && *phi <= 1.0)) {
      throw ConfigError("spawn probability must lie in (0, 1], got " + fmt(*phi));
    }
    e.sim.spawn_probability = *phi;
  }
  return e;
}

std::vector<TrainedPolicy> run_training(const RunConfig& cfg, const std::vector<TrainVariant>& variants,
                                        const fs::path& run_dir, const Progress& progress,
                                        bool reuse_existing) {
  fs::create_directories(run_dir / "checkpoints");
  fs::create_directories(run_dir / "curves");
  std::vector<TrainedPolicy> out;
  for (const auto& v : variants) {
    const EnvConfig env_cfg = variant_env(cfg, v);
    RunConfig cell = cfg;
    cell.env = env_cfg;
    for (std::uint64_t seed : cfg.experiment.seeds) {
      TrainedPolicy p;
      p.variant = v.label;
      p.seed = seed;
      p.label = v.label + "-s" + std::to_string(seed);
      nlohmann::json key = to_json(cell);
      key["train_seed"] = seed;
      const std::string fp = fingerprint(key);
      p.checkpoint = run_dir / "checkpoints" / (p.label + "-" + fp + ".ckpt");
      p.curve = run_dir / "curves" / (p.label + "-" + fp + ".csv");
      if (reuse_existing && fs::exists(p.checkpoint)) {
        if (progress) progress("reuse " + p.checkpoint.string());
        out.push_back(std::move(p));
        continue;
      }
      if (progress) progress("train " + p.label);

      auto factory = [&env_cfg]() -> std::unique_ptr<RlEnv> { return make_env(env_cfg); };
      const std::unique_ptr<Env> probe = make_env(env_cfg);
      SacAgent agent(probe->observation_dim(), probe->action_space(), probe->observation_scale(),
                     cfg.sac, seed);
      agent.set_dump_path(run_dir / (p.label + "-nonfinite-batch.csv"));
      TrainConfig tc;
      tc.budget = cfg.experiment.budget;
      tc.seed = seed;
      tc.eval_interval = cfg.experiment.eval_interval;
      tc.checkpoint_path = p.checkpoint;
      const TrainResult res = train(factory, agent, tc);
      std::ofstream curve(p.curve);
      write_curve_csv(curve, res.curve);
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<EvalReport> run_cross_eval(const RunConfig& cfg, const std::vector<TrainedPolicy>& policies,
                                       const Progress& progress) {
  std::vector<EvalReport> out;
  for (const auto& p : policies) {
    const SacAgent agent = SacAgent::load(p.checkpoint);
    for (TrafficMode flow : cfg.experiment.test_flows) {
      if (progress) progress("eval " + p.label + " on " + std::string(traffic_mode_name(flow)));
      EvalOptions opt;
      opt.episodes = cfg.experiment.eval_episodes;
      opt.seed = p.seed;
      out.push_back(evaluate(test_env(cfg, flow), agent, opt, p.label));
    }
  }
  return out;
}

std::vector<EvalReport> run_density_sweep(const RunConfig& cfg,
                                          const std::vector<TrainedPolicy>& policies,
                                          const std::vector<double>& phis,
                                          const Progress& progress) {
  for (double phi : phis) test_env(cfg, TrafficMode::kHighFidelity, phi);  // validate up front
  std::vector<EvalReport> out;
  for (const auto& p : policies) {
    const SacAgent agent = SacAgent::load(p.checkpoint);
    for (double phi : phis) {
      if (progress) progress("sweep " + p.label + " at phi " + fmt(phi));
      EvalOptions opt;
      opt.episodes = cfg.experiment.eval_episodes;
      opt.seed = p.seed;
      out.push_back(evaluate(test_env(cfg, TrafficMode::kHighFidelity, phi), agent, opt, p.label));
    }
  }
  return out;
}

}  // namespace drtraffic
