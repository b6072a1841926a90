// Acceptance checks. Prints one PASS/FAIL line per criterion; the exit code
// is non-zero if any selected criterion fails. Tolerances are pinned here.

#include <CLI11.hpp>

#include <signal.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "drtraffic/config.hpp"
#include "drtraffic/freeway_env.hpp"
#include "drtraffic/frenet.hpp"
#include "drtraffic/harness.hpp"
#include "drtraffic/idm.hpp"
#include "drtraffic/merging_env.hpp"
#include "drtraffic/protocol.hpp"
#include "drtraffic/randomization.hpp"
#include "drtraffic/sac.hpp"
#include "drtraffic/toy_env.hpp"
#include "drtraffic/train.hpp"
#include "drtraffic/world.hpp"
#include "frenet_oracle.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "reward_oracle.hpp"
#include "socket_client.hpp"

using namespace drtraffic;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances ------------------------------------------------------
constexpr double kIdmRelTol = 1e-12;
constexpr double kPlatoonGapTol = 0.05;
constexpr double kMeanRelTol = 0.005;
constexpr double kSigmaRelTol = 0.02;
constexpr double kInIntervalMin = 0.9963;
constexpr double kResidualTol = 1e-9;
constexpr double kQuinticCoeffTol = 1e-12;
constexpr double kRewardTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr double kToyOptimumFraction = 0.95;
constexpr long kToyBudget = 20'000;
constexpr double kMergeGapMin = 0.10;
constexpr double kDensityDropMax = 0.03;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1: car following -------------------------------------------------------
Verdict criterion1() {
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    IdmParams p;
    p.a_max = 1.5 + 2.0 * u(gen);
    p.b = 2.0 + 3.0 * u(gen);
    p.v0 = 5.0 + 15.0 * u(gen);
    p.delta = 3.5 + u(gen);
    p.T = 0.5 + u(gen);
    const double v = 20.0 * u(gen), vl = 20.0 * u(gen), gap = 0.5 + 100.0 * u(gen);
    const double want = oracle::idm(v, vl, gap, p.v0, p.T, p.a_max, p.b, p.delta, p.s0);
    const double got = idm_accel_raw(p, v, gap, vl);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }

  // Ten-vehicle platoon in the simulator behind a leader cruising at 6 m/s.
  SimConfig sim;
  sim.spawn_probability = 0.0;
  GeometryOverrides geo;
  geo.lane_length = 1e6;
  World w(build_network(RoadKind::kMerging, geo), sim);
  std::vector<int> ids;
  double s = 2000.0;
  for (int i = 0; i < 10; ++i) {
    VehicleState veh;
    veh.lane = 0;
    veh.s = s;
    veh.v = 6.0;
    if (i == 0) veh.params.idm.v0 = 6.0;
    ids.push_back(w.add_vehicle(veh));
    s -= 5.0 + 10.0 + 4.0 * (i % 3);
  }
  for (int k = 0; k < 6000; ++k) w.step();
  // Oracle equilibrium: bisection on the direct formula at dv = 0.
  const IdmParams d;
  const double v_lead = w.find(ids[0])->v;
  double lo = d.s0, hi = 500.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (oracle::idm(v_lead, v_lead, mid, d.v0, d.T, d.a_max, d.b, d.delta, d.s0) < 0 ? lo : hi) = mid;
  }
  const double g_star = 0.5 * (lo + hi);
  double worst_gap = 0.0;
  for (int i = 1; i < 10; ++i) {
    const VehicleState* a = w.find(ids[i - 1]);
    const VehicleState* b = w.find(ids[i]);
    worst_gap = std::max(worst_gap, std::abs((a->rear() - b->s) - g_star) / g_star);
  }
  Verdict o;
  o.pass = worst <= kIdmRelTol && worst_gap <= kPlatoonGapTol;
  o.detail = "max rel err " + fmt("%.3g", worst) + ", platoon gap deviation " +
             fmt("%.3g", worst_gap) + " (gap* " + fmt("%.4f", g_star) + " m)";
  return o;
}

// ---- 2: parameter randomization ---------------------------------------------
Verdict criterion2() {
  const RandomizationSpec spec = RandomizationSpec::full();
  const int n = 1'000'000;
  RngStream rng(7, StreamId::kParams);
  std::array<double, kDriverParamCount> sum{}, sq{};
  std::array<long, kDriverParamCount> inside{};
  for (int i = 0; i < n; ++i) {
    const auto raw = draw_unclipped(spec, rng);
    for (std::size_t k = 0; k < kDriverParamCount; ++k) {
      const ParamRange& r = spec.ranges[k];
      const double x = std::clamp(raw[k], r.s_min, r.s_max);
      sum[k] += x;
      sq[k] += x * x;
      inside[k] += raw[k] >= r.s_min && raw[k] <= r.s_max;
    }
  }
  Verdict o{true, ""};
  for (std::size_t k = 0; k < kDriverParamCount; ++k) {
    const ParamRange& r = spec.ranges[k];
    const double mean = sum[k] / n;
    const double sd = std::sqrt(std::max(0.0, sq[k] / n - mean * mean));
    const double mean_err = std::abs(mean - r.mean()) / std::max(std::abs(r.mean()), 1e-12);
    const double sd_err = std::abs(sd - r.sigma()) / r.sigma();
    const double frac = static_cast<double>(inside[k]) / n;
    const bool ok = mean_err <= kMeanRelTol && sd_err <= kSigmaRelTol && frac >= kInIntervalMin;
    o.pass = o.pass && ok;
    o.detail += std::string(param_name(static_cast<DriverParam>(k))) + "[" +
                fmt("mean %.2e", mean_err) + fmt(" sd %.2e", sd_err) + fmt(" in %.5f", frac) +
                "] ";
  }
  return o;
}

// ---- 3: planner -------------------------------------------------------------
Verdict criterion3() {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double T = 0.5 + 4.75 * (u(gen) + 1.0);
    const std::array<double, 3> a{4 * u(gen), 2 * u(gen), u(gen)}, b{4 * u(gen), 2 * u(gen), u(gen)};
    const QuinticPoly q = solve_lateral_quintic(a, b, T);
    worst = std::max({worst, std::abs(q.value(0) - a[0]), std::abs(q.d1(0) - a[1]),
                      std::abs(q.d2(0) - a[2]), std::abs(q.value(T) - b[0]),
                      std::abs(q.d1(T) - b[1]), std::abs(q.d2(T) - b[2])});
    const std::array<double, 3> sa{100 * u(gen), 8 + 8 * u(gen), u(gen)};
    const std::array<double, 2> sb{8 + 8 * u(gen), u(gen)};
    const QuarticPoly l = solve_longitudinal_quartic(sa, sb, T);
    worst = std::max({worst, std::abs(l.value(0) - sa[0]), std::abs(l.d1(0) - sa[1]),
                      std::abs(l.d2(0) - sa[2]), std::abs(l.d1(T) - sb[0]),
                      std::abs(l.d2(T) - sb[1])});
  }

  std::uniform_real_distribution<double> v(0.0, 1.0);
  const PlannerConfig cfg;
  int agree = 0, with_choice = 0;
  for (int scene = 0; scene < 100; ++scene) {
    PlanRequest req;
    req.current.s = 100 * v(gen);
    req.current.s_d = 3 + 9 * v(gen);
    req.current.s_dd = v(gen) - 0.5;
    req.current.d = 6.4 * v(gen);
    req.current.d_d = 0.3 * (v(gen) - 0.5);
    req.lane_centers = {1.6, 4.8};
    req.ref_d = req.lane_centers[gen() % 2];
    req.ref_speed = 4 + 8 * v(gen);
    const int n_obs = static_cast<int>(gen() % 5);
    for (int k = 0; k < n_obs; ++k) {
      req.obstacles.push_back({req.current.s - 30 + 80 * v(gen), 3 + 10 * v(gen),
                               req.lane_centers[gen() % 2], 5.0});
    }
    const auto want = oracle::argmin(req, cfg);
    const PlanResult got = plan_fan(req, cfg);
    agree += want == got.best;
    with_choice += want.has_value();
  }

  const QuinticPoly rest = solve_lateral_quintic({0, 0, 0}, {1, 0, 0}, 1.0);
  const double expect[6] = {0, 0, 0, 10, -15, 6};
  double coeff_err = 0.0;
  for (int i = 0; i < 6; ++i) coeff_err = std::max(coeff_err, std::abs(rest.c[i] - expect[i]));

  Verdict o;
  o.pass = worst < kResidualTol && agree == 100 && coeff_err <= kQuinticCoeffTol;
  o.detail = "max residual " + fmt("%.3g", worst) + ", argmin agreement " + std::to_string(agree) +
             "/100 (" + std::to_string(with_choice) + " with a feasible choice), rest-to-rest coeff err " +
             fmt("%.3g", coeff_err);
  return o;
}

// ---- 4: rewards -------------------------------------------------------------
double term_error(const StepResult& r, const std::map<std::string, double>& want, bool& names_ok) {
  double worst = 0.0;
  double sum = 0.0;
  for (const auto& t : r.reward_terms) {
    const auto it = want.find(t.name);
    if (it == want.end()) {
      names_ok = false;
      continue;
    }
    worst = std::max(worst, std::abs(t.value - it->second));
    sum += t.value;
  }
  if (r.reward_terms.size() != want.size()) names_ok = false;
  return std::max(worst, std::abs(sum - r.reward));
}

Verdict criterion4() {
  double worst = 0.0;
  bool names_ok = true;
  int merging_steps = 0, freeway_steps = 0;

  MergingEnv m(EnvConfig::merging_defaults());
  for (std::uint64_t seed = 100; merging_steps < 50; ++seed) {
    auto obs = m.reset(seed);
    for (int k = 0; k < 25 && !m.done() && merging_steps < 50; ++k) {
      const double a = -3.0 + 5.0 * std::fmod(0.37 * k + 0.11 * static_cast<double>(seed), 1.0);
      const double prev = obs[6];
      const StepResult r = m.step({{a}, 0});
      obs = r.observation;
      oracle::MergeInputs in{obs[2], obs[3], obs[4], obs[5], obs[6], obs[7], obs[8], prev, false, 0.0,
                             r.outcome == drtraffic::Outcome::kCollision,
                             r.outcome == drtraffic::Outcome::kSuccess};
      for (const auto& veh : m.world().vehicles()) {
        if (veh.lane == 0 && veh.controller != Controller::kAgent && veh.s - 300.0 == obs[7]) {
          in.a_f1 = veh.a;
          in.f1_brakes_in_zone = veh.a < 0.0 && veh.s >= 200.0 && veh.s <= 400.0;
        }
      }
      worst = std::max(worst, term_error(r, oracle::merging_terms(in), names_ok));
      ++merging_steps;
    }
  }

  FreewayEnv f(EnvConfig::freeway_defaults());
  for (std::uint64_t seed = 200; freeway_steps < 50; ++seed) {
    auto obs = f.reset(seed);
    for (int k = 0; k < 25 && !f.done() && freeway_steps < 50; ++k) {
      const double a = -4.0 + 6.0 * std::fmod(0.29 * k + 0.13 * static_cast<double>(seed), 1.0);
      const int lc = k % 7 == 3 ? 1 : 0;
      const double prev = obs[9];
      const StepResult r = f.step({{a}, lc});
      obs = r.observation;
      const bool collision = r.outcome == drtraffic::Outcome::kCollision;
      // On a collision step the ego overlaps its leader; the observed gap is
      // clamped at 0 while the reward reads the signed gap.
      if (collision) continue;
      oracle::FreewayInputs in{obs[0], obs[8], std::clamp(a, -4.5, 2.6), prev, lc == 1, collision};
      worst = std::max(worst, term_error(r, oracle::freeway_terms(in), names_ok));
      ++freeway_steps;
    }
  }
  Verdict o;
  o.pass = names_ok && worst <= kRewardTol;
  o.detail = std::to_string(merging_steps) + " merging + " + std::to_string(freeway_steps) +
             " freeway steps, max per-term error " + fmt("%.3g", worst) +
             (names_ok ? "" : ", term names mismatch");
  return o;
}

// ---- 5: learner -------------------------------------------------------------
double toy_optimum(double x0) {
  double x = x0, ret = 0.0;
  for (int t = 0; t < ToyRegulatorEnv::kHorizon; ++t) {
    x += ToyRegulatorEnv::kGain * std::clamp(-x / ToyRegulatorEnv::kGain, -1.0, 1.0);
    ret += 1.0 - x * x;
  }
  return ret;
}

Verdict criterion5() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto e = gradcheck::check_instance(1000 + seed, false);
    worst = std::max({worst, e.critic, e.actor, e.mlp_input});
  }
  SacHyper h = RunConfig::defaults(Scene::kMerging).sac;
  h.target_entropy.reset();
  SacAgent agent(1, {{-1.0}, {1.0}, 0}, {1.0}, h, 0);
  TrainConfig tc;
  tc.budget = kToyBudget;
  tc.seed = 0;
  train([] { return std::make_unique<ToyRegulatorEnv>(); }, agent, tc);
  ToyRegulatorEnv env;
  double got = 0.0, best = 0.0;
  for (double x0 : {-1.0, -0.5, 0.5, 1.0}) {
    env.pin_start(x0);
    got += run_episode(env, agent, 0).ret;
    best += toy_optimum(x0);
  }
  Verdict o;
  o.pass = worst < kGradRelTol && got >= kToyOptimumFraction * best;
  o.detail = "max gradient rel err " + fmt("%.3g", worst) + " over 200 instances; toy return " +
             fmt("%.3f", got) + " vs optimum " + fmt("%.3f", best) + " (" +
             fmt("%.2f%%", 100.0 * got / best) + ")";
  return o;
}

// ---- 6/7: experiments ------------------------------------------------------
struct Pooled {
  long k = 0, n = 0;
  double rate() const { return n ? static_cast<double>(k) / n : 0.0; }
};

struct ExperimentArgs {
  fs::path work;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  long merging_budget = 0;  // 0 = desk default
  long freeway_budget = 0;
  int episodes = 500;
  bool reuse = true;
  fs::path config;
};

RunConfig experiment_config(Scene scene, const ExperimentArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig::defaults(scene) : load_config(a.config);
  if (cfg.env.scene != scene) cfg = RunConfig::defaults(scene);
  cfg.experiment.seeds = a.seeds;
  cfg.experiment.eval_episodes = a.episodes;
  const long budget = scene == Scene::kMerging ? a.merging_budget : a.freeway_budget;
  if (budget > 0) cfg.experiment.budget = budget;
  return cfg;
}

std::vector<TrainVariant> rand_vs_norand(const RunConfig& cfg) {
  std::vector<TrainVariant> out;
  for (const auto& v : flow_variants(cfg)) {
    if (v.flow == TrafficMode::kRuleBased || v.flow == TrafficMode::kRuleBasedRandomized)
      out.push_back(v);
  }
  return out;
}

auto logger() {
  return [](const std::string& msg) { std::cerr << "  [acceptance] " << msg << std::endl; };
}

Verdict criterion6(const ExperimentArgs& a) {
  const RunConfig cfg = experiment_config(Scene::kMerging, a);
  const auto policies = run_training(cfg, rand_vs_norand(cfg), a.work / "merging", logger(), a.reuse);
  std::map<std::string, Pooled> pooled;
  const EnvConfig test = test_env(cfg, TrafficMode::kRuleBasedRandomized);
  for (const auto& p : policies) {
    const SacAgent agent = SacAgent::load(p.checkpoint);
    EvalOptions opt;
    opt.episodes = cfg.experiment.eval_episodes;
    opt.seed = p.seed;
    const EvalReport r = evaluate(test, agent, opt, p.label);
    std::cerr << "  [acceptance] " << p.label << " success " << r.successes << "/" << r.episodes
              << " collisions " << r.collisions << std::endl;
    pooled[p.variant].k += r.successes;
    pooled[p.variant].n += r.episodes;
  }
  const Pooled& rnd = pooled["randomized"];
  const Pooled& base = pooled["rule_based"];
  const WilsonInterval ci_r = wilson_interval(rnd.k, rnd.n);
  const WilsonInterval ci_b = wilson_interval(base.k, base.n);
  const double gap = rnd.rate() - base.rate();
  Verdict o;
  o.pass = gap >= kMergeGapMin && ci_r.low > ci_b.high;
  o.detail = "randomized-trained " + fmt("%.1f%%", 100 * rnd.rate()) + " [" +
             fmt("%.1f", 100 * ci_r.low) + "," + fmt("%.1f", 100 * ci_r.high) + "] vs rule-based " +
             fmt("%.1f%%", 100 * base.rate()) + " [" + fmt("%.1f", 100 * ci_b.low) + "," +
             fmt("%.1f", 100 * ci_b.high) + "], gap " + fmt("%+.1f pts", 100 * gap) +
             " (budget " + std::to_string(cfg.experiment.budget) + ", " +
             std::to_string(a.seeds.size()) + " seeds, " + std::to_string(a.episodes) + " episodes each)";
  return o;
}

Verdict criterion7(const ExperimentArgs& a) {
  const RunConfig cfg = experiment_config(Scene::kFreeway, a);
  const auto policies = run_training(cfg, rand_vs_norand(cfg), a.work / "freeway", logger(), a.reuse);
  const std::vector<double> phis = default_phi_grid(Scene::kFreeway);
  const auto reports = run_density_sweep(cfg, policies, phis, logger());
  std::map<std::string, std::map<double, Pooled>> pooled;
  std::map<std::string, std::string> variant_of;
  for (const auto& p : policies) variant_of[p.label] = p.variant;
  for (const auto& r : reports) {
    Pooled& c = pooled[variant_of[r.policy]][r.phi];
    c.k += r.successes;
    c.n += r.episodes;
  }
  const auto drop = [&](const std::string& v) {
    return pooled[v][phis.front()].rate() - pooled[v][phis.back()].rate();
  };
  const double d_rand = drop("randomized");
  const double d_base = drop("rule_based");
  std::string table;
  for (const auto& [v, byphi] : pooled) {
    table += v + ":";
    for (const auto& [phi, c] : byphi) table += fmt(" %.2f=", phi) + fmt("%.1f%%", 100 * c.rate());
    table += "; ";
  }
  Verdict o;
  o.pass = d_rand < kDensityDropMax && d_base > d_rand;
  o.detail = table + "drop randomized " + fmt("%.1f pts", 100 * d_rand) + ", rule-based " +
             fmt("%.1f pts", 100 * d_base);
  return o;
}

// ---- 8/9: CLI ----------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> outputs_under(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".jsonl"))
      out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

Verdict criterion8(const fs::path& cli, const fs::path& work) {
  const fs::path dir = work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const RunConfig cfg = RunConfig::defaults(Scene::kMerging);
  const fs::path ckpt = dir / "policy.ckpt";
  SacAgent(kMergingObsDim, ActionSpace{{cfg.env.accel_low}, {cfg.env.accel_high}, 0},
           MergingEnv(cfg.env).observation_scale(), cfg.sac, 11)
      .save(ckpt);
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"a", "b"}) {
    const std::string cmd = "\"" + cli.string() + "\" eval --scene merging --checkpoint \"" +
                            ckpt.string() + "\" --flow randomized --episodes 8 --seed 5 --trace --out \"" +
                            (dir / name).string() + "\" > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, std::string("eval run ") + name + " failed"};
    runs.push_back(outputs_under(dir / name));
  }
  std::set<std::string> kinds;
  for (const auto& [name, _] : runs[0]) kinds.insert(fs::path(name).extension().string());
  const bool same = runs[0] == runs[1];
  Verdict o;
  o.pass = same && kinds.count(".csv") && kinds.count(".jsonl");
  std::size_t bytes = 0;
  for (const auto& [_, body] : runs[0]) bytes += body.size();
  o.detail = std::to_string(runs[0].size()) + " output files, " + std::to_string(bytes) +
             " bytes, " + (same ? "byte-identical" : "DIFFERENT");
  return o;
}

std::vector<std::string> session(int port, const std::string& reset_cmd, int steps) {
  client::LineClient c(port);
  std::vector<std::string> t{c.read_line()};
  // HELLO drtraffic 1 <scene> <obs_dim> <continuous_dim> <discrete_count>
  std::istringstream hello(t[0]);
  std::string tok;
  int discrete = 0;
  for (int i = 0; i < 7 && hello >> tok; ++i) discrete = i == 6 ? std::stoi(tok) : discrete;
  t.push_back(c.request(reset_cmd));
  for (int i = 0; i < steps; ++i) {
    std::string cmd = "step " + format_real(0.5 * std::sin(i));
    if (discrete > 0) cmd += i % 9 == 4 ? " 1" : " 0";
    const std::string r = c.request(cmd);
    t.push_back(r);
    std::istringstream in(r);
    std::string tag, reward, done;
    in >> tag >> reward >> done;
    if (tag != "STEP" || done == "1") break;
  }
  t.push_back(c.request("close"));
  return t;
}

std::size_t frame_dim(const std::string& obs_frame) {
  std::istringstream in(obs_frame);
  std::string tag;
  std::size_t dim = 0;
  in >> tag >> dim;
  std::size_t count = 0;
  double x;
  while (in >> x) ++count;
  return count == dim ? dim : 0;
}

Verdict criterion9(const fs::path& cli) {
  Verdict o{true, ""};
  for (const auto& [scene, dim] : std::vector<std::pair<std::string, std::size_t>>{{"merging", 11}, {"freeway", 10}}) {
    // The shell reports its pid and then becomes the server, so a failed
    // session can still shut the server down.
    const std::string cmd = "echo $$; exec \"" + cli.string() + "\" serve --scene " + scene +
                            " --port 0 --max-sessions 2";
    FILE* proc = ::popen(cmd.c_str(), "r");
    if (!proc) return {false, "cannot start server"};
    char line[256] = {0};
    int port = 0;
    pid_t pid = 0;
    if (std::fgets(line, sizeof line, proc)) pid = static_cast<pid_t>(std::atol(line));
    while (std::fgets(line, sizeof line, proc)) {
      if (std::sscanf(line, "listening 127.0.0.1:%d", &port) == 1) break;
    }
    const auto abort_server = [&](const std::string& why) {
      if (pid > 0) ::kill(pid, SIGTERM);
      ::pclose(proc);
      return Verdict{false, o.detail + scene + ": " + why};
    };
    if (port == 0) return abort_server("server did not report a port");
    std::vector<std::string> t1, t2;
    try {
      t1 = session(port, "reset 21", 40);
      t2 = session(port, "reset 21", 40);
    } catch (const std::exception& e) {
      return abort_server(e.what());
    }
    const int status = ::pclose(proc);
    const bool ok = t1 == t2 && frame_dim(t1[1]) == dim && t1.back() == "BYE" && status == 0;
    o.pass = o.pass && ok;
    o.detail += scene + ": obs dim " + std::to_string(frame_dim(t1[1])) + ", " +
                std::to_string(t1.size()) + " frames, " + (t1 == t2 ? "identical" : "DIFFERENT") + "; ";
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drtraffic acceptance checks"};
  std::vector<int> criteria;
  fs::path cli;
  ExperimentArgs ex;
  ex.work = "acceptance-work";
  bool fresh = false;
  app.add_option("--criteria", criteria, "criteria to run (default: 1-5, 8, 9)")->delimiter(',');
  app.add_option("--cli", cli, "path to the drtraffic command-line binary");
  app.add_option("--work-dir", ex.work, "directory for checkpoints and CLI outputs");
  app.add_option("--seeds", ex.seeds, "training seeds for criteria 6 and 7")->delimiter(',');
  app.add_option("--episodes", ex.episodes, "evaluation episodes per policy for criteria 6 and 7");
  app.add_option("--merging-budget", ex.merging_budget, "override the merging training budget");
  app.add_option("--freeway-budget", ex.freeway_budget, "override the freeway training budget");
  app.add_option("--config", ex.config, "config file for criteria 6 and 7");
  app.add_flag("--fresh", fresh, "retrain even when a matching checkpoint exists");
  CLI11_PARSE(app, argc, argv);
  ex.reuse = !fresh;
  if (criteria.empty()) criteria = {1, 2, 3, 4, 5, 8, 9};
  fs::create_directories(ex.work);

  int failures = 0;
  for (int c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict o;
    try {
      switch (c) {
        case 1: o = criterion1(); break;
        case 2: o = criterion2(); break;
        case 3: o = criterion3(); break;
        case 4: o = criterion4(); break;
        case 5: o = criterion5(); break;
        case 6: o = criterion6(ex); break;
        case 7: o = criterion7(ex); break;
        case 8: o = criterion8(cli, ex.work); break;
        case 9: o = criterion9(cli); break;
        default: o = {false, "unknown criterion"};
      }
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("CRITERION %d %s (%.1fs): %s\n", c, o.pass ? "PASS" : "FAIL", seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
