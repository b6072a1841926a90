#include "drtraffic/train.hpp"

#include <iomanip>
#include <ostream>

namespace drtraffic {

namespace {
constexpr std::uint64_t kEvalSalt = 0x65766131ULL;
}

std::uint64_t train_episode_seed(std::uint64_t seed, long i) {
  return mix_seed(seed, static_cast<std::uint64_t>(i));
}

std::uint64_t eval_episode_seed(std::uint64_t seed, long i) {
  return mix_seed(seed ^ kEvalSalt, static_cast<std::uint64_t>(i));
}

EpisodeRecord run_episode(RlEnv& env, const SacAgent& agent, std::uint64_t seed) {
  RngStream unused(seed, StreamId::kPolicy);
  EpisodeRecord rec;
  std::vector<double> obs = env.reset(seed);
  StepResult r;
  do {
    r = env.step(agent.act(obs, true, unused).env);
    rec.ret += r.reward;
    ++rec.length;
    obs = std::move(r.observation);
  } while (!r.done);
  rec.outcome = r.outcome;
  return rec;
}

TrainResult train(const EnvFactory& factory, SacAgent& agent, const TrainConfig& cfg) {
  TrainResult res;
  const SacHyper& h = agent.hyper();
  std::unique_ptr<RlEnv> env = factory();
  std::unique_ptr<RlEnv> eval_env;
  ReplayBuffer buffer(h.buffer_capacity);
  RngStream policy_rng(cfg.seed, StreamId::kPolicy);
  RngStream replay_rng(cfg.seed, StreamId::kReplay);
  RngStream update_rng(cfg.seed, StreamId::kUpdate);

  try {
    long episode = 0;
    std::vector<double> obs = env->reset(train_episode_seed(cfg.seed, episode));
    EpisodeRecord current;
    for (long t = 1; t <= cfg.budget; ++t) {
      const PolicyAction pa =
          t <= h.warmup_steps ? agent.random_action(policy_rng) : agent.act(obs, false, policy_rng);
      StepResult r = env->step(pa.env);
      current.ret += r.reward;
      ++current.length;

      Transition tr;
      tr.state = agent.normalize(obs);
      tr.action.assign(pa.unit.data(), pa.unit.data() + pa.unit.size());
      tr.discrete = pa.env.discrete;
      tr.reward = r.reward;
      tr.next_state = agent.normalize(r.observation);
      tr.done = r.outcome == Outcome::kCollision || r.outcome == Outcome::kSuccess;
      buffer.push(std::move(tr));
      obs = std::move(r.observation);
      res.env_steps = t;

      if (t > h.warmup_steps) {
        for (int u = 0; u < h.updates_per_step; ++u) {
          res.last = agent.update(buffer.sample(static_cast<std::size_t>(h.batch_size), replay_rng),
                                  update_rng);
          ++res.updates;
        }
      }

      if (r.done) {
        current.episode = episode;
        current.end_step = t;
        current.outcome = r.outcome;
        res.curve.push_back(current);
        if (cfg.on_episode) cfg.on_episode(episode, current.ret);
        current = {};
        ++episode;
        obs = env->reset(train_episode_seed(cfg.seed, episode));
      }

      if (cfg.eval_interval > 0 && t % cfg.eval_interval == 0) {
        if (!eval_env) eval_env = factory();
        EvalPoint p;
        p.step = t;
        for (int e = 0; e < cfg.eval_episodes; ++e) {
          const EpisodeRecord rec = run_episode(*eval_env, agent, eval_episode_seed(cfg.seed, e));
          p.mean_return += rec.ret / cfg.eval_episodes;
          if (rec.outcome == Outcome::kSuccess) p.success_rate += 1.0 / cfg.eval_episodes;
        }
        res.evals.push_back(p);
      }
    }
  } catch (...) {
    if (!cfg.checkpoint_path.empty()) {
      auto aborted = cfg.checkpoint_path;
      aborted += ".aborted";
      agent.save(aborted);
    }
    throw;
  }
  if (!cfg.checkpoint_path.empty()) agent.save(cfg.checkpoint_path);
  return res;
}

void write_curve_csv(std::ostream& out, const std::vector<EpisodeRecord>& curve) {
  out << "episode,end_step,length,return,outcome\n" << std::setprecision(17);
  for (const auto& r : curve) {
    out << r.episode << ',' << r.end_step << ',' << r.length << ',' << r.ret << ','
        << outcome_name(r.outcome) << '\n';
  }
}

}  // namespace drtraffic
