#include "csense/agent.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace csense {

namespace {

class UniformRandomPolicy final : public Policy {
 public:
  explicit UniformRandomPolicy(int n) : n_actions_((std::size_t{1} << n) - 1) {}
  ActionSet select(const Belief&, Rng& rng) override {
    return ActionSet::from_index(static_cast<int>(rng.next_index(n_actions_)));
  }

 private:
  std::size_t n_actions_;
};

class AllSensorsPolicy final : public Policy {
 public:
  explicit AllSensorsPolicy(int n) : action_(ActionSet::all(n)) {}
  ActionSet select(const Belief&, Rng&) override { return action_; }

 private:
  ActionSet action_;
};

class RoundRobinPolicy final : public Policy {
 public:
  explicit RoundRobinPolicy(int n) : n_(n) {}
  ActionSet select(const Belief&, Rng&) override {
    const auto a = ActionSet::single(next_);
    next_ = (next_ + 1) % n_;
    return a;
  }

 private:
  int n_;
  int next_ = 0;
};

class ActorPolicy final : public Policy {
 public:
  ActorPolicy(const Mlp& actor, ExploreMode mode) : actor_(actor), mode_(mode) {}
  ActionSet select(const Belief& belief, Rng& rng) override {
    return select_action(actor_, belief, mode_, rng);
  }

 private:
  const Mlp& actor_;
  ExploreMode mode_;
};

struct StepHook {
  virtual ~StepHook() = default;
  virtual void on_step(const Belief& previous, ActionSet action, const Belief& next,
                       double reward) = 0;
};

struct TdHook final : StepHook {
  Mlp& actor;
  Mlp& critic;
  double gamma;

  TdHook(Mlp& a, Mlp& c, double g) : actor(a), critic(c), gamma(g) {}

  void on_step(const Belief& previous, ActionSet action, const Belief& next,
               double reward) override {
    const double v_prev = critic.forward(previous.probs)[0];
    const double v_next = critic.forward(next.probs)[0];
    const double delta = td_error(reward, v_prev, v_next, gamma);
    critic_update(critic, previous, delta);
    actor_update(actor, previous, action, delta);
  }
};

EpisodeRecord episode_loop(Policy& policy, const Environment& env, const AgentConfig& cfg,
                           RngBundle& rng, StepHook* hook, bool record_beliefs) {
  const auto truth = sample_hypothesis(env.prior, rng.hypothesis);
  const auto truth_state = index_to_state(truth, env.prior.n);

  EpisodeRecord record;
  record.true_hypothesis = truth;

  Belief belief = belief_from_prior(env.prior);
  int k = 0;
  while (belief.max_prob() <= cfg.pi_upper && k < cfg.t_max) {
    const auto action = policy.select(belief, rng.exploration);
    const auto obs = sample_observation(truth_state, action, env.channel, rng.channel);
    auto next = update_posterior(belief, obs, env.channel);
    const double reward = instantaneous_reward(belief, next, action, env.reward);
    if (hook) hook->on_step(belief, action, next, reward);
    record.steps.push_back({action, obs, reward});
    if (record_beliefs) record.beliefs.push_back(next);
    belief = std::move(next);
    ++k;
  }

  record.declared = belief.argmax();
  if (belief.max_prob() > cfg.pi_upper) {
    record.terminated_by = Termination::Threshold;
    record.stop_step = k;
  } else {
    record.terminated_by = Termination::TMax;
  }
  return record;
}

}  // namespace

std::unique_ptr<Policy> baseline_policy(BaselineKind kind, int n) {
  if (n < 1) throw std::invalid_argument("baseline policy needs at least one process");
  switch (kind) {
    case BaselineKind::UniformRandom: return std::make_unique<UniformRandomPolicy>(n);
    case BaselineKind::AllSensors: return std::make_unique<AllSensorsPolicy>(n);
    case BaselineKind::RoundRobinSingle: return std::make_unique<RoundRobinPolicy>(n);
  }
  throw std::invalid_argument("unknown baseline kind");
}

std::unique_ptr<Policy> actor_policy(const Mlp& actor, ExploreMode mode) {
  return std::make_unique<ActorPolicy>(actor, mode);
}

ActionSet argmax_action(std::span<const double> action_probs) {
  if (action_probs.empty()) throw std::invalid_argument("no action probabilities");
  std::size_t best = 0;
  for (std::size_t i = 1; i < action_probs.size(); ++i)
    if (action_probs[i] > action_probs[best]) best = i;
  return ActionSet::from_index(static_cast<int>(best));
}

ActionSet select_action(const Mlp& actor, const Belief& belief, ExploreMode mode, Rng& rng) {
  const auto probs = actor.forward(belief.probs);
  if (mode == ExploreMode::Argmax) return argmax_action(probs);
  return ActionSet::from_index(static_cast<int>(rng.next_categorical(probs)));
}

double td_error(double reward, double v_prev, double v_next, double gamma) {
  return reward + gamma * v_next - v_prev;
}

void critic_update(Mlp& critic, const Belief& previous, double delta) {
  const auto trace = critic.forward_trace(previous.probs);
  const double upstream[1] = {delta};
  critic.apply_step(critic.backward(trace, upstream), +1.0);
}

void actor_update(Mlp& actor, const Belief& previous, ActionSet action, double delta) {
  const auto trace = actor.forward_trace(previous.probs);
  auto grads = actor.log_prob_gradient(trace, action.index());
  grads.scale(delta);
  actor.apply_step(grads, +1.0);
}

double EpisodeRecord::total_reward() const {
  double sum = 0.0;
  for (const auto& s : steps) sum += s.reward;
  return sum;
}

RngBundle make_bundle(std::uint64_t master, Stream hyp, Stream chan, Stream explore,
                      std::uint64_t salt) {
  return RngBundle{make_stream(master, hyp, salt), make_stream(master, chan, salt),
                   make_stream(master, explore, salt)};
}

EpisodeRecord run_policy_episode(Policy& policy, const Environment& env, const AgentConfig& cfg,
                                 RngBundle& rng, bool record_beliefs) {
  return episode_loop(policy, env, cfg, rng, nullptr, record_beliefs);
}

EpisodeRecord run_episode(Mlp& actor, Mlp& critic, const Environment& env, const AgentConfig& cfg,
                          bool learn, RngBundle& rng, bool record_beliefs) {
  ActorPolicy policy(actor, cfg.explore_mode);
  if (!learn) return episode_loop(policy, env, cfg, rng, nullptr, record_beliefs);
  TdHook hook(actor, critic, cfg.gamma);
  return episode_loop(policy, env, cfg, rng, &hook, record_beliefs);
}

EpisodeRecord run_episode_with_policy(Policy& policy, Mlp& actor, Mlp& critic,
                                      const Environment& env, const AgentConfig& cfg,
                                      RngBundle& rng, bool record_beliefs) {
  TdHook hook(actor, critic, cfg.gamma);
  return episode_loop(policy, env, cfg, rng, &hook, record_beliefs);
}

std::pair<Mlp, Mlp> make_actor_critic(int n, std::span<const int> hidden_widths, double actor_lr,
                                      double critic_lr, std::uint64_t master_seed) {
  const int in = 1 << n;
  const int n_actions = (1 << n) - 1;

  auto specs = [&](int out, Activation head) {
    std::vector<LayerSpec> s;
    int prev = in;
    for (int w : hidden_widths) {
      if (w < 1) throw std::invalid_argument("hidden widths must be positive");
      s.push_back({prev, w, Activation::Rectifier});
      prev = w;
    }
    s.push_back({prev, out, head});
    return s;
  };

  auto actor_rng = make_stream(master_seed, Stream::ActorInit);
  auto critic_rng = make_stream(master_seed, Stream::CriticInit);
  Mlp actor(specs(n_actions, Activation::Softmax), actor_lr, actor_rng);
  Mlp critic(specs(1, Activation::Identity), critic_lr, critic_rng);
  return {std::move(actor), std::move(critic)};
}

TrainResult train(const Environment& env, const AgentConfig& cfg, const TrainOptions& options,
                  std::uint64_t master_seed) {
  if (options.episodes < 0) throw std::invalid_argument("episode count must be nonnegative");
  if (options.slots_per_episode < 1)
    throw std::invalid_argument("training horizon must be at least one slot");

  auto [actor, critic] = make_actor_critic(env.prior.n, options.hidden_widths, cfg.actor_lr,
                                           cfg.critic_lr, master_seed);
  TrainResult result{std::move(actor), std::move(critic), {}};
  result.log.reserve(static_cast<std::size_t>(options.episodes));

  auto rng = make_bundle(master_seed, Stream::TrainHypothesis, Stream::TrainChannel,
                         Stream::TrainExploration);
  AgentConfig train_cfg = cfg;
  train_cfg.t_max = options.slots_per_episode;

  for (int ep = 0; ep < options.episodes; ++ep) {
    EpisodeRecord record;
    try {
      record = run_episode(result.actor, result.critic, env, train_cfg, /*learn=*/true, rng,
                           /*record_beliefs=*/false);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("training diverged at episode " + std::to_string(ep) + ": " +
                               e.what());
    }
    if (!result.actor.parameters_finite() || !result.critic.parameters_finite())
      throw std::runtime_error("training diverged at episode " + std::to_string(ep) +
                               ": non-finite network parameters");
    result.log.push_back({ep, record.stop_step.value_or(-1), record.correct(),
                          static_cast<int>(record.steps.size()), record.total_reward()});
  }
  return result;
}

}  // namespace csense
