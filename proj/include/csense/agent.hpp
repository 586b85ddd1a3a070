#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "csense/belief.hpp"
#include "csense/channel.hpp"
#include "csense/hypothesis.hpp"
#include "csense/mlp.hpp"
#include "csense/rng.hpp"

namespace csense {

enum class ExploreMode { Sample, Argmax };

struct AgentConfig {
  double gamma = 0.9;
  double actor_lr = 0.0005;
  double critic_lr = 0.005;
  double pi_upper = 0.99;  // declare as soon as some posterior entry exceeds this
  int t_max = 300;         // hard episode cap in slots
  ExploreMode explore_mode = ExploreMode::Sample;
};

struct Environment {
  PriorModel prior;
  ChannelParams channel;
  RewardParams reward;
};

// Sensor-selection rule: belief in, probe set out. May be stochastic through
// the provided stream and may carry per-episode state (round robin does).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual ActionSet select(const Belief& belief, Rng& rng) = 0;
};

enum class BaselineKind { UniformRandom, AllSensors, RoundRobinSingle };

std::unique_ptr<Policy> baseline_policy(BaselineKind kind, int n);

// Wraps a trained actor as a Policy; the network is not modified.
std::unique_ptr<Policy> actor_policy(const Mlp& actor, ExploreMode mode);

// Highest-probability action; ties go to the lowest mask. The choice depends
// only on the ordering of the entries, never on their scale.
ActionSet argmax_action(std::span<const double> action_probs);

ActionSet select_action(const Mlp& actor, const Belief& belief, ExploreMode mode, Rng& rng);

// One-step temporal-difference error with the next belief's value bootstrapped
// in, also on the final step of an episode.
double td_error(double reward, double v_prev, double v_next, double gamma);

// Semi-gradient value step: parameters move by +critic_lr * delta * dV(prev).
void critic_update(Mlp& critic, const Belief& previous, double delta);

// Score-function policy step: parameters move by
// +actor_lr * delta * d log pi(action | prev).
void actor_update(Mlp& actor, const Belief& previous, ActionSet action, double delta);

struct StepRecord {
  ActionSet action;
  Observation observation;
  double reward;

  bool operator==(const StepRecord&) const = default;
};

enum class Termination { Threshold, TMax };

struct EpisodeRecord {
  std::uint32_t true_hypothesis = 0;
  std::vector<StepRecord> steps;
  std::vector<Belief> beliefs;  // posterior after each step, when recorded
  std::optional<int> stop_step; // set only on threshold stops
  std::uint32_t declared = 0;   // argmax of the final posterior, always recorded
  Termination terminated_by = Termination::TMax;

  bool correct() const { return declared == true_hypothesis; }
  double total_reward() const;

  bool operator==(const EpisodeRecord&) const = default;
};

// Independent streams for the three stochastic ingredients of an episode, so
// that e.g. a different exploration rule cannot shift the channel noise.
struct RngBundle {
  Rng hypothesis;
  Rng channel;
  Rng exploration;
};

RngBundle make_bundle(std::uint64_t master, Stream hyp, Stream chan, Stream explore,
                      std::uint64_t salt = 0);

// Rolls one episode under an arbitrary policy without learning.
EpisodeRecord run_policy_episode(Policy& policy, const Environment& env, const AgentConfig& cfg,
                                 RngBundle& rng, bool record_beliefs = true);

// Rolls one episode under the actor; with learn set, applies the critic and
// actor updates after every step (critic first, both driven by the delta
// computed from the pre-update critic). Learning never touches the belief
// dynamics, only the networks.
EpisodeRecord run_episode(Mlp& actor, Mlp& critic, const Environment& env, const AgentConfig& cfg,
                          bool learn, RngBundle& rng, bool record_beliefs = true);

// Same learning updates, but the probe sets come from `policy` instead of the
// actor (off-policy data collection, e.g. learning while a baseline drives).
EpisodeRecord run_episode_with_policy(Policy& policy, Mlp& actor, Mlp& critic,
                                      const Environment& env, const AgentConfig& cfg,
                                      RngBundle& rng, bool record_beliefs = true);

struct TrainOptions {
  int episodes = 1500;
  int slots_per_episode = 100;
  std::vector<int> hidden_widths{32, 32};
};

struct TrainLogEntry {
  int episode = 0;
  int stop_step = -1;  // -1: the training horizon ran out first
  bool correct = false;
  int steps = 0;
  double total_reward = 0.0;
};

struct TrainResult {
  Mlp actor;
  Mlp critic;
  std::vector<TrainLogEntry> log;
};

// Actor head is a softmax over the 2^n - 1 probe sets; critic head is a single
// linear value output. Hidden layers are rectifiers. Initialization draws from
// per-network streams of the master seed.
std::pair<Mlp, Mlp> make_actor_critic(int n, std::span<const int> hidden_widths, double actor_lr,
                                      double critic_lr, std::uint64_t master_seed);

// Runs `episodes` learning episodes, each capped at slots_per_episode and cut
// short once the posterior clears cfg.pi_upper. Non-finite parameters abort
// with the offending episode index.
TrainResult train(const Environment& env, const AgentConfig& cfg, const TrainOptions& options,
                  std::uint64_t master_seed);

}  // namespace csense
