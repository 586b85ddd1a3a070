#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "csense/channel.hpp"
#include "csense/hypothesis.hpp"

namespace csense {

// Posterior over hypotheses after `step` measurement slots. Entries are kept
// normalized (sum 1) in linear space; clamping to [kBeliefClamp, 1-kBeliefClamp]
// happens only inside log-ratio computations so that stored probabilities stay
// exact.
struct Belief {
  std::vector<double> probs;
  int step = 0;

  // Lowest index wins ties.
  std::uint32_t argmax() const;
  double max_prob() const;

  bool operator==(const Belief&) const = default;
};

inline constexpr double kBeliefClamp = 1e-12;

struct RewardParams {
  double lambda = 0.0;  // per-sensor probing cost
};

Belief belief_from_prior(const PriorModel& prior);

// One Bayes step: multiply by the measurement likelihood and renormalize.
// A sum that underflows to zero (impossible for crossover in (0, 1), but
// reachable through inconsistent inputs at the boundaries) is reported as a
// numerical fault rather than silently renormalized.
Belief update_posterior(const Belief& previous, const Observation& obs, ChannelParams channel);

// Posterior from the prior and a whole measurement history in one pass,
// accumulated in log space. Serves as an order-independent cross-check of the
// recursive update: both must agree to ~1e-10 on any shared history.
Belief batch_posterior(const PriorModel& prior, std::span<const Observation> history,
                       ChannelParams channel);

// log(pi_i / (1 - pi_i)), the posterior log-odds of hypothesis i.
double confidence(const Belief& belief, std::uint32_t i);

// Probability-weighted sum of the per-hypothesis log-odds. This is the scalar
// the agent tries to drive up: large when the posterior concentrates anywhere.
double avg_bllr(const Belief& belief);

// Confidence gain of one measurement step minus the probing cost lambda * |action|.
double instantaneous_reward(const Belief& previous, const Belief& next, ActionSet action,
                            RewardParams reward);

double average_reward(std::span<const double> rewards);

}  // namespace csense
