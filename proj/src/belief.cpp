#include "csense/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csense {

namespace {

double clamped(double p) {
  return std::min(std::max(p, kBeliefClamp), 1.0 - kBeliefClamp);
}

// Clamping both sides independently keeps the ratio exact at the saturation
// points; deriving the denominator as 1 - clamped(p) would cancel badly there.
double log_odds(double p) {
  return std::log(clamped(p) / clamped(1.0 - p));
}

void check_belief(const Belief& belief) {
  if (belief.probs.empty()) throw std::invalid_argument("belief has no entries");
}

}  // namespace

std::uint32_t Belief::argmax() const {
  std::uint32_t best = 0;
  for (std::uint32_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

double Belief::max_prob() const {
  return probs.empty() ? 0.0 : *std::max_element(probs.begin(), probs.end());
}

Belief belief_from_prior(const PriorModel& prior) {
  if (prior.probs.empty()) throw std::invalid_argument("prior has no support");
  return Belief{prior.probs, 0};
}

Belief update_posterior(const Belief& previous, const Observation& obs, ChannelParams channel) {
  check_belief(previous);
  Belief next;
  next.probs.resize(previous.probs.size());
  double sum = 0.0;
  for (std::uint32_t i = 0; i < previous.probs.size(); ++i) {
    next.probs[i] = previous.probs[i] * measurement_likelihood(obs, i, channel);
    sum += next.probs[i];
  }
  if (!(sum > 0.0) || !std::isfinite(sum))
    throw std::runtime_error("posterior update produced a degenerate belief");
  for (auto& p : next.probs) p /= sum;
  next.step = previous.step + 1;
  return next;
}

Belief batch_posterior(const PriorModel& prior, std::span<const Observation> history,
                       ChannelParams channel) {
  if (prior.probs.empty()) throw std::invalid_argument("prior has no support");
  const auto size = prior.probs.size();

  std::vector<double> logw(size);
  for (std::size_t i = 0; i < size; ++i) logw[i] = std::log(prior.probs[i]);
  for (const auto& obs : history)
    for (std::uint32_t i = 0; i < size; ++i)
      logw[i] += std::log(measurement_likelihood(obs, i, channel));

  double peak = -std::numeric_limits<double>::infinity();
  for (double w : logw) peak = std::max(peak, w);
  if (!std::isfinite(peak))
    throw std::runtime_error("measurement history excludes every hypothesis");

  Belief posterior;
  posterior.probs.resize(size);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    posterior.probs[i] = std::exp(logw[i] - peak);
    sum += posterior.probs[i];
  }
  for (auto& p : posterior.probs) p /= sum;
  posterior.step = static_cast<int>(history.size());
  return posterior;
}

double confidence(const Belief& belief, std::uint32_t i) {
  check_belief(belief);
  if (i >= belief.probs.size()) throw std::invalid_argument("hypothesis index out of range");
  return log_odds(belief.probs[i]);
}

double avg_bllr(const Belief& belief) {
  check_belief(belief);
  double sum = 0.0;
  for (double p : belief.probs) sum += p * log_odds(p);
  return sum;
}

double instantaneous_reward(const Belief& previous, const Belief& next, ActionSet action,
                            RewardParams reward) {
  return avg_bllr(next) - avg_bllr(previous) - reward.lambda * action.count();
}

double average_reward(std::span<const double> rewards) {
  if (rewards.empty()) throw std::invalid_argument("no rewards to average");
  double sum = 0.0;
  for (double r : rewards) sum += r;
  return sum / static_cast<double>(rewards.size());
}

}  // namespace csense
