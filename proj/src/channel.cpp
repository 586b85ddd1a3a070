#include "csense/channel.hpp"

#include <stdexcept>

namespace csense {

namespace {

void check_channel(ChannelParams channel) {
  if (!(channel.crossover >= 0.0 && channel.crossover <= 1.0))
    throw std::invalid_argument("crossover probability must lie in [0, 1]");
}

}  // namespace

Observation sample_observation(const StateVector& truth, ActionSet action, ChannelParams channel,
                               Rng& rng) {
  check_channel(channel);
  if (action.mask() >= (std::uint32_t{1} << truth.size()))
    throw std::invalid_argument("action probes a process outside the system");

  std::uint32_t values = 0;
  for (int bit = 0; bit < truth.size(); ++bit) {
    if (!action.contains(bit)) continue;
    const bool flip = rng.next_bernoulli(channel.crossover);
    const auto reading = static_cast<std::uint32_t>(truth[bit]) ^ static_cast<std::uint32_t>(flip);
    values |= reading << bit;
  }
  return Observation(action, values);
}

double measurement_likelihood(const Observation& obs, std::uint32_t hypothesis,
                              ChannelParams channel) {
  check_channel(channel);
  double likelihood = 1.0;
  const auto mask = obs.action.mask();
  for (int bit = 0; (mask >> bit) != 0; ++bit) {
    if (!obs.action.contains(bit)) continue;
    const auto state_bit = (hypothesis >> bit) & 1u;
    likelihood *= (obs.value(bit) == state_bit) ? (1.0 - channel.crossover) : channel.crossover;
  }
  return likelihood;
}

}  // namespace csense
