#pragma once

#include <cstdint>

#include "csense/hypothesis.hpp"
#include "csense/rng.hpp"

namespace csense {

// Each probed process is read through an independent binary symmetric channel:
// the sensor reports the true state with probability 1 - crossover and the
// flipped state with probability crossover.
struct ChannelParams {
  double crossover = 0.2;
};

// One slot's sensor readings. Bit i of `values` is meaningful only when the
// action probed process i+1; construction masks everything else off, so the
// set of readings always matches the probed set exactly.
struct Observation {
  ActionSet action;
  std::uint32_t values;

  Observation(ActionSet a, std::uint32_t v) : action(a), values(v & a.mask()) {}

  std::uint8_t value(int bit) const { return static_cast<std::uint8_t>((values >> bit) & 1u); }

  bool operator==(const Observation&) const = default;
};

// Draws one reading per probed process, in ascending process order.
Observation sample_observation(const StateVector& truth, ActionSet action, ChannelParams channel,
                               Rng& rng);

// P{readings | hypothesis}: product of per-sensor match/flip factors over the
// probed set. Bits of `hypothesis` outside the probed set do not matter.
double measurement_likelihood(const Observation& obs, std::uint32_t hypothesis,
                              ChannelParams channel);

}  // namespace csense
