#include <cmath>

#include "doctest.h"

#include "csense/channel.hpp"

using namespace csense;

TEST_CASE("a noiseless channel reports the state exactly") {
  Rng rng(1);
  const StateVector truth({1, 0, 1});
  const auto obs = sample_observation(truth, ActionSet::all(3), ChannelParams{0.0}, rng);
  CHECK(obs.value(0) == 1);
  CHECK(obs.value(1) == 0);
  CHECK(obs.value(2) == 1);
}

TEST_CASE("a half-crossover channel is a coin flip regardless of the state") {
  ChannelParams channel{0.5};
  const int draws = 100000;
  for (std::uint8_t s : {std::uint8_t{0}, std::uint8_t{1}}) {
    Rng rng(11 + s);
    const StateVector truth({s, s});
    int ones = 0;
    for (int i = 0; i < draws; ++i)
      ones += sample_observation(truth, ActionSet::single(0), channel, rng).value(0);
    CHECK(std::abs(static_cast<double>(ones) / draws - 0.5) < 0.01);
  }
}

TEST_CASE("crossover 0.8 flips a normal process to 1 about 80% of the time") {
  Rng rng(5);
  const StateVector truth({0, 0, 0});
  const int draws = 100000;
  int ones = 0;
  for (int i = 0; i < draws; ++i)
    ones += sample_observation(truth, ActionSet::single(1), ChannelParams{0.8}, rng).value(1);
  CHECK(std::abs(static_cast<double>(ones) / draws - 0.8) < 0.01);
}

TEST_CASE("readings exist exactly for the probed set") {
  Rng rng(3);
  const StateVector truth({1, 1, 1});
  const auto obs = sample_observation(truth, ActionSet(0b101), ChannelParams{0.0}, rng);
  CHECK(obs.values == 0b101);  // bit 1 never set: it was not probed
  const Observation masked(ActionSet(0b001), 0b111);
  CHECK(masked.values == 0b001);
}

TEST_CASE("probing outside the system is rejected") {
  Rng rng(9);
  CHECK_THROWS_AS(sample_observation(StateVector({0, 1}), ActionSet(0b100), ChannelParams{0.2}, rng),
                  std::invalid_argument);
}

TEST_CASE("likelihood multiplies per-sensor match and flip factors") {
  ChannelParams channel{0.2};
  // Probe processes 1 and 2, read (0, 1); hypothesis (0, 1, *) matches both.
  const Observation obs(ActionSet(0b011), 0b010);
  CHECK(measurement_likelihood(obs, state_to_index(StateVector({0, 1, 0})), channel) ==
        doctest::Approx(0.64).epsilon(1e-12));
  // Hypothesis (1, 0, *) matches neither reading.
  CHECK(measurement_likelihood(obs, state_to_index(StateVector({1, 0, 0})), channel) ==
        doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("half-crossover likelihood is 0.5 per probed sensor") {
  ChannelParams channel{0.5};
  const Observation obs(ActionSet(0b111), 0b010);
  CHECK(measurement_likelihood(obs, 4, channel) == doctest::Approx(0.125).epsilon(1e-12));
  const Observation one(ActionSet(0b010), 0b000);
  CHECK(measurement_likelihood(one, 7, channel) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("likelihood sums to one over all reading assignments") {
  for (double p : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    ChannelParams channel{p};
    for (std::uint32_t mask = 1; mask < 16; ++mask) {
      const ActionSet action(mask);
      for (std::uint32_t hyp = 0; hyp < 16; ++hyp) {
        double sum = 0.0;
        // Enumerate readings by iterating all subsets of the action mask.
        std::uint32_t sub = 0;
        while (true) {
          sum += measurement_likelihood(Observation(action, sub), hyp, channel);
          if (sub == mask) break;
          sub = (sub - mask) & mask;  // next subset of mask
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("likelihood ignores hypothesis bits outside the probed set") {
  ChannelParams channel{0.3};
  const Observation obs(ActionSet(0b010), 0b010);
  for (std::uint32_t h1 : {0b000u, 0b001u, 0b100u, 0b101u}) {
    const double base = measurement_likelihood(obs, h1 | 0b010u, channel);
    CHECK(measurement_likelihood(obs, 0b010u, channel) == base);
  }
}

TEST_CASE("observation sampling reproduces bit for bit under one seed") {
  const StateVector truth({0, 1, 0, 1});
  Rng a(77), b(77);
  for (int i = 0; i < 500; ++i) {
    const auto oa = sample_observation(truth, ActionSet(0b1011), ChannelParams{0.3}, a);
    const auto ob = sample_observation(truth, ActionSet(0b1011), ChannelParams{0.3}, b);
    CHECK(oa == ob);
  }
}
