#include <cmath>
#include <vector>

#include "doctest.h"

#include "csense/hypothesis.hpp"

using namespace csense;

namespace {

double pair_marginal(const PriorModel& prior, int process_a, std::uint8_t value_a, int process_b,
                     std::uint8_t value_b) {
  double sum = 0.0;
  for (std::uint32_t i = 0; i < prior.probs.size(); ++i) {
    const auto state = index_to_state(i, prior.n);
    if (state[process_a - 1] == value_a && state[process_b - 1] == value_b) sum += prior.probs[i];
  }
  return sum;
}

double single_marginal(const PriorModel& prior, int process, std::uint8_t value) {
  double sum = 0.0;
  for (std::uint32_t i = 0; i < prior.probs.size(); ++i)
    if (index_to_state(i, prior.n)[process - 1] == value) sum += prior.probs[i];
  return sum;
}

}  // namespace

TEST_CASE("state encoding puts process 1 in the least significant bit") {
  CHECK(state_to_index(StateVector({0, 0, 0})) == 0);
  CHECK(state_to_index(StateVector({1, 0, 0})) == 1);
  CHECK(state_to_index(StateVector({1, 0, 1})) == 5);
}

TEST_CASE("index decoding inverts the encoding") {
  CHECK(index_to_state(0, 3) == StateVector({0, 0, 0}));
  CHECK(index_to_state(7, 3) == StateVector({1, 1, 1}));
  CHECK(index_to_state(6, 3) == StateVector({0, 1, 1}));
}

TEST_CASE("decoding rejects out-of-range indices") {
  CHECK_THROWS_AS(index_to_state(8, 3), std::invalid_argument);
  CHECK_THROWS_AS(index_to_state(1u << 4, 4), std::invalid_argument);
}

TEST_CASE("encode/decode round-trips every index") {
  for (int n = 1; n <= 10; ++n)
    for (std::uint32_t i = 0; i < (std::uint32_t{1} << n); ++i)
      CHECK(state_to_index(index_to_state(i, n)) == i);
}

TEST_CASE("state vectors reject entries other than 0 and 1") {
  CHECK_THROWS_AS(StateVector({0, 2, 0}), std::invalid_argument);
}

TEST_CASE("actions are nonempty subsets") {
  CHECK_THROWS_AS(ActionSet(0), std::invalid_argument);
  CHECK(ActionSet::all(3).mask() == 7);
  CHECK(ActionSet::all(3).count() == 3);
  CHECK(ActionSet::single(2).mask() == 4);
  CHECK(ActionSet::from_index(0).mask() == 1);
  CHECK(ActionSet(5).index() == 4);
}

TEST_CASE("independent prior puts 0.512 on the all-normal state") {
  const auto prior = build_prior(0.8, 0.0, 3);
  CHECK(prior.probs[0] == doctest::Approx(0.512).epsilon(1e-12));
}

TEST_CASE("full coupling removes disagreeing pair states") {
  const auto prior = build_prior(0.8, 1.0, 3);
  CHECK(pair_marginal(prior, 1, 0, 2, 1) == 0.0);
  CHECK(pair_marginal(prior, 1, 1, 2, 0) == 0.0);
}

TEST_CASE("partial coupling shifts pair mass as prescribed") {
  const auto prior = build_prior(0.8, 0.3, 3);
  // q^2 + rho q (1-q) = 0.64 + 0.3 * 0.16
  CHECK(pair_marginal(prior, 1, 0, 2, 0) == doctest::Approx(0.688).epsilon(1e-12));
}

TEST_CASE("prior normalizes and keeps per-process marginals at q") {
  for (double q : {0.0, 0.2, 0.5, 0.8, 1.0}) {
    for (double rho : {0.0, 0.3, 0.7, 1.0}) {
      const auto prior = build_prior(q, rho, 4, {2, 4});
      double sum = 0.0;
      for (double p : prior.probs) {
        CHECK(p >= 0.0);
        sum += p;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      for (int process = 1; process <= 4; ++process)
        CHECK(single_marginal(prior, process, 0) == doctest::Approx(q).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero coupling factorizes exactly into per-process marginals") {
  const double q = 0.8;
  const auto prior = build_prior(q, 0.0, 3);
  for (std::uint32_t i = 0; i < prior.probs.size(); ++i) {
    const auto state = index_to_state(i, 3);
    double product = (state[0] ? (1.0 - q) : q);
    product *= (state[1] ? (1.0 - q) : q);
    product *= (state[2] ? (1.0 - q) : q);
    CHECK(prior.probs[i] == product);  // bitwise: same factors in the same order
  }
}

TEST_CASE("prior validation rejects bad arguments") {
  CHECK_THROWS_AS(build_prior(1.2, 0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_prior(0.8, -0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_prior(0.8, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_prior(0.8, 0.0, 3, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_prior(0.8, 0.0, 3, {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(build_prior(0.8, 0.0, 3, {1, 4}), std::invalid_argument);
}

TEST_CASE("degenerate priors sample their point mass") {
  Rng rng(123);
  const auto prior = build_prior(1.0, 0.0, 3);  // everything normal almost surely
  for (int i = 0; i < 100; ++i) CHECK(sample_hypothesis(prior, rng) == 0);
}

TEST_CASE("sampling a fixed stream is deterministic") {
  const auto prior = build_prior(0.8, 0.3, 3);
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(sample_hypothesis(prior, a) == sample_hypothesis(prior, b));
}

TEST_CASE("sampling frequencies match the prior at 1e5 draws") {
  const auto prior = build_prior(0.8, 0.0, 3);
  Rng rng(7);
  std::vector<int> counts(prior.probs.size(), 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample_hypothesis(prior, rng)];
  for (std::uint32_t i = 0; i < prior.probs.size(); ++i) {
    const double freq = static_cast<double>(counts[i]) / draws;
    CHECK(std::abs(freq - prior.probs[i]) < 0.01);
  }
  CHECK(static_cast<double>(counts[0]) / draws == doctest::Approx(0.512).epsilon(0.02));
}
