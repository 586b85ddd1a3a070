#include "csense/hypothesis.hpp"

#include <stdexcept>
#include <string>

namespace csense {

namespace {

constexpr int kMaxProcesses = 24;

void check_process_count(int n) {
  if (n < 1 || n > kMaxProcesses)
    throw std::invalid_argument("process count must be in [1, " + std::to_string(kMaxProcesses) +
                                "], got " + std::to_string(n));
}

}  // namespace

StateVector::StateVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  check_process_count(static_cast<int>(bits_.size()));
  for (auto b : bits_)
    if (b > 1) throw std::invalid_argument("state entries must be 0 or 1");
}

std::uint32_t state_to_index(const StateVector& state) {
  std::uint32_t index = 0;
  for (int i = 0; i < state.size(); ++i)
    index |= static_cast<std::uint32_t>(state[i]) << i;
  return index;
}

StateVector index_to_state(std::uint32_t index, int n) {
  check_process_count(n);
  if (index >= (std::uint32_t{1} << n))
    throw std::invalid_argument("hypothesis index " + std::to_string(index) +
                                " out of range for " + std::to_string(n) + " processes");
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) bits[static_cast<std::size_t>(i)] = (index >> i) & 1u;
  return StateVector(std::move(bits));
}

ActionSet::ActionSet(std::uint32_t mask) : mask_(mask) {
  if (mask == 0) throw std::invalid_argument("action must probe at least one process");
}

PriorModel build_prior(double q, double rho, int n, std::pair<int, int> dependent_pair) {
  check_process_count(n);
  if (n < 2) throw std::invalid_argument("prior needs at least two processes");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  const auto [first, second] = dependent_pair;
  if (first < 1 || first > n || second < 1 || second > n || first == second)
    throw std::invalid_argument("dependent pair must name two distinct processes in [1, n]");

  const double coupling = rho * q * (1.0 - q);
  double cell[2][2];
  cell[0][0] = q * q + coupling;
  cell[0][1] = q * (1.0 - q) * (1.0 - rho);
  cell[1][0] = cell[0][1];
  cell[1][1] = (1.0 - q) * (1.0 - q) + coupling;

  PriorModel prior;
  prior.n = n;
  prior.q = q;
  prior.rho = rho;
  prior.dependent_pair = dependent_pair;
  prior.probs.resize(std::size_t{1} << n);

  const int bit_a = first - 1;
  const int bit_b = second - 1;
  for (std::uint32_t idx = 0; idx < prior.probs.size(); ++idx) {
    const auto a = (idx >> bit_a) & 1u;
    const auto b = (idx >> bit_b) & 1u;
    double p = cell[a][b];
    for (int bit = 0; bit < n; ++bit) {
      if (bit == bit_a || bit == bit_b) continue;
      p *= ((idx >> bit) & 1u) ? (1.0 - q) : q;
    }
    prior.probs[idx] = p;
  }
  return prior;
}

std::uint32_t sample_hypothesis(const PriorModel& prior, Rng& rng) {
  if (prior.probs.empty()) throw std::invalid_argument("prior has no support");
  return static_cast<std::uint32_t>(rng.next_categorical(prior.probs));
}

}  // namespace csense
