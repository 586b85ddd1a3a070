#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "csense/rng.hpp"

namespace csense {

// A system of n binary processes, each either normal (0) or anomalous (1).
// A joint assignment is a hypothesis; there are 2^n of them.
//
// Encoding: process i (1-based) occupies bit i-1 of the hypothesis index,
// so process 1 is the least significant bit. The same convention applies to
// sensor subsets (ActionSet).

class StateVector {
 public:
  // bits[i] is the state of process i+1; every entry must be 0 or 1.
  explicit StateVector(std::vector<std::uint8_t> bits);

  int size() const { return static_cast<int>(bits_.size()); }
  std::uint8_t operator[](int i) const { return bits_[static_cast<std::size_t>(i)]; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool operator==(const StateVector&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

std::uint32_t state_to_index(const StateVector& state);
StateVector index_to_state(std::uint32_t index, int n);

// Nonempty subset of processes to probe in one time slot.
class ActionSet {
 public:
  explicit ActionSet(std::uint32_t mask);

  std::uint32_t mask() const { return mask_; }
  int count() const { return std::popcount(mask_); }
  bool contains(int bit) const { return (mask_ >> bit) & 1u; }

  // Dense index used for policy outputs: mask m maps to slot m-1.
  int index() const { return static_cast<int>(mask_) - 1; }
  static ActionSet from_index(int index) { return ActionSet(static_cast<std::uint32_t>(index) + 1u); }

  static ActionSet all(int n) { return ActionSet((std::uint32_t{1} << n) - 1u); }
  static ActionSet single(int bit) { return ActionSet(std::uint32_t{1} << bit); }

  bool operator==(const ActionSet&) const = default;

 private:
  std::uint32_t mask_;
};

// Joint prior over hypotheses. One designated pair of processes may be
// correlated; all remaining processes are independent.
//
// Pair cells, with q the per-process probability of being normal and
// rho in [0, 1] the coupling strength:
//   P{0,0} = q^2 + rho q (1-q)        P{0,1} = P{1,0} = q (1-q) (1-rho)
//   P{1,1} = (1-q)^2 + rho q (1-q)
// rho = 0 recovers full independence, rho = 1 forces the pair to agree.
struct PriorModel {
  int n = 0;
  double q = 0.0;
  double rho = 0.0;
  std::pair<int, int> dependent_pair{1, 2};  // 1-based process ids
  std::vector<double> probs;                 // size 2^n, sums to 1
};

PriorModel build_prior(double q, double rho, int n, std::pair<int, int> dependent_pair = {1, 2});

// Categorical draw from the prior; consumes exactly one engine output.
std::uint32_t sample_hypothesis(const PriorModel& prior, Rng& rng);

}  // namespace csense
