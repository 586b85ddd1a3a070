#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "csense/agent.hpp"

namespace csense {

// Complete description of one experiment. Together with nothing else, this
// determines every output byte of a run.
struct RunConfig {
  int n_processes = 3;
  double p = 0.8;  // sensor crossover probability
  double q = 0.8;  // per-process prior probability of being normal
  double rho = 0.0;
  std::pair<int, int> dependent_pair{1, 2};
  double lambda = 0.0;
  double gamma = 0.9;
  double actor_lr = 0.0005;
  double critic_lr = 0.005;
  std::vector<int> hidden_widths{32, 32};
  double pi_upper = 0.99;
  int t_max_eval = 300;
  int train_episodes = 1500;
  int train_slots = 100;
  int eval_episodes = 10000;
  std::uint64_t seed = 0;
  ExploreMode explore_mode = ExploreMode::Sample;  // training only; evaluation is argmax

  bool operator==(const RunConfig&) const = default;
};

void validate(const RunConfig& config);

// Strict parse: every key must be a RunConfig field and `seed` is mandatory;
// everything else falls back to the defaults above.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json run_config_to_json(const RunConfig& config);

Environment make_environment(const RunConfig& config);
AgentConfig make_agent_config(const RunConfig& config);
TrainOptions make_train_options(const RunConfig& config);

struct RunMetrics {
  double success_ratio = 0.0;        // stopped in time and declared correctly
  double mean_stopping_time = 0.0;   // over threshold stops only; NaN if none
  int fail_threshold_never_reached = 0;  // horizon ran out
  int fail_wrong_declaration = 0;        // stopped in time, declared wrong
  int episodes = 0;
};

RunMetrics compute_metrics(std::span<const EpisodeRecord> records);

// Trains with the config's own seed and training parameters.
TrainResult train_run(const RunConfig& config);

// Fresh episodes under the deterministic (argmax) policy, on evaluation
// streams disjoint from training. `salt` separates repeated evaluations of
// the same agent (e.g. one per threshold in a sweep).
std::vector<EpisodeRecord> evaluate_actor(const Mlp& actor, const RunConfig& config,
                                          std::uint64_t salt = 0);
std::vector<EpisodeRecord> evaluate_baseline(BaselineKind kind, const RunConfig& config,
                                             std::uint64_t salt = 0);

struct SweepGrid {
  std::vector<double> pi_upper;
  std::vector<double> lambda;
  std::vector<double> rho;
};

SweepGrid parse_sweep_grid(const nlohmann::json& j);

struct SweepRow {
  RunConfig config;  // base config with the cell's values substituted in
  RunMetrics metrics;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<std::string> failures;  // cells that errored; the sweep goes on
};

// One training per (rho, lambda) cell, one evaluation row per threshold.
// Thresholds only gate stopping, so training is shared across them; every cell
// trains with the base config's own threshold and seed. Rows come out ordered
// by (rho, lambda, pi_upper) ascending.
SweepTable sweep(const RunConfig& base, const SweepGrid& grid);

void emit_csv(const SweepTable& table, std::ostream& out);
void emit_csv(const SweepTable& table, const std::filesystem::path& path);
std::string csv_string(const SweepTable& table);

void write_train_log_csv(std::span<const TrainLogEntry> log, std::ostream& out);
void write_train_log_csv(std::span<const TrainLogEntry> log, const std::filesystem::path& path);

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { Version, Corrupt, Dimension };

  CheckpointError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Checkpoint {
  Mlp actor;
  Mlp critic;
  RunConfig config;
};

// JSON with explicit layer shapes and full parameter lists. Doubles survive
// the round trip bit-exactly, so a restored network reproduces the saved one's
// outputs to the last bit.
void save_checkpoint(const Mlp& actor, const Mlp& critic, const RunConfig& config,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Rejects mixing a checkpoint into a run whose network shapes differ.
void require_compatible(const Checkpoint& checkpoint, const RunConfig& config);

}  // namespace csense
