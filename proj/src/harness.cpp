#include "csense/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace csense {

namespace {

using nlohmann::json;

constexpr int kCheckpointFormatVersion = 1;

std::string format_sig6(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string explore_mode_name(ExploreMode mode) {
  return mode == ExploreMode::Sample ? "sample" : "argmax";
}

ExploreMode explore_mode_from_name(const std::string& name) {
  if (name == "sample") return ExploreMode::Sample;
  if (name == "argmax") return ExploreMode::Argmax;
  throw std::invalid_argument("explore_mode must be \"sample\" or \"argmax\", got \"" + name +
                              "\"");
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Rectifier: return "rectifier";
    case Activation::Softmax: return "softmax";
    case Activation::Identity: return "identity";
  }
  throw std::invalid_argument("unknown activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "rectifier") return Activation::Rectifier;
  if (name == "softmax") return Activation::Softmax;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation \"" + name + "\"");
}

json net_to_json(const Mlp& net) {
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    layers.push_back(json{{"input_dim", layer.spec.input_dim},
                          {"output_dim", layer.spec.output_dim},
                          {"activation", activation_name(layer.spec.activation)},
                          {"weights", layer.weights},
                          {"biases", layer.biases}});
  }
  return json{{"learning_rate", net.learning_rate()}, {"layers", layers}};
}

Mlp net_from_json(const json& j) {
  std::vector<Layer> layers;
  for (const auto& jl : j.at("layers")) {
    Layer layer;
    layer.spec.input_dim = jl.at("input_dim").get<int>();
    layer.spec.output_dim = jl.at("output_dim").get<int>();
    layer.spec.activation = activation_from_name(jl.at("activation").get<std::string>());
    layer.weights = jl.at("weights").get<std::vector<double>>();
    layer.biases = jl.at("biases").get<std::vector<double>>();
    layers.push_back(std::move(layer));
  }
  return Mlp::from_layers(std::move(layers), j.at("learning_rate").get<double>());
}

std::vector<double> grid_axis(const std::vector<double>& values, double fallback) {
  std::vector<double> axis = values.empty() ? std::vector<double>{fallback} : values;
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  return axis;
}

}  // namespace

void validate(const RunConfig& c) {
  if (c.n_processes < 2 || c.n_processes > 16)
    throw std::invalid_argument("n_processes must lie in [2, 16]");
  if (!(c.p >= 0.0 && c.p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (!(c.q >= 0.0 && c.q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  if (!(c.rho >= 0.0 && c.rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  const auto [a, b] = c.dependent_pair;
  if (a < 1 || a > c.n_processes || b < 1 || b > c.n_processes || a == b)
    throw std::invalid_argument("dependent_pair must name two distinct processes in [1, n]");
  if (!(c.lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
  if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!(c.actor_lr > 0.0) || !(c.critic_lr > 0.0))
    throw std::invalid_argument("learning rates must be positive");
  for (int w : c.hidden_widths)
    if (w < 1) throw std::invalid_argument("hidden_widths entries must be positive");
  if (!(c.pi_upper > 0.5 && c.pi_upper <= 1.0))
    throw std::invalid_argument("pi_upper must lie in (0.5, 1]");
  if (c.t_max_eval < 1) throw std::invalid_argument("t_max_eval must be at least 1");
  if (c.train_episodes < 0) throw std::invalid_argument("train_episodes must be nonnegative");
  if (c.train_slots < 1) throw std::invalid_argument("train_slots must be at least 1");
  if (c.eval_episodes < 1) throw std::invalid_argument("eval_episodes must be at least 1");
}

RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a json object");
  static const std::set<std::string> known = {
      "n_processes", "p",       "q",           "rho",           "dependent_pair",
      "lambda",      "gamma",   "actor_lr",    "critic_lr",     "hidden_widths",
      "pi_upper",    "t_max_eval", "train_episodes", "train_slots", "eval_episodes",
      "seed",        "explore_mode"};
  for (const auto& item : j.items())
    if (!known.contains(item.key()))
      throw std::invalid_argument("unknown config key \"" + item.key() + "\"");
  if (!j.contains("seed")) throw std::invalid_argument("config requires a seed");

  RunConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("n_processes")) c.n_processes = j.at("n_processes").get<int>();
  if (j.contains("p")) c.p = j.at("p").get<double>();
  if (j.contains("q")) c.q = j.at("q").get<double>();
  if (j.contains("rho")) c.rho = j.at("rho").get<double>();
  if (j.contains("dependent_pair")) {
    const auto pair = j.at("dependent_pair").get<std::vector<int>>();
    if (pair.size() != 2)
      throw std::invalid_argument("dependent_pair must hold exactly two process ids");
    c.dependent_pair = {pair[0], pair[1]};
  }
  if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("actor_lr")) c.actor_lr = j.at("actor_lr").get<double>();
  if (j.contains("critic_lr")) c.critic_lr = j.at("critic_lr").get<double>();
  if (j.contains("hidden_widths")) c.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  if (j.contains("pi_upper")) c.pi_upper = j.at("pi_upper").get<double>();
  if (j.contains("t_max_eval")) c.t_max_eval = j.at("t_max_eval").get<int>();
  if (j.contains("train_episodes")) c.train_episodes = j.at("train_episodes").get<int>();
  if (j.contains("train_slots")) c.train_slots = j.at("train_slots").get<int>();
  if (j.contains("eval_episodes")) c.eval_episodes = j.at("eval_episodes").get<int>();
  if (j.contains("explore_mode"))
    c.explore_mode = explore_mode_from_name(j.at("explore_mode").get<std::string>());

  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path.string());
  json j;
  in >> j;
  return parse_run_config(j);
}

json run_config_to_json(const RunConfig& c) {
  return json{{"n_processes", c.n_processes},
              {"p", c.p},
              {"q", c.q},
              {"rho", c.rho},
              {"dependent_pair", std::vector<int>{c.dependent_pair.first, c.dependent_pair.second}},
              {"lambda", c.lambda},
              {"gamma", c.gamma},
              {"actor_lr", c.actor_lr},
              {"critic_lr", c.critic_lr},
              {"hidden_widths", c.hidden_widths},
              {"pi_upper", c.pi_upper},
              {"t_max_eval", c.t_max_eval},
              {"train_episodes", c.train_episodes},
              {"train_slots", c.train_slots},
              {"eval_episodes", c.eval_episodes},
              {"seed", c.seed},
              {"explore_mode", explore_mode_name(c.explore_mode)}};
}

Environment make_environment(const RunConfig& c) {
  Environment env;
  env.prior = build_prior(c.q, c.rho, c.n_processes, c.dependent_pair);
  env.channel = ChannelParams{c.p};
  env.reward = RewardParams{c.lambda};
  return env;
}

AgentConfig make_agent_config(const RunConfig& c) {
  AgentConfig cfg;
  cfg.gamma = c.gamma;
  cfg.actor_lr = c.actor_lr;
  cfg.critic_lr = c.critic_lr;
  cfg.pi_upper = c.pi_upper;
  cfg.t_max = c.t_max_eval;
  cfg.explore_mode = c.explore_mode;
  return cfg;
}

TrainOptions make_train_options(const RunConfig& c) {
  return TrainOptions{c.train_episodes, c.train_slots, c.hidden_widths};
}

RunMetrics compute_metrics(std::span<const EpisodeRecord> records) {
  if (records.empty()) throw std::invalid_argument("no episodes to summarize");
  RunMetrics m;
  m.episodes = static_cast<int>(records.size());
  long long stop_sum = 0;
  int stop_count = 0;
  int successes = 0;
  for (const auto& r : records) {
    if (r.terminated_by == Termination::TMax) {
      ++m.fail_threshold_never_reached;
      continue;
    }
    stop_sum += *r.stop_step;
    ++stop_count;
    if (r.correct())
      ++successes;
    else
      ++m.fail_wrong_declaration;
  }
  m.success_ratio = static_cast<double>(successes) / static_cast<double>(m.episodes);
  m.mean_stopping_time = stop_count > 0
                             ? static_cast<double>(stop_sum) / static_cast<double>(stop_count)
                             : std::numeric_limits<double>::quiet_NaN();
  return m;
}

TrainResult train_run(const RunConfig& config) {
  validate(config);
  return train(make_environment(config), make_agent_config(config), make_train_options(config),
               config.seed);
}

std::vector<EpisodeRecord> evaluate_actor(const Mlp& actor, const RunConfig& config,
                                          std::uint64_t salt) {
  validate(config);
  const auto env = make_environment(config);
  auto cfg = make_agent_config(config);
  cfg.explore_mode = ExploreMode::Argmax;
  auto policy = actor_policy(actor, cfg.explore_mode);
  auto rng = make_bundle(config.seed, Stream::EvalHypothesis, Stream::EvalChannel,
                         Stream::EvalExploration, salt);
  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(config.eval_episodes));
  for (int i = 0; i < config.eval_episodes; ++i)
    records.push_back(run_policy_episode(*policy, env, cfg, rng, /*record_beliefs=*/false));
  return records;
}

std::vector<EpisodeRecord> evaluate_baseline(BaselineKind kind, const RunConfig& config,
                                             std::uint64_t salt) {
  validate(config);
  const auto env = make_environment(config);
  const auto cfg = make_agent_config(config);
  auto policy = baseline_policy(kind, config.n_processes);
  auto rng = make_bundle(config.seed, Stream::EvalHypothesis, Stream::EvalChannel,
                         Stream::EvalExploration, salt);
  std::vector<EpisodeRecord> records;
  records.reserve(static_cast<std::size_t>(config.eval_episodes));
  for (int i = 0; i < config.eval_episodes; ++i)
    records.push_back(run_policy_episode(*policy, env, cfg, rng, /*record_beliefs=*/false));
  return records;
}

SweepGrid parse_sweep_grid(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("grid must be a json object");
  static const std::set<std::string> known = {"pi_upper", "lambda", "rho"};
  for (const auto& item : j.items())
    if (!known.contains(item.key()))
      throw std::invalid_argument("unknown grid key \"" + item.key() + "\"");
  SweepGrid grid;
  if (j.contains("pi_upper")) grid.pi_upper = j.at("pi_upper").get<std::vector<double>>();
  if (j.contains("lambda")) grid.lambda = j.at("lambda").get<std::vector<double>>();
  if (j.contains("rho")) grid.rho = j.at("rho").get<std::vector<double>>();
  return grid;
}

SweepTable sweep(const RunConfig& base, const SweepGrid& grid) {
  validate(base);
  const auto rhos = grid_axis(grid.rho, base.rho);
  const auto lambdas = grid_axis(grid.lambda, base.lambda);
  const auto uppers = grid_axis(grid.pi_upper, base.pi_upper);

  SweepTable table;
  for (double rho : rhos) {
    for (double lambda : lambdas) {
      RunConfig cell = base;
      cell.rho = rho;
      cell.lambda = lambda;
      std::optional<TrainResult> trained;
      try {
        trained = train_run(cell);
      } catch (const std::exception& e) {
        table.failures.push_back("cell rho=" + format_sig6(rho) + " lambda=" +
                                 format_sig6(lambda) + ": training failed: " + e.what());
        continue;
      }
      for (std::size_t u = 0; u < uppers.size(); ++u) {
        RunConfig row_cfg = cell;
        row_cfg.pi_upper = uppers[u];
        try {
          const auto records = evaluate_actor(trained->actor, row_cfg, u);
          table.rows.push_back({row_cfg, compute_metrics(records)});
        } catch (const std::exception& e) {
          table.failures.push_back("cell rho=" + format_sig6(rho) + " lambda=" +
                                   format_sig6(lambda) + " pi_upper=" + format_sig6(uppers[u]) +
                                   ": " + e.what());
        }
      }
    }
  }
  return table;
}

void emit_csv(const SweepTable& table, std::ostream& out) {
  out << "seed,n,p,q,rho,lambda,gamma,actor_lr,critic_lr,pi_upper,t_max,"
         "train_episodes,eval_episodes,success_ratio,mean_stopping_time,"
         "fail_a_count,fail_b_count\n";
  for (const auto& row : table.rows) {
    const auto& c = row.config;
    const auto& m = row.metrics;
    out << c.seed << ',' << c.n_processes << ',' << format_sig6(c.p) << ',' << format_sig6(c.q)
        << ',' << format_sig6(c.rho) << ',' << format_sig6(c.lambda) << ','
        << format_sig6(c.gamma) << ',' << format_sig6(c.actor_lr) << ','
        << format_sig6(c.critic_lr) << ',' << format_sig6(c.pi_upper) << ',' << c.t_max_eval
        << ',' << c.train_episodes << ',' << c.eval_episodes << ','
        << format_sig6(m.success_ratio) << ',' << format_sig6(m.mean_stopping_time) << ','
        << m.fail_threshold_never_reached << ',' << m.fail_wrong_declaration << '\n';
  }
}

void emit_csv(const SweepTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write csv file: " + path.string());
  emit_csv(table, out);
}

std::string csv_string(const SweepTable& table) {
  std::ostringstream out;
  emit_csv(table, out);
  return out.str();
}

void write_train_log_csv(std::span<const TrainLogEntry> log, std::ostream& out) {
  out << "episode,stop_step,correct,steps,total_reward\n";
  for (const auto& e : log)
    out << e.episode << ',' << e.stop_step << ',' << (e.correct ? 1 : 0) << ',' << e.steps << ','
        << format_sig6(e.total_reward) << '\n';
}

void write_train_log_csv(std::span<const TrainLogEntry> log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log: " + path.string());
  write_train_log_csv(log, out);
}

void save_checkpoint(const Mlp& actor, const Mlp& critic, const RunConfig& config,
                     const std::filesystem::path& path) {
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["config"] = run_config_to_json(config);
  j["actor"] = net_to_json(actor);
  j["critic"] = net_to_json(critic);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "cannot read checkpoint: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "checkpoint is not valid json: " + std::string(e.what()));
  }
  if (!j.is_object() || !j.contains("format_version"))
    throw CheckpointError(CheckpointError::Kind::Corrupt, "checkpoint lacks a format_version");
  const int version = [&] {
    try {
      return j.at("format_version").get<int>();
    } catch (const json::exception&) {
      throw CheckpointError(CheckpointError::Kind::Corrupt, "format_version is not an integer");
    }
  }();
  if (version != kCheckpointFormatVersion)
    throw CheckpointError(CheckpointError::Kind::Version,
                          "checkpoint format_version " + std::to_string(version) +
                              " is not the supported version " +
                              std::to_string(kCheckpointFormatVersion));
  try {
    auto config = parse_run_config(j.at("config"));
    auto actor = net_from_json(j.at("actor"));
    auto critic = net_from_json(j.at("critic"));
    const int in_dim = 1 << config.n_processes;
    if (actor.input_dim() != in_dim || actor.output_dim() != in_dim - 1 ||
        critic.input_dim() != in_dim || critic.output_dim() != 1)
      throw CheckpointError(CheckpointError::Kind::Corrupt,
                            "checkpoint networks do not match its own config");
    return Checkpoint{std::move(actor), std::move(critic), std::move(config)};
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          "malformed checkpoint: " + std::string(e.what()));
  }
}

void require_compatible(const Checkpoint& checkpoint, const RunConfig& config) {
  if (checkpoint.config.n_processes != config.n_processes)
    throw CheckpointError(CheckpointError::Kind::Dimension,
                          "checkpoint was built for n=" +
                              std::to_string(checkpoint.config.n_processes) +
                              " but the run requests n=" + std::to_string(config.n_processes));
  if (checkpoint.config.hidden_widths != config.hidden_widths)
    throw CheckpointError(CheckpointError::Kind::Dimension,
                          "checkpoint hidden layer widths do not match the run config");
}

}  // namespace csense
