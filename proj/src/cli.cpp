#include "csense/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "csense/harness.hpp"

namespace csense {

namespace {

using nlohmann::json;

// Bad input from the user (flags, config files, ranges) exits with 2;
// failures of the run itself exit with 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

RunConfig load_config_or_usage(const std::string& path) {
  try {
    return load_run_config(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

BaselineKind baseline_from_name(const std::string& name) {
  if (name == "random") return BaselineKind::UniformRandom;
  if (name == "all") return BaselineKind::AllSensors;
  if (name == "roundrobin") return BaselineKind::RoundRobinSingle;
  throw UsageError("unknown baseline \"" + name + "\"");
}

std::filesystem::path train_log_path(const std::filesystem::path& checkpoint_path) {
  auto p = checkpoint_path;
  p.replace_extension(".train.csv");
  return p;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<double> pi_upper;
  std::optional<double> lambda;
  std::optional<double> rho;
};

void apply(const Overrides& o, RunConfig& config, bool episodes_are_training) {
  if (o.seed) config.seed = *o.seed;
  if (o.episodes) {
    if (episodes_are_training)
      config.train_episodes = *o.episodes;
    else
      config.eval_episodes = *o.episodes;
  }
  if (o.pi_upper) config.pi_upper = *o.pi_upper;
  if (o.lambda) config.lambda = *o.lambda;
  if (o.rho) config.rho = *o.rho;
  try {
    validate(config);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_train(const std::string& config_path, const Overrides& overrides,
              const std::string& out_path) {
  RunConfig config = load_config_or_usage(config_path);
  apply(overrides, config, /*episodes_are_training=*/true);

  const auto result = train_run(config);
  save_checkpoint(result.actor, result.critic, config, out_path);
  const auto log_path = train_log_path(out_path);
  write_train_log_csv(result.log, log_path);
  std::cout << "trained " << config.train_episodes << " episodes; checkpoint " << out_path
            << "; log " << log_path.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& baseline_name,
             const std::string& config_path, const Overrides& overrides,
             const std::string& out_path) {
  if (checkpoint_path.empty() == baseline_name.empty())
    throw UsageError("pass exactly one of a checkpoint path or --baseline");

  RunConfig config;
  std::vector<EpisodeRecord> records;
  if (!checkpoint_path.empty()) {
    const auto checkpoint = load_checkpoint(checkpoint_path);
    config = checkpoint.config;
    if (!config_path.empty()) {
      config = load_config_or_usage(config_path);
      require_compatible(checkpoint, config);
    }
    apply(overrides, config, /*episodes_are_training=*/false);
    records = evaluate_actor(checkpoint.actor, config);
  } else {
    const auto kind = baseline_from_name(baseline_name);
    if (!config_path.empty()) {
      config = load_config_or_usage(config_path);
    } else if (overrides.seed) {
      config = RunConfig{};
      config.seed = *overrides.seed;
    } else {
      throw UsageError("baseline evaluation needs --config or --seed");
    }
    apply(overrides, config, /*episodes_are_training=*/false);
    records = evaluate_baseline(kind, config);
  }

  const auto metrics = compute_metrics(records);
  SweepTable table;
  table.rows.push_back({config, metrics});
  emit_csv(table, std::filesystem::path(out_path));
  std::cout << "success_ratio=" << metrics.success_ratio
            << " mean_stopping_time=" << metrics.mean_stopping_time
            << " fail_a=" << metrics.fail_threshold_never_reached
            << " fail_b=" << metrics.fail_wrong_declaration << " episodes=" << metrics.episodes
            << "; csv " << out_path << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const Overrides& overrides,
              const std::string& out_path) {
  json j;
  {
    std::ifstream in(config_path);
    if (!in) throw UsageError("cannot read config file: " + config_path);
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw UsageError("config is not valid json: " + std::string(e.what()));
    }
  }

  RunConfig base;
  SweepGrid grid;
  try {
    if (j.is_object() && (j.contains("base") || j.contains("grid"))) {
      for (const auto& item : j.items())
        if (item.key() != "base" && item.key() != "grid")
          throw std::invalid_argument("unknown sweep config key \"" + item.key() + "\"");
      base = parse_run_config(j.at("base"));
      if (j.contains("grid")) grid = parse_sweep_grid(j.at("grid"));
    } else {
      base = parse_run_config(j);
    }
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  apply(overrides, base, /*episodes_are_training=*/false);

  const auto table = sweep(base, grid);
  emit_csv(table, std::filesystem::path(out_path));
  for (const auto& failure : table.failures) std::cerr << "warning: " << failure << '\n';
  std::cout << table.rows.size() << " rows written to " << out_path;
  if (!table.failures.empty()) std::cout << " (" << table.failures.size() << " cells failed)";
  std::cout << '\n';
  if (table.rows.empty()) throw std::runtime_error("every sweep cell failed");
  return 0;
}

int cmd_gradcheck(const std::string& config_path, const Overrides& overrides) {
  RunConfig config;
  config.seed = 0;
  if (!config_path.empty()) config = load_config_or_usage(config_path);
  if (overrides.seed) config.seed = *overrides.seed;

  constexpr double kTolerance = 1e-5;
  constexpr int kNetsPerHead = 10;
  double worst = 0.0;
  bool pass = true;
  int checked = 0;

  for (int i = 0; i < kNetsPerHead; ++i) {
    auto [actor, critic] = make_actor_critic(config.n_processes, config.hidden_widths,
                                             config.actor_lr, config.critic_lr,
                                             derive_seed(config.seed, Stream::Generic, i));
    auto input_rng = make_stream(config.seed, Stream::Generic, 1000 + i);
    for (const Mlp* net : {&actor, &critic}) {
      GradientCheckReport report;
      for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<double> input(static_cast<std::size_t>(net->input_dim()));
        double sum = 0.0;
        for (auto& x : input) {
          x = input_rng.next_unit() + 1e-3;
          sum += x;
        }
        for (auto& x : input) x /= sum;
        report = gradient_check(*net, input, kTolerance);
        if (!report.kink_excluded) break;
      }
      worst = std::max(worst, report.max_rel_error);
      pass = pass && report.pass;
      ++checked;
    }
  }

  std::cout << "gradient check: " << checked << " nets, max relative error " << worst
            << " (tolerance " << kTolerance << "): " << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"anomaly detection over noisy sensors with a learned probing policy"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  Overrides overrides;
  std::uint64_t seed_value = 0;
  int episodes_value = 0;
  double pi_upper_value = 0.0;
  double lambda_value = 0.0;
  double rho_value = 0.0;

  const auto add_common = [&](CLI::App* cmd, bool with_config_required) {
    auto* config_opt =
        cmd->add_option("--config", config_path, "json run configuration")->type_name("PATH");
    if (with_config_required) config_opt->required();
    cmd->add_option("--seed", seed_value, "master seed override")->type_name("U64");
    cmd->add_option("--pi-upper", pi_upper_value, "stopping threshold override")->type_name("F");
    cmd->add_option("--lambda", lambda_value, "sensing cost override")->type_name("F");
    cmd->add_option("--rho", rho_value, "pair coupling override")->type_name("F");
    cmd->add_option("--episodes", episodes_value, "episode count override")->type_name("N");
  };

  auto* train_cmd = app.add_subcommand("train", "train an agent and write a checkpoint");
  add_common(train_cmd, true);
  train_cmd->add_option("--out", out_path, "checkpoint output path")
      ->type_name("PATH")
      ->default_val("checkpoint.json");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint or a baseline policy");
  std::string checkpoint_path;
  std::string baseline_name;
  eval_cmd->add_option("checkpoint", checkpoint_path, "trained checkpoint")->type_name("PATH");
  eval_cmd->add_option("--baseline", baseline_name, "baseline policy instead of a checkpoint")
      ->check(CLI::IsMember({"random", "all", "roundrobin"}));
  add_common(eval_cmd, false);
  eval_cmd->add_option("--out", out_path, "metrics csv path")
      ->type_name("PATH")
      ->default_val("metrics.csv");

  auto* sweep_cmd = app.add_subcommand("sweep", "train and evaluate over a parameter grid");
  add_common(sweep_cmd, true);
  sweep_cmd->add_option("--out", out_path, "sweep csv path")
      ->type_name("PATH")
      ->default_val("sweep.csv");

  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference validation of the network gradients");
  add_common(gradcheck_cmd, false);

  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("csense");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& s : full) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  if (active->count("--seed")) overrides.seed = seed_value;
  if (active->count("--episodes")) overrides.episodes = episodes_value;
  if (active->count("--pi-upper")) overrides.pi_upper = pi_upper_value;
  if (active->count("--lambda")) overrides.lambda = lambda_value;
  if (active->count("--rho")) overrides.rho = rho_value;

  try {
    if (active == train_cmd) return cmd_train(config_path, overrides, out_path);
    if (active == eval_cmd)
      return cmd_eval(checkpoint_path, baseline_name, config_path, overrides, out_path);
    if (active == sweep_cmd) return cmd_sweep(config_path, overrides, out_path);
    return cmd_gradcheck(config_path, overrides);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace csense
