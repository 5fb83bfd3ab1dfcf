// command-line front end: train / eval / baseline-eval / compare

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "madrive/harness.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

madrive::Config load_config_or_default(const std::string& path) {
  if (path.empty()) return madrive::Config{};
  return madrive::load_config(path);
}

std::optional<madrive::PseudoRealProfile> resolve_pseudo_real(
    const std::string& arg) {
  if (arg.empty()) return std::nullopt;
  if (arg == "default") return madrive::PseudoRealProfile::defaults();
  if (arg == "none") return std::nullopt;
  return madrive::load_pseudo_real(arg);
}

int run_train(const std::string& config_path, const std::string& level_name,
              const std::string& out, std::uint64_t seed, int episodes_override,
              int threads) {
  const madrive::Config cfg = load_config_or_default(config_path);
  madrive::TrainConfig train_cfg = cfg.train;
  if (episodes_override >= 0) train_cfg.episodes = episodes_override;
  const madrive::RandomizationLevel level = madrive::resolve_level(level_name);
  const madrive::TrackMap track = madrive::track_for(cfg);

  madrive::PolicyBundle policy = madrive::PolicyBundle::init(
      madrive::kObservationDim,
      (madrive::kObservationDim + 4) * cfg.env.n_agents, seed);

  const std::vector<madrive::UpdateStats> log = madrive::train(
      policy, track, cfg.env, train_cfg, level, seed, threads,
      [](const madrive::UpdateStats& s) {
        std::printf("update %4d  episodes %5d  mean_reward %9.4f  entropy %.4f\n",
                    s.update, s.episodes_done, s.mean_reward, s.entropy);
        std::fflush(stdout);
      });

  madrive::save_checkpoint(policy, out + ".ckpt");
  madrive::write_train_log_csv(log, out + "_train.csv");
  const double final_reward = log.empty() ? 0.0 : log.back().mean_reward;
  std::printf("final mean reward: %.6f\n", final_reward);
  std::printf("checkpoint: %s.ckpt\ntraining log: %s_train.csv\n", out.c_str(),
              out.c_str());
  return 0;
}

int run_eval(const std::string& policy_arg, const std::string& config_path,
             int runs, std::uint64_t seed, const std::string& pseudo_real_arg,
             const std::string& out, const std::string& log_dir, int threads) {
  const madrive::Config cfg = load_config_or_default(config_path);
  const madrive::TrackMap track = madrive::track_for(cfg);

  madrive::PolicyBundle bundle;
  madrive::EvalPolicy policy = madrive::EvalPolicy::rule_based(cfg.rss);
  if (policy_arg != "rule-based") {
    bundle = madrive::load_checkpoint(policy_arg);
    madrive::validate_dims(bundle, madrive::kObservationDim,
                           (madrive::kObservationDim + 4) * cfg.env.n_agents);
    policy = madrive::EvalPolicy::trained(bundle);
  }

  madrive::EvalOptions options;
  options.runs = runs;
  options.seed = seed;
  options.pseudo_real = resolve_pseudo_real(pseudo_real_arg);
  options.log_dir = log_dir;
  options.threads = threads;

  const std::vector<madrive::RunMetrics> metrics =
      madrive::evaluate_policy(track, cfg.env, policy, options);
  madrive::write_metrics_csv(metrics, out);

  const madrive::MetricsAggregate agg = madrive::aggregate_metrics(metrics);
  std::printf("%s over %d runs: mean_reward %.4f ± %.4f, mean_speed %.4f\n",
              policy_arg.c_str(), runs, agg.mean_reward_mean,
              agg.mean_reward_std, agg.mean_speed_mean);
  std::printf("metrics: %s\n", out.c_str());
  return 0;
}

int run_compare(const std::vector<std::string>& files, const std::string& out) {
  const madrive::CompareResult result = madrive::compare_metrics(files);
  std::fputs(madrive::format_compare_table(result).c_str(), stdout);
  if (!out.empty()) {
    madrive::write_compare_outputs(result, out);
    std::printf("\nwrote %s_summary.csv, %s_ratios.csv, %s_plot.dat\n",
                out.c_str(), out.c_str(), out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-agent track-driving simulator and MAPPO trainer"};
  app.require_subcommand(1);

  std::string config_path;
  std::string level_name = "none";
  std::string out;
  std::string policy_arg;
  std::string pseudo_real_arg;
  std::string log_dir;
  std::vector<std::string> compare_files;
  std::uint64_t seed = 0;
  int runs = 30;
  int episodes_override = -1;
  int threads = 1;

  CLI::App* train = app.add_subcommand("train", "train a policy with MAPPO");
  train->add_option("--config", config_path, "config file");
  train->add_option("--level", level_name,
                    "domain randomization level: none, med, high, or a file");
  train->add_option("--out", out, "output path prefix")->required();
  train->add_option("--seed", seed, "master seed");
  train->add_option("--episodes", episodes_override,
                    "override the configured episode count");
  train->add_option("--threads", threads, "worker threads");

  auto add_eval_options = [&](CLI::App* cmd, bool with_policy) {
    if (with_policy) {
      cmd->add_option("policy", policy_arg,
                      "checkpoint path or 'rule-based'")
          ->required();
    }
    cmd->add_option("--config", config_path, "config file");
    cmd->add_option("--runs", runs, "number of evaluation runs");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--pseudo-real", pseudo_real_arg,
                    "'default' or a pseudo-real profile file");
    cmd->add_option("--out", out, "metrics CSV path")->required();
    cmd->add_option("--log-dir", log_dir, "write per-run episode logs here");
    cmd->add_option("--threads", threads, "worker threads");
  };

  CLI::App* eval = app.add_subcommand("eval", "evaluate a policy greedily");
  add_eval_options(eval, true);

  CLI::App* baseline_eval = app.add_subcommand(
      "baseline-eval", "evaluate the rule-based baseline (eval alias)");
  add_eval_options(baseline_eval, false);

  CLI::App* compare =
      app.add_subcommand("compare", "compare metric CSVs from eval runs");
  compare->add_option("files", compare_files, "metric CSV files")
      ->required()
      ->expected(2, -1);
  compare->add_option("--out", out, "output file prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (train->parsed()) {
      return run_train(config_path, level_name, out, seed, episodes_override,
                       threads);
    }
    if (eval->parsed()) {
      return run_eval(policy_arg, config_path, runs, seed, pseudo_real_arg, out,
                      log_dir, threads);
    }
    if (baseline_eval->parsed()) {
      return run_eval("rule-based", config_path, runs, seed, pseudo_real_arg,
                      out, log_dir, threads);
    }
    if (compare->parsed()) {
      return run_compare(compare_files, out);
    }
  } catch (const madrive::NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const madrive::CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return kExitIo;
  } catch (const madrive::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const madrive::RandomizationError& e) {
    std::fprintf(stderr, "level error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitUsage;
}
