#include <iostream>

#include "CLI11.hpp"
#include "rankseg/cli.hpp"
#include "rankseg/error.hpp"
#include "rankseg/parallel.hpp"

namespace rankseg::cli {
namespace {

struct CommonFlags {
  std::string rule = "rankdice-rma";
  std::string score = "rma-dice";
  std::string quantiles;
  std::optional<int> threads;
};

void add_rule_flags(CLI::App& app, RunConfig& config, CommonFlags& flags) {
  app.add_option("--rule", flags.rule, "decision rule")
      ->check(CLI::IsMember(rule_names()))
      ->capture_default_str();
  app.add_option("--score", flags.score, "overlap score for multiclass rank rules")
      ->check(CLI::IsMember(score_names()))
      ->capture_default_str();
  app.add_option("--threshold", config.threshold, "cutoff for --rule threshold")
      ->capture_default_str();
  app.add_option("--exact-cap", config.exact_cap, "largest d accepted by the exact rules")
      ->capture_default_str();
}

void add_metric_flags(CLI::App& app, RunConfig& config, CommonFlags& flags) {
  app.add_flag("--exclude-background,!--include-background", config.exclude_background,
               "leave class 0 out of every average (default on)");
  app.add_option("--quantiles", flags.quantiles,
                 "comma-separated q values for worst-q means, e.g. 0.05,0.1");
}

void add_run_flags(CLI::App& app, RunConfig& config, CommonFlags& flags) {
  app.add_option("--seed", config.seed, "64-bit seed for synthetic data")->capture_default_str();
  app.add_option("--threads", flags.threads, "OpenMP threads (falls back to RANKSEG_THREADS)");
}

std::vector<double> parse_quantiles(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) {
      std::size_t used = 0;
      double q = 0.0;
      try {
        q = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size()) throw Error(ErrorCode::invalid_argument, "bad quantile '" + item + "'");
      out.push_back(q);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{
      "rankseg: rank-based decision rules for segmentation probability maps.\n"
      "Inputs and outputs are NPY files. Multiclass maps are (C, ...) with the class\n"
      "axis first; output labels are 0-based class indices."};
  app.require_subcommand(1);

  RunConfig config;
  CommonFlags flags;

  PredictArgs predict;
  std::string mode = "auto";
  auto* predict_cmd = app.add_subcommand("predict", "write one mask or label file per input map");
  predict_cmd->add_option("inputs", predict.inputs, "input files, directories or glob patterns")
      ->required();
  predict_cmd->add_option("--out", predict.out_dir, "output directory")->required();
  predict_cmd->add_option("--mode", mode, "input interpretation")
      ->check(CLI::IsMember({"auto", "binary", "multiclass"}))
      ->capture_default_str();
  add_rule_flags(*predict_cmd, config, flags);
  add_run_flags(*predict_cmd, config, flags);

  EvaluateArgs evaluate;
  std::string evaluate_out;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score predicted labels against ground truth");
  evaluate_cmd->add_option("pred_dir", evaluate.pred_dir, "directory of predicted label files")
      ->required();
  evaluate_cmd->add_option("gt_dir", evaluate.gt_dir, "directory of ground-truth label files")
      ->required();
  evaluate_cmd->add_option("--out", evaluate_out, "write the JSON report here instead of stdout");
  add_metric_flags(*evaluate_cmd, config, flags);
  add_run_flags(*evaluate_cmd, config, flags);

  BenchArgs bench;
  std::string bench_out;
  std::string kind = "uniform";
  bool no_rules = false;
  auto* bench_cmd = app.add_subcommand("bench", "time decision rules on synthetic maps");
  bench_cmd->add_option("--sizes", bench.sizes, "pixel counts, comma-separated")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--trials", bench.trials, "timed runs per cell")->capture_default_str();
  bench_cmd->add_option("--rules", bench.rules, "rules to time, comma-separated")
      ->delimiter(',')
      ->check(CLI::IsMember(rule_names()))
      ->capture_default_str();
  bench_cmd->add_flag("--no-rules", no_rules, "time nothing (empty table)");
  bench_cmd->add_option("--kind", kind, "synthetic map family")
      ->check(CLI::IsMember({"uniform", "blobby"}))
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "write the JSON here; the table then goes to stdout");
  bench_cmd->add_option("--threshold", config.threshold, "cutoff for the threshold rule");
  bench_cmd->add_option("--exact-cap", config.exact_cap, "exact rules are skipped above this d")
      ->capture_default_str();
  add_run_flags(*bench_cmd, config, flags);

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "cross-check the rules against brute force");
  oracle_cmd->add_option("--instances", oracle.instances, "random instances")->capture_default_str();
  oracle_cmd->add_option("--d-min", oracle.d_min, "smallest d")->capture_default_str();
  oracle_cmd->add_option("--d-max", oracle.d_max, "largest d (at most 15)")->capture_default_str();
  oracle_cmd->add_flag("--inject-fault", oracle.inject_fault, "corrupt the rule output (harness self-test)");
  add_run_flags(*oracle_cmd, config, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    config.rule = parse_rule(flags.rule);
    config.score = parse_score(flags.score);
    config.quantiles = parse_quantiles(flags.quantiles);
    config.threads = flags.threads;
    validate(config);
    set_threads(resolve_threads(config.threads));
  } catch (const std::exception& e) {
    std::cerr << "rankseg: " << e.what() << "\n";
    return 1;
  }

  if (*predict_cmd) {
    predict.mode = mode == "binary"       ? Mode::binary
                   : mode == "multiclass" ? Mode::multiclass
                                          : Mode::auto_detect;
    return cmd_predict(predict, config, std::cerr);
  }
  if (*evaluate_cmd) {
    if (!evaluate_out.empty()) evaluate.out = evaluate_out;
    return cmd_evaluate(evaluate, config, std::cout, std::cerr);
  }
  if (*bench_cmd) {
    if (no_rules) bench.rules.clear();
    bench.kind = kind == "blobby" ? synthetic::Kind::blobby : synthetic::Kind::uniform;
    if (!bench_out.empty()) bench.out = bench_out;
    return cmd_bench(bench, config, std::cout, std::cerr);
  }
  return cmd_oracle_check(oracle, config, std::cout, std::cerr);
}

}  // namespace rankseg::cli
