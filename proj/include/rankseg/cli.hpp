#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rankseg/metrics.hpp"
#include "rankseg/multiclass.hpp"
#include "rankseg/rank_binary.hpp"
#include "rankseg/synthetic.hpp"

namespace rankseg::cli {

using Json = nlohmann::ordered_json;

enum class Rule {
  argmax,
  threshold,
  rankdice_exact,
  rankdice_ba,
  rankdice_rma,
  rankiou_exact,
  rankiou_rma,
};

const char* to_string(Rule rule) noexcept;
Rule parse_rule(const std::string& text);
ScoreKind parse_score(const std::string& text);
std::vector<std::string> rule_names();
std::vector<std::string> score_names();

enum class Mode { auto_detect, binary, multiclass };

struct RunConfig {
  Rule rule = Rule::rankdice_rma;
  ScoreKind score = ScoreKind::rma_dice;
  double threshold = 0.5;
  bool exclude_background = true;
  std::size_t exact_cap = kDefaultExactCap;
  std::vector<double> quantiles;
  std::optional<int> threads;
  std::uint64_t seed = 0;
};

/// Throws Error(invalid_argument) on out-of-range values.
void validate(const RunConfig& config);
bool is_rank_rule(Rule rule) noexcept;
Json config_json(const RunConfig& config);

/// Rounds to 6 decimals; non-finite values become null.
Json number(double value);
void emit_json(const Json& doc, const std::optional<std::filesystem::path>& out, std::ostream& stdout_stream);

/// Applies a binary rule to a probability map.
BinaryMask predict_binary(const BinaryProbMap& probs, const RunConfig& config);
/// Multiclass dispatch; only argmax and the RMA rules apply.
LabelMap predict_multiclass(const MulticlassProbMap& probs, const RunConfig& config);

/// Report document without the "timings" key. Aggregates and quantiles that
/// have no eligible values are null.
Json metric_report_json(const std::vector<ImageScores>& images, const RunConfig& config);

struct PredictArgs {
  std::vector<std::string> inputs;  // paths or glob patterns
  std::filesystem::path out_dir;
  Mode mode = Mode::auto_detect;
};
int cmd_predict(const PredictArgs& args, const RunConfig& config, std::ostream& err);

struct EvaluateArgs {
  std::filesystem::path pred_dir;
  std::filesystem::path gt_dir;
  std::optional<std::filesystem::path> out;
};
/// Builds the report, or returns nullopt after printing why to `err`.
std::optional<Json> evaluate_report(const EvaluateArgs& args, const RunConfig& config, std::ostream& err);
int cmd_evaluate(const EvaluateArgs& args, const RunConfig& config, std::ostream& out, std::ostream& err);

struct BenchArgs {
  std::vector<std::size_t> sizes{std::size_t{1} << 16, std::size_t{1} << 20};
  std::size_t trials = 5;
  std::vector<std::string> rules{"rankdice-rma"};
  synthetic::Kind kind = synthetic::Kind::uniform;
  std::optional<std::filesystem::path> out;
};
Json run_bench(const BenchArgs& args, const RunConfig& config);
std::string bench_table(const Json& bench);
int cmd_bench(const BenchArgs& args, const RunConfig& config, std::ostream& out, std::ostream& err);

struct OracleArgs {
  std::size_t instances = 500;
  std::size_t d_min = 1;
  std::size_t d_max = 10;
  bool inject_fault = false;
};
/// 0 when every check passes, 2 on any violation, 1 on bad arguments.
int cmd_oracle_check(const OracleArgs& args, const RunConfig& config, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace rankseg::cli
