#include <cmath>
#include <ostream>
#include <fstream>

#include "rankseg/cli.hpp"
#include "rankseg/error.hpp"

namespace rankseg::cli {
namespace {

struct RuleName {
  Rule rule;
  const char* name;
};

constexpr RuleName kRules[] = {
    {Rule::argmax, "argmax"},
    {Rule::threshold, "threshold"},
    {Rule::rankdice_exact, "rankdice-exact"},
    {Rule::rankdice_ba, "rankdice-ba"},
    {Rule::rankdice_rma, "rankdice-rma"},
    {Rule::rankiou_exact, "rankiou-exact"},
    {Rule::rankiou_rma, "rankiou-rma"},
};

constexpr ScoreKind kScores[] = {ScoreKind::rma_dice, ScoreKind::rma_iou, ScoreKind::prob,
                                 ScoreKind::wprob};

}  // namespace

const char* to_string(Rule rule) noexcept {
  for (const auto& entry : kRules) {
    if (entry.rule == rule) return entry.name;
  }
  return "unknown";
}

Rule parse_rule(const std::string& text) {
  for (const auto& entry : kRules) {
    if (text == entry.name) return entry.rule;
  }
  throw Error(ErrorCode::invalid_argument, "unknown rule '" + text + "'");
}

ScoreKind parse_score(const std::string& text) {
  for (auto kind : kScores) {
    if (text == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::invalid_argument, "unknown score '" + text + "'");
}

std::vector<std::string> rule_names() {
  std::vector<std::string> out;
  for (const auto& entry : kRules) out.emplace_back(entry.name);
  return out;
}

std::vector<std::string> score_names() {
  std::vector<std::string> out;
  for (auto kind : kScores) out.emplace_back(to_string(kind));
  return out;
}

bool is_rank_rule(Rule rule) noexcept {
  return rule != Rule::argmax && rule != Rule::threshold;
}

void validate(const RunConfig& config) {
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "--threshold must lie in [0, 1]");
  }
  if (config.exact_cap == 0) throw Error(ErrorCode::invalid_argument, "--exact-cap must be positive");
  for (double q : config.quantiles) {
    if (!(q > 0.0 && q <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "--quantiles values must lie in (0, 1]");
    }
  }
}

Json number(double value) {
  if (!std::isfinite(value)) return nullptr;
  const double rounded = std::round(value * 1e6) / 1e6;
  return rounded == 0.0 ? 0.0 : rounded;  // no "-0.0"
}

Json config_json(const RunConfig& config) {
  Json j;
  j["rule"] = to_string(config.rule);
  j["score"] = to_string(config.score);
  j["threshold"] = number(config.threshold);
  j["exclude_background"] = config.exclude_background;
  j["exact_cap"] = config.exact_cap;
  Json qs = Json::array();
  for (double q : config.quantiles) qs.push_back(number(q));
  j["quantiles"] = qs;
  j["seed"] = config.seed;
  return j;
}

void emit_json(const Json& doc, const std::optional<std::filesystem::path>& out,
               std::ostream& stdout_stream) {
  const std::string text = doc.dump(2) + "\n";
  if (!out) {
    stdout_stream << text;
    return;
  }
  std::ofstream file(*out, std::ios::binary);
  if (!file) throw Error(ErrorCode::io, "cannot write " + out->string());
  file << text;
  if (!file) throw Error(ErrorCode::io, "write failed for " + out->string());
}

}  // namespace rankseg::cli
