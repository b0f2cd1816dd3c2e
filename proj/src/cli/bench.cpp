#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "rankseg/cli.hpp"
#include "rankseg/error.hpp"

namespace rankseg::cli {
namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

bool is_exact(Rule rule) noexcept {
  return rule == Rule::rankdice_exact || rule == Rule::rankiou_exact;
}

struct Row {
  Rule rule;
  std::size_t d;
  bool skipped = false;
  double median_seconds = 0.0;
  double min_seconds = 0.0;
};

const Row* find_row(const std::vector<Row>& rows, Rule rule, std::size_t d) {
  for (const auto& row : rows) {
    if (row.rule == rule && row.d == d && !row.skipped) return &row;
  }
  return nullptr;
}

}  // namespace

Json run_bench(const BenchArgs& args, const RunConfig& config) {
  validate(config);
  if (args.trials == 0) throw Error(ErrorCode::invalid_argument, "--trials must be positive");
  std::vector<Rule> rules;
  for (const auto& name : args.rules) rules.push_back(parse_rule(name));

  std::vector<Row> rows;
  for (std::size_t d : args.sizes) {
    if (rules.empty()) break;
    if (d == 0) throw Error(ErrorCode::invalid_argument, "bench sizes must be positive");
    const BinaryProbMap probs(synthetic::probabilities(d, args.kind, config.seed ^ d));
    for (Rule rule : rules) {
      Row row{rule, d};
      if (is_exact(rule) && d > config.exact_cap) {
        row.skipped = true;
        rows.push_back(row);
        continue;
      }
      RunConfig rc = config;
      rc.rule = rule;
      predict_binary(probs, rc);  // warm-up
      std::vector<double> times;
      for (std::size_t t = 0; t < args.trials; ++t) {
        const auto start = std::chrono::steady_clock::now();
        const auto mask = predict_binary(probs, rc);
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        if (mask.size() != d) throw Error(ErrorCode::shape_mismatch, "bench produced a wrong-size mask");
      }
      row.median_seconds = median(times);
      row.min_seconds = *std::min_element(times.begin(), times.end());
      rows.push_back(row);
    }
  }

  Json timings = Json::array();
  for (const auto& row : rows) {
    Json j;
    j["rule"] = to_string(row.rule);
    j["d"] = row.d;
    if (row.skipped) {
      j["skipped"] = "d exceeds exact-cap";
    } else {
      j["median_seconds"] = row.median_seconds;
      j["min_seconds"] = row.min_seconds;
      j["trials"] = args.trials;
    }
    timings.push_back(j);
  }

  Json speedups = Json::array();
  for (std::size_t d : args.sizes) {
    const auto* ba = find_row(rows, Rule::rankdice_ba, d);
    const auto* rma = find_row(rows, Rule::rankdice_rma, d);
    if (!ba || !rma) continue;
    Json j;
    j["d"] = d;
    j["ba_seconds"] = ba->median_seconds;
    j["rma_seconds"] = rma->median_seconds;
    j["ratio"] = ba->median_seconds / rma->median_seconds;
    speedups.push_back(j);
  }

  Json scaling = Json::array();
  for (Rule rule : rules) {
    for (std::size_t i = 0; i + 1 < args.sizes.size(); ++i) {
      const auto* a = find_row(rows, rule, args.sizes[i]);
      const auto* b = find_row(rows, rule, args.sizes[i + 1]);
      if (!a || !b) continue;
      Json j;
      j["rule"] = to_string(rule);
      j["d_from"] = args.sizes[i];
      j["d_to"] = args.sizes[i + 1];
      j["size_ratio"] = static_cast<double>(args.sizes[i + 1]) / static_cast<double>(args.sizes[i]);
      j["time_ratio"] = b->median_seconds / a->median_seconds;
      scaling.push_back(j);
    }
  }

  Json setup;
  setup["kind"] = args.kind == synthetic::Kind::uniform ? "uniform" : "blobby";
  setup["trials"] = args.trials;
  setup["sizes"] = args.sizes;
  setup["rules"] = args.rules;

  Json doc;
  doc["config"] = config_json(config);
  doc["bench"] = setup;
  doc["timings"] = timings;
  doc["speedups"] = speedups;
  doc["scaling"] = scaling;
  return doc;
}

std::string bench_table(const Json& bench) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %12s %14s %14s\n", "rule", "d", "median_s", "min_s");
  out << line;
  for (const auto& row : bench["timings"]) {
    const auto rule = row["rule"].get<std::string>();
    const auto d = row["d"].get<std::size_t>();
    if (row.contains("skipped")) {
      std::snprintf(line, sizeof line, "%-16s %12zu %14s %14s\n", rule.c_str(), d, "skipped", "-");
    } else {
      std::snprintf(line, sizeof line, "%-16s %12zu %14.6f %14.6f\n", rule.c_str(), d,
                    row["median_seconds"].get<double>(), row["min_seconds"].get<double>());
    }
    out << line;
  }
  for (const auto& s : bench["speedups"]) {
    std::snprintf(line, sizeof line, "speedup ba/rma at d=%zu: %.2fx\n", s["d"].get<std::size_t>(),
                  s["ratio"].get<double>());
    out << line;
  }
  for (const auto& s : bench["scaling"]) {
    std::snprintf(line, sizeof line, "scaling %s %zu -> %zu: size x%.1f, time x%.2f\n",
                  s["rule"].get<std::string>().c_str(), s["d_from"].get<std::size_t>(),
                  s["d_to"].get<std::size_t>(), s["size_ratio"].get<double>(),
                  s["time_ratio"].get<double>());
    out << line;
  }
  return out.str();
}

int cmd_bench(const BenchArgs& args, const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const auto doc = run_bench(args, config);
    // The table goes wherever the JSON does not.
    if (args.out) {
      emit_json(doc, args.out, out);
      out << bench_table(doc);
    } else {
      err << bench_table(doc);
      emit_json(doc, std::nullopt, out);
    }
  } catch (const std::exception& e) {
    err << "rankseg bench: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rankseg::cli
