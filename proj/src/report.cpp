#include <map>
#include <set>
#include <sstream>

#include "prefopt/errors.hpp"
#include "prefopt/harness.hpp"
#include "prefopt/io.hpp"
#include "prefopt/pairs.hpp"
#include "prefopt/pipeline.hpp"

namespace prefopt::pipeline {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

struct MetricsCsv {
  std::vector<int> ks;
  std::map<int, std::vector<std::string>> all;  // k -> pass, compile, gas, secure
  std::set<std::string> problems;
  std::set<std::string> gas_na;
};

MetricsCsv parse_metrics_csv(const fs::path& path) {
  MetricsCsv m;
  std::stringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto cells = split_csv_line(line);
    if (cells.size() != 6) throw DataError(DataError::Kind::parse, path.string(), lineno, "expected 6 columns");
    const int k = std::stoi(cells[1]);
    if (cells[0] == "ALL") {
      m.ks.push_back(k);
      m.all[k] = {cells[2], cells[3], cells[4], cells[5]};
    } else {
      m.problems.insert(cells[0]);
      if (cells[4] == "NA") m.gas_na.insert(cells[0]);
    }
  }
  return m;
}

}  // namespace

std::string render_report(const fs::path& out_dir) {
  auto need = [&](const char* name) {
    auto p = out_dir / name;
    if (!fs::exists(p)) throw StaleInputError(std::string("missing artifact ") + name);
    return p;
  };
  const auto problems = read_problems(need("problems.jsonl"));
  const auto candidates = read_candidates(need("candidates.jsonl"));
  const auto evals = read_evals(need("evals.jsonl"));
  const auto partition = read_partition(need("partition.jsonl"));
  const auto pairs = read_pairs(need("pairs.jsonl"));
  const auto metrics = parse_metrics_csv(need("metrics.csv"));

  std::size_t compiled = 0, passed = 0, gas_measured = 0;
  for (const auto& e : evals) {
    compiled += e.compiled;
    passed += e.passed;
    gas_measured += e.gas.has_value();
  }

  std::ostringstream out;
  out << "# Preference dataset report\n\n";
  out << "## Dataset funnel\n\n"
      << "| Stage | Count |\n|---|---:|\n"
      << "| Problems | " << problems.size() << " |\n"
      << "| Generated candidates | " << candidates.size() << " |\n"
      << "| Evaluated candidates | " << evals.size() << " |\n"
      << "| Compiled candidates | " << compiled << " |\n"
      << "| Valid candidates (pass all tests) | " << passed << " |\n"
      << "| Gas-measured candidates | " << gas_measured << " |\n\n";

  std::map<Category, std::size_t> seeds;
  for (const auto& [pid, cat] : partition) ++seeds[cat];
  std::map<Objective, std::size_t> by_objective;
  for (const auto& p : pairs) ++by_objective[p.objective];

  out << "## Preference pairs\n\n"
      << "| Category | Problem seeds | Pairs |\n|---|---:|---:|\n"
      << "| Correctness optimization samples | " << seeds[Category::correctness] << " | "
      << by_objective[Objective::correctness] << " |\n"
      << "| Security-related samples | " << seeds[Category::security] << " | " << by_objective[Objective::security]
      << " |\n"
      << "| Gas optimization samples | " << seeds[Category::gas] << " | " << by_objective[Objective::gas] << " |\n"
      << "| **Total preference pairs** | **"
      << seeds[Category::correctness] + seeds[Category::security] + seeds[Category::gas] << "** | **" << pairs.size()
      << "** |\n\n";
  if (seeds[Category::unassigned] > 0) out << "Unassigned problem seeds: " << seeds[Category::unassigned] << "\n\n";

  out << "## Task@k\n\n";
  if (metrics.ks.empty()) {
    out << "no data\n\n";
  } else {
    out << "| Metric |";
    for (int k : metrics.ks) out << " @" << k << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < metrics.ks.size(); ++i) out << "---:|";
    out << '\n';
    const char* names[] = {"Pass", "Compile", "Gas", "Secure"};
    for (std::size_t m = 0; m < 4; ++m) {
      out << "| " << names[m] << " |";
      for (int k : metrics.ks) out << ' ' << metrics.all.at(k)[m] << " |";
      out << '\n';
    }
    out << "\nProblems scored: " << metrics.problems.size() << "\n";
    out << "Excluded from Gas@k (no reference gas):";
    if (metrics.gas_na.empty()) out << " none";
    for (const auto& id : metrics.gas_na) out << ' ' << id;
    out << "\n\n";
  }

  out << "## Loss summary\n\n";
  const auto loss_path = out_dir / "loss_report.jsonl";
  if (!fs::exists(loss_path)) {
    out << "not computed\n";
  } else {
    Json summary;
    for_each_jsonl(loss_path, [&](const Json& obj, std::size_t) {
      if (obj.contains("summary")) summary = obj["summary"];
    });
    if (summary.is_null()) throw DataError(DataError::Kind::schema, loss_path.string(), 0, "no summary line");
    out << "Pairs scored: " << summary["count"].get<std::size_t>() << "\n\n"
        << "| Term | Batch mean | Batch sum |\n|---|---:|---:|\n";
    for (const char* term : {"l_dpo", "r_g", "r_v", "r_extra", "l_total"}) {
      out << "| " << term << " | " << format_fixed(summary["mean"][term].get<double>()) << " | "
          << format_fixed(summary["sum"][term].get<double>()) << " |\n";
    }
    const auto& p = summary["params"];
    out << "\nalpha=" << format_fixed(p["alpha"].get<double>(), 3) << " beta=" << format_fixed(p["beta"].get<double>(), 3)
        << " lambda=" << format_fixed(p["lambda"].get<double>(), 3)
        << " dpo_temperature=" << format_fixed(p["dpo_temperature"].get<double>(), 3)
        << " gas_reward_mode=" << p["gas_reward_mode"].get<std::string>() << "\n";
  }
  return out.str();
}

}  // namespace prefopt::pipeline
