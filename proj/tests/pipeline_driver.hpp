#pragma once

// In-process driver for the prefopt command line over the bundled fixtures.

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "prefopt/pipeline.hpp"

namespace prefopt::testing {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"prefopt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = pipeline::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("prefopt_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

/// Runs every stage over the hermetic fixture into `out`; returns the first
/// failing result, or the last one.
inline CliResult run_hermetic(const std::filesystem::path& fixtures, const std::filesystem::path& out) {
  const auto f = (fixtures / "hermetic").string();
  const std::vector<std::string> base{"--config", f + "/config.txt", "--out", out.string()};
  const std::vector<std::vector<std::string>> stages{
      {"validate", "--problems", f + "/problems.jsonl", "--candidates", f + "/candidates.jsonl"},
      {"evaluate", "--rules", f + "/mock_rules.jsonl"},
      {"rank"},
      {"partition"},
      {"pairs"},
      {"loss", "--inputs", f + "/loss_inputs.jsonl"},
      {"metrics"},
      {"report"},
  };
  CliResult last;
  for (const auto& s : stages) {
    auto args = base;
    args.insert(args.end(), s.begin(), s.end());
    last = cli(args);
    if (last.code != 0) return last;
  }
  return last;
}

}  // namespace prefopt::testing
