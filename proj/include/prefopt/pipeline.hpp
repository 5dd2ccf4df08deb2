#pragma once

// File-based pipeline stages. Every stage reads its upstream artifacts from
// the output directory, checks them against the manifest, and writes its own
// artifacts atomically. A stage whose inputs and config are unchanged since
// its last run does nothing.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prefopt/config.hpp"

namespace prefopt::pipeline {

inline constexpr const char* kToolVersion = "prefopt 0.1.0";
inline constexpr const char* kManifestName = "manifest.json";
inline constexpr const char* kBackendEnv = "PREFOPT_BACKEND";

struct StageRecord {
  std::string config_digest;
  std::map<std::string, std::string> inputs;   // name -> sha256
  std::map<std::string, std::string> outputs;  // artifact file name -> sha256

  bool operator==(const StageRecord&) const = default;
};

class Manifest {
 public:
  /// Empty manifest when the file does not exist.
  static Manifest load(const std::filesystem::path& out_dir);
  void save(const std::filesystem::path& out_dir) const;

  const StageRecord* stage(const std::string& name) const;
  /// Stage name that last wrote `artifact`, if any.
  std::optional<std::string> producer_of(const std::string& artifact) const;
  /// Records `name`, dropping any other stage that claimed one of its outputs.
  void record(const std::string& name, StageRecord rec, const std::string& config_text);

  std::string render() const;

 private:
  std::string config_text_;
  std::map<std::string, StageRecord> stages_;
};

struct Context {
  std::filesystem::path out_dir = "out";
  Config config;
  std::ostream* log = nullptr;  // progress lines; null to silence
};

enum class Outcome { ran, up_to_date };

struct ValidateInputs {
  std::filesystem::path problems;
  std::filesystem::path candidates;
  std::optional<std::filesystem::path> evals;
};

/// Throws DataError listing every violation when the dataset is not clean.
Outcome cmd_validate(const Context& ctx, const ValidateInputs& in);

enum class BackendKind { mock, replay };

/// `source` is the mock rule file or the replay raw-results file.
Outcome cmd_evaluate(const Context& ctx, BackendKind backend, const std::filesystem::path& source);
Outcome cmd_ingest(const Context& ctx, const std::filesystem::path& raw_results);
Outcome cmd_rank(const Context& ctx, const std::optional<std::filesystem::path>& tests = std::nullopt);
Outcome cmd_partition(const Context& ctx);
Outcome cmd_pairs(const Context& ctx);
Outcome cmd_loss(const Context& ctx, const std::filesystem::path& loss_inputs);
Outcome cmd_metrics(const Context& ctx);
Outcome cmd_report(const Context& ctx);

/// Markdown summary built from the artifacts in `out_dir`.
std::string render_report(const std::filesystem::path& out_dir);

/// Entry point for the `prefopt` executable. Exit codes: 0 success,
/// 1 located data error, 2 usage or config error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prefopt::pipeline
