#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "prefopt/pipeline.hpp"

namespace prefopt::pipeline::detail {

struct StageSpec {
  std::string name;
  /// Artifact file names inside the output directory, written by earlier stages.
  std::vector<std::string> upstream;
  /// Files outside the pipeline (fixtures, tool output), keyed by the path given.
  std::vector<std::filesystem::path> external;
  std::vector<std::string> outputs;
};

/// Produces file name -> content for every name in StageSpec::outputs.
using Producer = std::function<std::map<std::string, std::string>()>;

Outcome run_stage(const Context& ctx, const StageSpec& spec, const Producer& produce);

}  // namespace prefopt::pipeline::detail
