#pragma once

// JSON Lines reading/writing for the core-model files, plus the small file
// utilities every stage shares (atomic writes, SHA-256 digests).

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "prefopt/model.hpp"

namespace prefopt {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

/// Calls `fn(object, line_number)` for each non-blank line of a JSON Lines
/// file. Malformed JSON or a non-object line raises a located DataError.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn);

/// Field accessors that raise DataError(schema) naming file, line and key.
struct JsonlCursor {
  const Json& obj;
  const std::string& file;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const;
  std::string str(const char* key) const;
  bool boolean(const char* key) const;
  double number(const char* key) const;
  std::optional<Gas> gas(const char* key) const;
  bool has(const char* key) const;
};

std::vector<Problem> read_problems(const std::filesystem::path& path);
std::vector<Candidate> read_candidates(const std::filesystem::path& path);
std::vector<EvalRecord> read_evals(const std::filesystem::path& path);

OrderedJson to_json(const Problem& p);
OrderedJson to_json(const Candidate& c);
OrderedJson to_json(const EvalRecord& e);

template <typename Range>
std::string to_jsonl(const Range& items) {
  std::string out;
  for (const auto& item : items) {
    out += to_json(item).dump();
    out += '\n';
  }
  return out;
}

/// Writes to a sibling temporary file and renames it into place.
void atomic_write(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Fixed six-decimal rendering used by the CSV and text reports.
std::string format_fixed(double v, int decimals = 6);

}  // namespace prefopt
