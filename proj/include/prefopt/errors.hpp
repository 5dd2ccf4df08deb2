#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prefopt {

/// Precondition violated by a caller (bad n/c/k, damping outside [0,1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent input data. Carries the file and 1-based line
/// when the error can be located.
class DataError : public std::runtime_error {
 public:
  enum class Kind { parse, schema, reference };

  DataError(Kind kind, std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(locate(file, line) + what), kind_(kind), file_(std::move(file)), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string locate(const std::string& file, std::size_t line) {
    if (file.empty()) return {};
    if (line == 0) return file + ": ";
    return file + ":" + std::to_string(line) + ": ";
  }

  Kind kind_;
  std::string file_;
  std::size_t line_;
};

/// An upstream artifact is missing or no longer matches the manifest.
class StaleInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An evaluation backend failed on a specific candidate.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad config file or flag value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace prefopt
