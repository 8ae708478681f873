#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace toolsynth {

// Precondition violations (dimension mismatch, wrong transform kind, ...) are
// reported as std::invalid_argument. The types below map onto CLI exit codes.

/// Bad configuration or usage. Exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or codec failure. Exit code 2.
class IoError : public std::runtime_error {
 public:
  IoError(const std::filesystem::path& path, const std::string& cause)
      : std::runtime_error(path.string() + ": " + cause), path_(path) {}

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// A generation step could not satisfy an engine invariant. Exit code 3.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace toolsynth
