#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qcfa {

/// Base of every library error. Carries the process exit code the CLI maps it to.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code = 2)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what, 1) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations), 2), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "machine validation failed:";
    for (const auto& s : v) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

/// Structural problems found while analysing a run (caps, missing round structure, non-halting).
class AnalysisError : public Error {
 public:
  explicit AnalysisError(const std::string& what) : Error(what, 2) {}
};

class CertificationError : public Error {
 public:
  explicit CertificationError(const std::string& what) : Error(what, 3) {}
};

class CounterexampleError : public Error {
 public:
  explicit CounterexampleError(const std::string& what) : Error(what, 4) {}
};

}  // namespace qcfa
