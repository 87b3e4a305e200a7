#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qmlab {

/// Raised when an operation's inputs violate its contract (shape mismatch,
/// element outside an ideal, a ball element with D > 1, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative routine stopped at its cap without a decision. Carries the best
/// bracket [lo, hi] known at that point.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), lo_(lo), hi_(hi) {}
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Invalid experiment configuration; lists every offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> fields)
      : std::runtime_error(join(fields)), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const noexcept { return fields_; }

 private:
  static std::string join(const std::vector<std::string>& fields) {
    std::string out = "invalid config:";
    for (const auto& f : fields) out += " " + f + ";";
    return out;
  }
  std::vector<std::string> fields_;
};

}  // namespace qmlab
