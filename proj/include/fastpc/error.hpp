#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fastpc {

/// Argument outside an operation's domain (empty queue, empty flow set, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative solver failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation engine misuse or runaway (past scheduling, event cap).
class SimulationError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scenario description rejected; carries every offending field.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

}  // namespace fastpc
