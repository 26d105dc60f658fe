#pragma once

#include <stdexcept>
#include <string>

namespace bwlab {

// Argument outside the documented domain of a function (x <= 0, a >= x, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A series, tail sum or iteration did not settle within its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A quantity defined over an infinite horizon was requested where the
// simulated horizon (plus its resolved tail) does not determine it.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad experiment configuration or CLI usage. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Too few samples / degenerate data for a statistical procedure.
class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bwlab
