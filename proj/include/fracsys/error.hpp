#pragma once

#include <stdexcept>
#include <string>

namespace fracsys {

/// Input outside the mathematical domain of an operation (bad order parameter,
/// empty ball, singular matrix, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical solve that did not produce a usable answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected experiment configuration; the CLI maps this to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fracsys
