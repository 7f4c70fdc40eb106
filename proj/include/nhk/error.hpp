#pragma once

#include <stdexcept>
#include <string>

namespace nhk {

/// Argument outside the domain of a formula or operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A model fails one of the standing hypotheses (Ric >= rho > 0, convex boundary).
class GeometryError : public std::runtime_error {
 public:
  GeometryError(std::string hypothesis, const std::string& what)
      : std::runtime_error(what), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nhk
