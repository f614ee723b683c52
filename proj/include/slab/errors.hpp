#pragma once

#include <stdexcept>
#include <string>

namespace slab {

// Argument outside the domain of an analytic continuation (branch cut, z = 0, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// A numerical procedure failed to reach its tolerance or hit a singular system.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what, double achieved = 0.0)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

// Invalid physical input or configuration; `field` names the offending entry.
class ConfigError : public std::invalid_argument {
public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

}  // namespace slab
