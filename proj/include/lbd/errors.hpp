#pragma once

#include <stdexcept>
#include <string>

namespace lbd {

/// Invalid argument for the mathematical object (negative time, z > u, S <= T, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The inputs are valid but the requested quantity is outside the supported
/// regime (e.g. infinite horizon with a non-negative net drift for gamma).
class UnsupportedRegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure ran out of budget before reaching its tolerance.
/// Carries whatever it had at that point.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double partial_value, double err_est)
      : std::runtime_error(what), partial_value_(partial_value), err_est_(err_est) {}

  double partial_value() const noexcept { return partial_value_; }
  double err_est() const noexcept { return err_est_; }

 private:
  double partial_value_;
  double err_est_;
};

/// Monte Carlo budget exceeded; the estimate over the paths that did run is kept.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, long long achieved_paths, double estimate = 0.0, double std_error = 0.0)
      : std::runtime_error(what), achieved_paths_(achieved_paths), estimate_(estimate), std_error_(std_error) {}
  long long achieved_paths() const noexcept { return achieved_paths_; }
  double estimate() const noexcept { return estimate_; }
  double std_error() const noexcept { return std_error_; }

 private:
  long long achieved_paths_;
  double estimate_;
  double std_error_;
};

}  // namespace lbd
