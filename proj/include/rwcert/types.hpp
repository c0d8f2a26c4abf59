#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rwcert {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Whether the log normalizing constant attached to a target is analytic or estimated.
enum class NormQuality { exact, approximate };

inline const char* to_string(NormQuality q) {
  return q == NormQuality::exact ? "exact" : "approximate";
}

inline NormQuality combine(NormQuality a, NormQuality b) {
  return (a == NormQuality::exact && b == NormQuality::exact) ? NormQuality::exact
                                                              : NormQuality::approximate;
}

/// Bad input: a violated precondition or an invalid parameter combination.
/// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that could not finish (non-convergence, degenerate volume,
/// tolerance not met). The CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric failure that still carries the best available estimate.
class ToleranceError : public NumericError {
 public:
  ToleranceError(const std::string& what, double best_estimate, double error_estimate)
      : NumericError(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}
  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

}  // namespace rwcert
