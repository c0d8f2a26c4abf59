#pragma once

#include "rwcert/rng.hpp"
#include "rwcert/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rwcert {

/// Normalized log-density on R^p with its gradient (and optionally Hessian).
///
/// log_density already includes log_norm_offset: user supplies an
/// unnormalized log-density u(x) and an offset c0 with u + c0 = log f.
struct LogTarget {
  int dim = 1;
  std::function<double(const Vec&)> log_density;
  std::function<Vec(const Vec&)> grad_log_density;
  std::function<Mat(const Vec&)> hess_log_density;  // may be empty
  double log_norm_offset = 0.0;
  NormQuality norm_quality = NormQuality::exact;
};

/// Strictly increasing rate function u -> f_s(u) on [0, inf).
///
/// inverse(x) returns 0 (the domain infimum) whenever x <= f_s(0). Affine
/// functions are inverted exactly; anything else by bisection.
class RateFunction {
 public:
  RateFunction() = default;
  static RateFunction affine(double slope, double intercept = 0.0);
  static RateFunction general(std::function<double(double)> f, std::string descr);

  double operator()(double u) const;
  double inverse(double x) const;

  bool is_affine() const { return affine_; }
  double slope() const { return slope_; }
  double intercept() const { return intercept_; }
  const std::string& describe() const { return descr_; }

  friend RateFunction operator+(const RateFunction& a, const RateFunction& b);
  static RateFunction pointwise_min(const RateFunction& a, const RateFunction& b);

 private:
  bool affine_ = true;
  double slope_ = 1.0;
  double intercept_ = 0.0;
  std::function<double(double)> f_;
  std::string descr_ = "u";
};

/// Non-decreasing radial bound r -> f~(r) on |log f(x)| at ||x|| = r.
struct Envelope {
  std::function<double(double)> fn;
  std::string descr;
  double operator()(double r) const { return fn(r); }
};

struct SuperexpCert {
  RateFunction f_s;
  double C1 = 0.0;
  double M_s = 0.0;
};

struct CurvatureCert {
  double eta = 0.5;
  double M_p = 0.0;
};

struct TargetBundle {
  std::string name;
  LogTarget target;
  Envelope envelope;
  SuperexpCert superexp;
  std::optional<CurvatureCert> curvature;
  Vec mode;
  double log_p_star = 0.0;
  double p_star = 0.0;
  double M_star = 0.0;
  std::vector<std::string> warnings;

  int dim() const { return target.dim; }
  double log_f(const Vec& x) const { return target.log_density(x); }
};

struct ModeResult {
  Vec mode;
  double log_p_star = 0.0;
  double p_star = 0.0;
  int iterations = 0;
};

class ModeNotConverged : public NumericError {
 public:
  ModeNotConverged(const std::string& what, Vec last) : NumericError(what), last_(std::move(last)) {}
  const Vec& last_iterate() const { return last_; }

 private:
  Vec last_;
};

/// Newton with backtracking when a Hessian is available, otherwise gradient
/// ascent with an Armijo line search. Stops when ||grad|| < tol.
ModeResult find_mode(const LogTarget& target, const Vec& init, double tol = 1e-8,
                     int max_iter = 500);

inline constexpr double kEtaCeiling = 1.0 - 1e-6;

/// Assembles a bundle: clamps eta into (0, 1) with a warning, locates the
/// mode from `init`, sets M* = max(M_s, M_p).
TargetBundle make_bundle(std::string name, LogTarget target, Envelope envelope,
                         SuperexpCert superexp, std::optional<CurvatureCert> curvature,
                         const Vec& init, double mode_tol = 1e-8);

/// Standard normal on R^p with f_s(u)=u, C1=0, f~(r)=r^2/2 + (p/2)log(2 pi), eta=0.99.
TargetBundle normal_bundle(int p = 1);

// -- combinators -----------------------------------------------------------

/// f = f1 f2. The product is not normalized in general; pass
/// `assert_normalized` when the caller knows it is, otherwise the result is
/// flagged approximate.
TargetBundle combine_product(const TargetBundle& b1, const TargetBundle& b2,
                             bool assert_normalized = false);

/// f = a1 f1 + a2 f2.
TargetBundle combine_mixture(const TargetBundle& b1, const TargetBundle& b2, double a1, double a2);

enum class MixtureEnvelope {
  /// component envelope max{a,1} z^2 + |log(sqrt(a)/pi)|, which bounds |log f_i| at the origin
  corrected,
  /// component envelope max{a,1} z^2 + sqrt(a)/pi as originally stated; fails near 0 when a < pi^2
  literal,
};

/// Two-component Gaussian mixture in R^2:
/// f = (sqrt(a)/2pi) [exp(-a x^2 - y^2) + exp(-x^2 - a y^2)].
TargetBundle gaussian_mixture_bundle(double a, MixtureEnvelope env = MixtureEnvelope::corrected);

// -- assumption checks -----------------------------------------------------

struct CheckFinding {
  Vec x;
  double radius = 0.0;
  double value = 0.0;  // left-hand side
  double bound = 0.0;  // right-hand side
  double margin() const { return bound - value; }
};

struct CheckSummary {
  std::string name;
  bool enabled = true;
  int n_checked = 0;
  std::vector<CheckFinding> failures;
  std::optional<CheckFinding> worst;  // smallest margin seen
  bool passed() const { return failures.empty(); }
};

struct AssumptionReport {
  CheckSummary superexponential;
  CheckSummary curvature;
  CheckSummary envelope;
  CheckSummary log_concavity;
  std::vector<double> radii;
  int n_directions = 0;
  std::uint64_t seed = 0;
  bool all_passed() const;
};

struct VerifyOptions {
  std::vector<double> radii;  // empty: max(M*,1) * {1.1, 1.5, 2, 4, 8}
  int n_directions = 64;
  std::uint64_t seed = 1;
  bool check_log_concavity = true;
  std::vector<Vec> extra_points;
  double tol = 1e-9;
};

std::vector<double> default_verify_radii(const TargetBundle& bundle);

/// Numeric falsification of the declared certificates at r * xi for sampled
/// unit directions xi. A failure refutes the certificate; passing is evidence only.
AssumptionReport verify_assumptions(const TargetBundle& bundle, const VerifyOptions& opts);

/// Sampled unit vector, uniform on the sphere.
Vec random_direction(int p, Rng& rng);

}  // namespace rwcert
