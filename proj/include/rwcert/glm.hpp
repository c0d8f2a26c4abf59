#pragma once

#include "rwcert/drift.hpp"
#include "rwcert/proposal.hpp"
#include "rwcert/rate.hpp"
#include "rwcert/target.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rwcert {

/// n observations: covariate rows of X (n x p) and sufficient statistics T(y_i) as rows of T (n x m).
struct GLMData {
  Mat X;
  Mat T;
  int n() const { return int(X.rows()); }
  int p() const { return int(X.cols()); }
  int m() const { return int(T.cols()); }
  void validate() const;
};

/// CSV with a header row "y,x1,...,xp". Rejects NaN/Inf and malformed rows
/// with the offending (1-based, header = 1) line number.
GLMData load_glm_csv(const std::string& path);
GLMData parse_glm_csv(const std::string& text, const std::string& source = "<string>");

enum class PriorKind { strongly_convex, dissipative };

/// Negative log prior g (up to a constant) and its derivatives.
struct PriorSpec {
  std::function<double(const Vec&)> g;
  std::function<Vec(const Vec&)> grad_g;
  std::function<Mat(const Vec&)> hess_g;
  double lambda2 = 1.0;  // Lipschitz constant of grad g
  PriorKind kind = PriorKind::strongly_convex;
  double lambda1 = 1.0;  // strong convexity (strongly_convex)
  double a_dag = 0.0;    // dissipativity (dissipative)
  double b_dag = 0.0;
  std::string descr;

  double gamma() const { return kind == PriorKind::strongly_convex ? lambda1 : a_dag; }
  void validate() const;
};

/// N(0, tau2 I): g = ||theta||^2 / (2 tau2), lambda1 = lambda2 = 1/tau2.
PriorSpec gaussian_prior(double tau2 = 1.0);

/// Spot-check ||grad g(a) - grad g(b)|| <= lambda2 ||a - b|| on sampled pairs.
/// Returns the largest observed ratio.
double prior_lipschitz_ratio(const PriorSpec& prior, int p, int n_pairs, std::uint64_t seed);

enum class CumulantCase { bounded_gradient, convex_bounded_curvature };
const char* to_string(CumulantCase c);

struct GLMConstants {
  double lambda_data = 0.0;
  double K_data = 0.0;
  CumulantCase cumulant_case = CumulantCase::bounded_gradient;
  PriorKind prior_kind = PriorKind::strongly_convex;
  double sum_T = 0.0;  // sum of ||T(y_i)||
  double C1 = 0.0;
  double K1 = 0.0, K2 = 0.0, K3 = 0.0;
  double J_tilde = 0.0;
  double lambda2 = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  double Mp_prime = 1.0;
  std::string route;  // "general" or "logistic"

  double f_xy(double u) const { return K1 + K2 * u + K3 * u * u; }
};

struct GLMZeroTerms {
  double max_norm_Pi0 = 0.0;  // max_i ||Pi(0, x_i)||
  double max_abs_c0 = 0.0;    // max_i |c(0, x_i)|
};

/// Constants for a general exponential-family GLM posterior. Sums over the
/// n observations enter K2, K3 and J~ with their factor n.
GLMConstants glm_constants(const GLMData& data, const PriorSpec& prior, double lambda_data, double K_data,
                           CumulantCase cumulant_case, const std::vector<Vec>& grad_c_at_0, double eta,
                           const GLMZeroTerms& zero = {});

/// Logistic regression with N(0, I) prior, closed-form constants:
/// C1 = K2 = max||x_i|| (n + sum|y_i|), K1 = 0, K3 = 1, lambda2 = 1 + lambda_max(X'X)/4,
/// M'_p = max[(C1 + max||x_i|| sum|y_i| + n)/(1 - eta lambda2), 1].
GLMConstants logistic_constants(const Mat& X, const Vec& y, double eta);

/// Largest eta allowed: gamma/lambda2 (exclusive).
double logistic_eta_limit(const Mat& X);

enum class NormalizerMethod { laplace, quadrature, user };

struct NormalizerOptions {
  NormalizerMethod method = NormalizerMethod::laplace;
  double user_log_normalizer = 0.0;  // log integral of the unnormalized density
};

/// log integral of exp(u) for an unnormalized log-density u with a mode.
/// Laplace: u(m) + (p/2) log 2pi - (1/2) log det(-H). Quadrature: p <= 2.
double log_normalizer(const std::function<double(const Vec&)>& u, const std::function<Mat(const Vec&)>& hess,
                      const Vec& mode, NormalizerMethod method);

/// Posterior prop. to exp(<theta, sum x_i> - n c(theta) - g(theta)); data rows are the statistics.
struct CumulantFn {
  std::function<double(const Vec&)> c;
  std::function<Vec(const Vec&)> grad_c;
  std::function<Mat(const Vec&)> hess_c;  // optional
  double hessian_bound = 0.0;             // sup ||hess c||, used in the envelope
};

TargetBundle expfam_posterior(const GLMData& data, const CumulantFn& cumulant, const PriorSpec& prior,
                              std::optional<double> eta = std::nullopt, const NormalizerOptions& norm = {});

struct LogisticResult {
  TargetBundle bundle;
  GLMConstants constants;
  DriftMinCert cert;
  RateReport rate;
};

/// Logistic posterior bundle (f_s(u) = u, envelope f_xy + |log normalizer offset|).
TargetBundle logistic_bundle(const Mat& X, const Vec& y, const GLMConstants& k, const NormalizerOptions& norm = {});

LogisticResult logistic_preset(const Mat& X, const Vec& y, const RadialProposal& prop,
                               std::optional<double> eta = std::nullopt, std::optional<ConeParams> cone = std::nullopt,
                               const LowerOptions& lower = {}, const NormalizerOptions& norm = {});

/// Poisson posterior prop. to exp{sum(y_i x_i'theta - exp(x_i'theta)) - g(theta)}.
TargetBundle poisson_bundle(const Mat& X, const Vec& y, const PriorSpec& prior, const NormalizerOptions& norm = {});

/// 1 - 1/(f(theta*) (2 pi h)^{p/2}) for a Gaussian proposal with covariance h I.
double poisson_lower_formula(double f_at_mode, double h, int p);

struct PoissonResult {
  TargetBundle bundle;
  double lower_bound = 0.0;
  bool near_vacuous = false;
  std::vector<std::string> warnings;
};

PoissonResult poisson_preset(const Mat& X, const Vec& y, const PriorSpec& prior, const RadialProposal& prop,
                             const NormalizerOptions& norm = {});

}  // namespace rwcert
