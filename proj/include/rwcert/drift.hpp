#pragma once

#include "rwcert/geometry.hpp"
#include "rwcert/proposal.hpp"
#include "rwcert/target.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rwcert {

/// Full drift/minorization constant set for V(x) = f(x)^{-1/2} and nu
/// uniform on B(0, R_max). b and eta~ routinely over- or underflow double
/// precision, so their logs are the primary values; the linear values may be
/// +inf or 0.
struct DriftMinCert {
  ConeParams cone;
  double R_alpha = 0.0;
  double box_mass = 0.0;
  double lambda_tilde = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  double K_eps = 0.0;

  /// Candidates for R_eps in order: escape radius, shell bracket term
  /// (NaN when skipped at p = 1), level-set term, M* + K_eps floor.
  std::array<double, 4> R_eps_terms{};
  int R_eps_argmax = 0;
  double R_eps = 0.0;

  double log_b = 0.0;
  double b = 0.0;
  double R_max = 0.0;
  double log_eta_tilde = 0.0;
  double eta_tilde = 0.0;
  bool vacuous = false;

  int p = 1;
  double M_star = 0.0;
  double log_p_star = 0.0;
  NormQuality norm_quality = NormQuality::exact;
  std::vector<std::string> warnings;

  double small_set_radius() const { return R_max; }
  static constexpr const char* drift_fn_descr = "V(x)=f(x)^{-1/2}";
  static constexpr const char* nu_descr = "uniform on closed ball B(0,R_max)";
};

/// log eta~ below this is reported as vacuous.
inline constexpr double kVacuousLogEta = -700.0;

DriftMinCert drift_certificate(const TargetBundle& bundle, const RadialProposal& prop, const ConeParams& params);

/// Same pipeline with an explicit envelope; the GLM presets use the data
/// quadratic here.
DriftMinCert drift_certificate(const TargetBundle& bundle, const RadialProposal& prop,
                               const ConeParams& params, const Envelope& envelope);

// -- empirical checks ------------------------------------------------------

struct DriftPoint {
  Vec x;
  double radius = 0.0;
  double log_V = 0.0;
  /// E[PV(x)]/V(x) estimated by MC, and its standard error.
  double ratio = 0.0;
  double ratio_se = 0.0;
  /// log of the MC estimate of PV(x).
  double log_PV = 0.0;
  /// log(lambda~ V(x) + b)
  double log_bound = 0.0;
  bool drift_pass = true;
  bool ratio_checked = false;  // only beyond R_eps
  bool ratio_pass = true;
};

struct DriftReport {
  std::vector<DriftPoint> points;
  int n = 0;
  std::uint64_t seed = 0;
  double se_multiplier = 3.0;
  std::vector<std::string> notes;
  bool passed() const;
};

/// MC estimate of PV at each point with n proposals per point. Passes when
/// PV <= lambda~ V + b + k SE, and additionally PV/V <= lambda~ + k SE beyond R_eps.
DriftReport verify_drift_mc(const DriftMinCert& cert, const TargetBundle& bundle, const RadialProposal& prop,
                            const std::vector<Vec>& points, int n, std::uint64_t seed, double se_multiplier = 3.0);

/// n_points points on [0, r_hi] along sampled directions (p > 1) or the positive axis.
std::vector<Vec> drift_probe_points(int p, double r_hi, int n_points, std::uint64_t seed);

struct MinorOptions {
  double extent = 8.0;  // grid half-width, capped at R_max
  int cells_per_axis = 64;
  int n_x = 50;
  int n_sets = 200;
  double union_density = 0.3;
  double quad_tol = 1e-8;
  std::uint64_t seed = 1;
};

struct MinorFailure {
  Vec x;
  std::string set;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct MinorReport {
  int n_x = 0;
  int n_sets = 0;
  int n_checks = 0;
  double worst_margin = 0.0;
  double min_ball_mass = 0.0;  // min over x of the accepted mass inside B(0,R_max)
  double quad_tol = 0.0;
  double max_quad_error = 0.0;
  std::vector<MinorFailure> failures;
  bool passed() const { return failures.empty(); }
};

/// Quadrature check of P(x, A) >= eta~ nu(A) over x in B(0, R_max) and A
/// ranging over grid cells, random cell unions and the whole ball. Only the
/// absolutely continuous part of P is counted. p <= 2.
MinorReport verify_minorization_grid(const DriftMinCert& cert, const TargetBundle& bundle,
                                     const RadialProposal& prop, const MinorOptions& opts);

}  // namespace rwcert
