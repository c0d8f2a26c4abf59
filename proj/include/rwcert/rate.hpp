#pragma once

#include "rwcert/drift.hpp"
#include "rwcert/proposal.hpp"
#include "rwcert/target.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rwcert {

struct RosenthalResult {
  double t_R = 1.0;
  double r_star = 0.5;
  double A = 0.0;
  double alpha_tilde = 0.0;
  double log_A = 0.0;
  double log_alpha_tilde = 0.0;
  double log_t_R = 0.0;
  bool crossing = false;  // r_star is the interior crossing point
  bool vacuous = true;
};

/// log of max{(1 - eta~)^r, alpha~^{-(1-r)} A^r}.
double rosenthal_log_objective(double eta_tilde, double log_A, double log_alpha_tilde, double r);

/// Minimizes the objective over r in [1e-6, 1 - 1e-6]. Both branches are
/// linear in r on the log scale, so the optimum is the crossing point when
/// it lies inside, else an endpoint.
RosenthalResult rosenthal_minimize(double eta_tilde, double log_A, double log_alpha_tilde);

/// From the drift constants: A = (2 lambda (b + eps_a) + 2b)/(1 - lambda),
/// alpha~ = (1 - lambda + 2b + eps_a)/(1 - lambda + 2b + lambda eps_a).
RosenthalResult rosenthal_upper(double eta_tilde, double lambda_tilde, double b, double eps_alpha);
RosenthalResult rosenthal_upper_log(double log_eta_tilde, double lambda_tilde, double log_b, double eps_alpha);

/// 2 + b/(1 - lambda) + f(x)^{-1/2}.
double m_coefficient(double lambda_tilde, double b, double f_at_x);
double log_m_coefficient(double lambda_tilde, double log_b, double log_f_at_x);

enum class LowerMethod { acceptance, bounded_proposal, mode, spectral_dirichlet, spectral_conductance };
const char* to_string(LowerMethod m);

struct LowerBound {
  LowerMethod method;
  double value = 0.0;  // floored into [0, 1)
  double raw = 0.0;    // before flooring
  bool floored = false;
  bool vacuous = false;  // value <= 0
  double std_error = 0.0;
  std::map<std::string, std::string> metadata;
};

enum class SpectralMode { dirichlet, conductance };

/// Spectral lower bounds on rho for a Gaussian-type proposal potential
/// V = -log q with V(0) = V_dagger_0:
///   dirichlet:   1 - (1/2) L p e^{-V(0)} / J^{p/2+1}
///   conductance: 1 - (2 pi)^{p/2} e^{-V(0)} / (m + m1)^{p/2}, valid when the ratio is < 1.
double spectral_lower(SpectralMode mode, double m, double m1, double L, int p, double V_dagger_0, double J_tilde);

struct SpectralParams {
  std::optional<double> m;  // strong log-concavity of the target
  std::optional<double> L;  // gradient Lipschitz constant of -log f
};

struct LowerOptions {
  std::vector<Vec> candidates;
  bool auto_candidates = true;
  long n_mc = 20000;
  std::uint64_t seed = 1;
  SpectralParams spectral;
};

/// Automatic candidates: the mode and mode +/- {1,2,4} * scale * e_i.
std::vector<Vec> auto_candidates(const TargetBundle& bundle, const RadialProposal& prop);

/// Mode-based bound 1 - E[f(x* + Z)]/p*; quadrature for p <= 2, MC otherwise.
LowerBound mode_lower_bound(const TargetBundle& bundle, const RadialProposal& prop, long n_mc, std::uint64_t seed);

std::vector<LowerBound> lower_bounds(const TargetBundle& bundle, const RadialProposal& prop, const LowerOptions& opts,
                                     std::vector<std::string>* notices = nullptr);

struct RateReport {
  RosenthalResult upper;
  std::vector<LowerBound> lower;
  /// 2 + b/(1 - lambda~); the full coefficient adds f(x)^{-1/2}.
  double log_M_coefficient = 0.0;
  double M_coefficient = 0.0;
  NormQuality norm_quality = NormQuality::exact;
  std::vector<std::string> notices;
};

RateReport rate_report(const DriftMinCert& cert, const TargetBundle& bundle, const RadialProposal& prop,
                       const LowerOptions& opts);

}  // namespace rwcert
