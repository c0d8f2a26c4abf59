#pragma once

#include "rwcert/proposal.hpp"

#include <optional>

namespace rwcert {

inline const double kDefaultConeAlpha = 0.999 * std::acos(7.0 / 8.0);

struct ConeParams {
  double K = 1.0 / 3.0;
  double eps_alpha = 0.2;
  double alpha = kDefaultConeAlpha;
  /// Smaller epsilon than the default maximum; must not exceed it.
  std::optional<double> eps_override;

  /// sqrt(8 - 8 cos alpha)
  double eps_alpha_tilde() const;
  /// Throws ValidationError naming the violated constraint.
  void validate() const;
};

/// eps_alpha default from a curvature margin: min(eta, 0.3) * (1 - 1e-9).
double default_eps_alpha(double eta);

/// R_alpha = K t sqrt(1-t^2) / (1 + sqrt(1-t^2)), t = 1 - eps_alpha^2/8.
double cone_radius(const ConeParams& params);

/// Q(0, [-R/sqrt(p)-1, R/sqrt(p)-1] x [-R/sqrt(p), R/sqrt(p)]^{p-1}).
BoxProbability cone_box_probability(const RadialProposal& prop, int p, const ConeParams& params);

/// lambda~ = 1 - Q(box) / (1 + eps_alpha).
double drift_factor(const RadialProposal& prop, int p, const ConeParams& params);

struct EpsDelta {
  double eps = 0.0;
  double delta = 0.0;
  double K_eps = 0.0;
  double box_mass = 0.0;
  double eps_max = 0.0;
};

/// eps = (1/8) (eps_alpha/(1+eps_alpha)) Q(box) unless overridden,
/// K_eps = tail_radius(eps), delta = eps / (2 q(0) C_B(p) K_eps^{p-1}).
EpsDelta epsilon_delta(const RadialProposal& prop, int p, const ConeParams& params);

}  // namespace rwcert
