#include "rwcert/geometry.hpp"

#include "rwcert/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwcert {

double ConeParams::eps_alpha_tilde() const { return std::sqrt(8.0 - 8.0 * std::cos(alpha)); }

void ConeParams::validate() const {
  std::ostringstream os;
  if (!(K > 0.0 && K <= 1.0 / 3.0)) {
    os << "cone: K=" << K << " violates 0 < K <= 1/3";
    throw ValidationError(os.str());
  }
  if (!(alpha > 0.0 && alpha < std::acos(7.0 / 8.0))) {
    os << "cone: alpha=" << alpha << " violates 0 < alpha < acos(7/8)";
    throw ValidationError(os.str());
  }
  const double limit = std::min(eps_alpha_tilde(), 1.0 / 3.0);
  if (!(eps_alpha > 0.0 && eps_alpha < limit)) {
    os << "cone: eps_alpha=" << eps_alpha << " violates 0 < eps_alpha < min(eps_alpha_tilde, 1/3) = " << limit;
    throw ValidationError(os.str());
  }
  if (eps_override && !(*eps_override > 0.0)) throw ValidationError("cone: eps override must be positive");
}

double default_eps_alpha(double eta) {
  if (!(eta > 0.0)) throw ValidationError("cone: eta must be positive to derive eps_alpha");
  return std::min(eta, 0.3) * (1.0 - 1e-9);
}

double cone_radius(const ConeParams& params) {
  params.validate();
  const double t = 1.0 - params.eps_alpha * params.eps_alpha / 8.0;
  const double s = std::sqrt(1.0 - t * t);
  return params.K * t * s / (1.0 + s);
}

BoxProbability cone_box_probability(const RadialProposal& prop, int p, const ConeParams& params) {
  if (prop.dim() != p) throw ValidationError("geometry: proposal dimension does not match p");
  const double h = cone_radius(params) / std::sqrt(double(p));
  Vec lo = Vec::Constant(p, -h), hi = Vec::Constant(p, h);
  lo[0] -= 1.0;
  hi[0] -= 1.0;
  return prop.box_probability(lo, hi);
}

double drift_factor(const RadialProposal& prop, int p, const ConeParams& params) {
  const BoxProbability box = cone_box_probability(prop, p, params);
  if (!(box.value > 0.0)) throw NumericError("geometry: degenerate cone volume (box probability is 0)");
  return 1.0 - box.value / (1.0 + params.eps_alpha);
}

EpsDelta epsilon_delta(const RadialProposal& prop, int p, const ConeParams& params) {
  const BoxProbability box = cone_box_probability(prop, p, params);
  if (!(box.value > 0.0)) throw NumericError("geometry: degenerate cone volume (box probability is 0)");
  EpsDelta out;
  out.box_mass = box.value;
  out.eps_max = 0.125 * params.eps_alpha / (1.0 + params.eps_alpha) * box.value;
  if (params.eps_override) {
    if (*params.eps_override > out.eps_max) {
      std::ostringstream os;
      os << "geometry: eps override " << *params.eps_override << " exceeds its maximum " << out.eps_max;
      throw ValidationError(os.str());
    }
    out.eps = *params.eps_override;
  } else {
    out.eps = out.eps_max;
  }
  out.K_eps = prop.tail_radius(out.eps);
  out.delta = out.eps / (2.0 * prop.q0() * unit_ball_volume(p) * std::pow(out.K_eps, p - 1));
  return out;
}

}  // namespace rwcert
