#pragma once

#include "rwcert/rng.hpp"
#include "rwcert/types.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace rwcert {

enum class ProposalFamily { gaussian, laplace };

const char* to_string(ProposalFamily f);
ProposalFamily parse_proposal_family(const std::string& name);

struct BoxProbability {
  double value = 0.0;
  double std_error = 0.0;  // nonzero only for the QMC path
  std::string method;      // "product", "quadrature" or "qmc"
};

/// Symmetric random-walk increment density q(||z||), strictly decreasing in
/// the radius and positive everywhere.
///
///   gaussian: q(r) = (2 pi s^2)^{-p/2} exp(-r^2 / (2 s^2))
///   laplace:  q(r) = exp(-r/s) / (p C_B(p) Gamma(p) s^p)
class RadialProposal {
 public:
  static RadialProposal gaussian(int p, double sigma);
  static RadialProposal laplace(int p, double s);

  int dim() const { return p_; }
  ProposalFamily family() const { return family_; }
  double scale() const { return scale_; }
  bool separable() const { return family_ == ProposalFamily::gaussian || p_ == 1; }

  double log_q(double r) const;
  double q(double r) const { return std::exp(log_q(r)); }
  double q0() const { return std::exp(log_q0_); }
  double log_q0() const { return log_q0_; }

  /// q(||x - y||)
  double density_at(const Vec& x, const Vec& y) const;

  /// Q(0, B(0,K)^c)
  double tail_mass(double K) const;
  /// Smallest K with Q(0, B(0,K)^c) <= eps.
  double tail_radius(double eps) const;

  /// Q(0, [lo, hi]). Exact for separable families; nested adaptive
  /// quadrature for p <= 3; randomized quasi-Monte Carlo above that.
  BoxProbability box_probability(const Vec& lo, const Vec& hi, std::uint64_t qmc_seed = 0) const;

  Vec sample_increment(Rng& rng) const;
  /// Radius of an increment; used by the radial KS check.
  double radial_cdf(double r) const { return 1.0 - tail_mass(r); }

  /// Strong-convexity constant m1 of V = -log q (Gaussian only: 1/s^2).
  double spectral_m1() const;
  /// V(0) = -log q(0).
  double v_dagger_0() const { return -log_q0_; }
  std::string describe() const;

 private:
  RadialProposal(ProposalFamily f, int p, double scale);
  ProposalFamily family_;
  int p_;
  double scale_;
  double log_q0_;
};

}  // namespace rwcert
