#include "rwcert/proposal.hpp"

#include "rwcert/numerics.hpp"
#include "rwcert/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwcert {

const char* to_string(ProposalFamily f) { return f == ProposalFamily::gaussian ? "gaussian" : "laplace"; }

ProposalFamily parse_proposal_family(const std::string& name) {
  if (name == "gaussian") return ProposalFamily::gaussian;
  if (name == "laplace") return ProposalFamily::laplace;
  throw ValidationError("proposal: unknown family '" + name + "' (expected gaussian or laplace)");
}

RadialProposal::RadialProposal(ProposalFamily f, int p, double scale) : family_(f), p_(p), scale_(scale) {
  if (p < 1) throw ValidationError("proposal: dimension must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("proposal: scale must be positive and finite");
  if (f == ProposalFamily::gaussian) {
    log_q0_ = -0.5 * p * std::log(2.0 * kPi * scale * scale);
  } else {
    // Normalizer p C_B(p) Gamma(p) s^p from integrating exp(-r/s) over spherical shells.
    log_q0_ = -(std::log(double(p)) + log_unit_ball_volume(p) + std::lgamma(double(p)) + p * std::log(scale));
  }
}

RadialProposal RadialProposal::gaussian(int p, double sigma) { return {ProposalFamily::gaussian, p, sigma}; }

RadialProposal RadialProposal::laplace(int p, double s) { return {ProposalFamily::laplace, p, s}; }

double RadialProposal::log_q(double r) const {
  if (family_ == ProposalFamily::gaussian) return log_q0_ - 0.5 * (r * r) / (scale_ * scale_);
  return log_q0_ - r / scale_;
}

double RadialProposal::density_at(const Vec& x, const Vec& y) const {
  if (x.size() != p_ || y.size() != p_) throw ValidationError("proposal density_at: dimension mismatch");
  return q((x - y).norm());
}

double RadialProposal::tail_mass(double K) const {
  if (K <= 0.0) return 1.0;
  if (family_ == ProposalFamily::gaussian)
    return boost::math::gamma_q(0.5 * p_, 0.5 * (K * K) / (scale_ * scale_));
  return boost::math::gamma_q(double(p_), K / scale_);
}

double RadialProposal::tail_radius(double eps) const {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("tail_radius: eps must lie in (0,1)");
  // Closed-form inverse of the regularized upper incomplete gamma.
  if (family_ == ProposalFamily::gaussian)
    return scale_ * std::sqrt(2.0 * boost::math::gamma_q_inv(0.5 * p_, eps));
  return scale_ * boost::math::gamma_q_inv(double(p_), eps);
}

namespace {

double laplace1d_cdf(double x, double s) {
  return x < 0.0 ? 0.5 * std::exp(x / s) : 1.0 - 0.5 * std::exp(-x / s);
}

double laplace1d_interval(double a, double b, double s) {
  if (!(b > a)) return 0.0;
  if (a >= 0.0) return 0.5 * (std::exp(-a / s) - std::exp(-b / s));
  if (b <= 0.0) return 0.5 * (std::exp(b / s) - std::exp(a / s));
  return laplace1d_cdf(b, s) - laplace1d_cdf(a, s);
}

// Van der Corput radical inverse in base `b`.
double radical_inverse(std::uint64_t i, int b) {
  double inv = 1.0 / b, f = inv, v = 0.0;
  while (i > 0) {
    v += f * double(i % b);
    i /= b;
    f *= inv;
  }
  return v;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
                           73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151};

}  // namespace

BoxProbability RadialProposal::box_probability(const Vec& lo, const Vec& hi, std::uint64_t qmc_seed) const {
  if (lo.size() != p_ || hi.size() != p_) throw ValidationError("box_probability: dimension mismatch");
  for (int i = 0; i < p_; ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) throw ValidationError("box_probability: bounds must be finite");
    if (lo[i] > hi[i]) throw ValidationError("box_probability: lower bound exceeds upper bound");
    if (lo[i] == hi[i]) return {0.0, 0.0, "degenerate"};
  }

  if (separable()) {
    double prod = 1.0;
    for (int i = 0; i < p_; ++i)
      prod *= family_ == ProposalFamily::gaussian ? normal_interval(lo[i] / scale_, hi[i] / scale_)
                                                  : laplace1d_interval(lo[i], hi[i], scale_);
    return {std::clamp(prod, 0.0, 1.0), 0.0, "product"};
  }

  if (p_ <= 3) {
    constexpr double kTol = 1e-10;
    double worst_err = 0.0;
    // Innermost integrand over the last axis, nested outwards.
    auto radial = [this](double r2) { return std::exp(log_q(std::sqrt(r2))); };
    // The radial density has a cusp at the origin (laplace), so each axis is split at 0.
    auto integrate_axis = [&](auto&& inner, double a, double b) {
      auto piece = [&](double l, double h) {
        const QuadResult q = adaptive_gk(inner, l, h, 1e-13, 1e-13, 400);
        worst_err = std::max(worst_err, q.error);
        return q.value;
      };
      return a < 0.0 && b > 0.0 ? piece(a, 0.0) + piece(0.0, b) : piece(a, b);
    };
    double value;
    if (p_ == 2) {
      value = integrate_axis(
          [&](double x) {
            return integrate_axis([&](double y) { return radial(x * x + y * y); }, lo[1], hi[1]);
          },
          lo[0], hi[0]);
    } else {
      value = integrate_axis(
          [&](double x) {
            return integrate_axis(
                [&](double y) {
                  return integrate_axis([&](double z) { return radial(x * x + y * y + z * z); }, lo[2], hi[2]);
                },
                lo[1], hi[1]);
          },
          lo[0], hi[0]);
    }
    if (worst_err > kTol) throw ToleranceError("box_probability: quadrature tolerance 1e-10 not met", value, worst_err);
    return {std::clamp(value, 0.0, 1.0), 0.0, "quadrature"};
  }

  // Randomized Halton (Cranley-Patterson shifts): independent replicates give
  // an unbiased standard error.
  if (p_ > int(std::size(kPrimes))) throw ValidationError("box_probability: QMC supports p <= 36");
  constexpr int kReplicates = 16;
  constexpr int kPoints = 4096;
  double vol = 1.0;
  for (int i = 0; i < p_; ++i) vol *= hi[i] - lo[i];
  Rng rng(qmc_seed, 0xb0c5);
  std::vector<double> est(kReplicates);
  Vec x(p_);
  for (int rep = 0; rep < kReplicates; ++rep) {
    Vec shift(p_);
    for (int i = 0; i < p_; ++i) shift[i] = rng.uniform();
    double acc = 0.0;
    for (int k = 1; k <= kPoints; ++k) {
      for (int i = 0; i < p_; ++i) {
        double u = radical_inverse(std::uint64_t(k), kPrimes[i]) + shift[i];
        if (u >= 1.0) u -= 1.0;
        x[i] = lo[i] + u * (hi[i] - lo[i]);
      }
      acc += q(x.norm());
    }
    est[rep] = vol * acc / kPoints;
  }
  double mean = 0.0;
  for (double e : est) mean += e;
  mean /= kReplicates;
  double var = 0.0;
  for (double e : est) var += (e - mean) * (e - mean);
  const double se = std::sqrt(var / (kReplicates - 1) / kReplicates);
  if (se > 1e-2 * std::max(mean, 1e-12) && se > 1e-6)
    throw ToleranceError("box_probability: QMC standard error above 1% of the estimate", mean, se);
  return {std::clamp(mean, 0.0, 1.0), se, "qmc"};
}

Vec RadialProposal::sample_increment(Rng& rng) const {
  Vec z(p_);
  if (family_ == ProposalFamily::gaussian) {
    for (int i = 0; i < p_; ++i) z[i] = scale_ * rng.normal();
    return z;
  }
  // Radius ~ Gamma(p, s) since the radial density is prop. to r^{p-1} exp(-r/s).
  double n2 = 0.0;
  do {
    for (int i = 0; i < p_; ++i) z[i] = rng.normal();
    n2 = z.squaredNorm();
  } while (n2 == 0.0);
  return (rng.gamma(double(p_), scale_) / std::sqrt(n2)) * z;
}

double RadialProposal::spectral_m1() const {
  if (family_ != ProposalFamily::gaussian)
    throw ValidationError("spectral bounds: laplace proposal has no strongly convex potential (m1 undefined)");
  return 1.0 / (scale_ * scale_);
}

std::string RadialProposal::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << to_string(family_) << "(p=" << p_ << ", scale=" << scale_ << ")";
  return os.str();
}

}  // namespace rwcert
