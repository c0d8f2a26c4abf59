#include "rwcert/numerics.hpp"
#include "rwcert/target.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwcert {

namespace {

void append_warnings(TargetBundle& out, const TargetBundle& in) {
  for (const auto& w : in.warnings) out.warnings.push_back(in.name + ": " + w);
}

std::optional<CurvatureCert> merge_curvature(const TargetBundle& b1, const TargetBundle& b2) {
  if (!b1.curvature || !b2.curvature) return std::nullopt;
  return CurvatureCert{std::min(b1.curvature->eta, b2.curvature->eta),
                       std::max(b1.curvature->M_p, b2.curvature->M_p)};
}

void require_same_dim(const TargetBundle& b1, const TargetBundle& b2, const char* who) {
  if (b1.dim() != b2.dim()) {
    std::ostringstream os;
    os << who << ": dimension mismatch (" << b1.dim() << " vs " << b2.dim() << ")";
    throw ValidationError(os.str());
  }
}

}  // namespace

TargetBundle combine_product(const TargetBundle& b1, const TargetBundle& b2, bool assert_normalized) {
  require_same_dim(b1, b2, "combine_product");
  const LogTarget t1 = b1.target, t2 = b2.target;

  LogTarget t;
  t.dim = t1.dim;
  t.log_density = [t1, t2](const Vec& x) { return t1.log_density(x) + t2.log_density(x); };
  t.grad_log_density = [t1, t2](const Vec& x) -> Vec {
    return t1.grad_log_density(x) + t2.grad_log_density(x);
  };
  if (t1.hess_log_density && t2.hess_log_density)
    t.hess_log_density = [t1, t2](const Vec& x) -> Mat {
      return t1.hess_log_density(x) + t2.hess_log_density(x);
    };
  t.log_norm_offset = t1.log_norm_offset + t2.log_norm_offset;
  t.norm_quality = assert_normalized ? combine(t1.norm_quality, t2.norm_quality) : NormQuality::approximate;

  const Envelope e1 = b1.envelope, e2 = b2.envelope;
  Envelope env{[e1, e2](double r) { return e1(r) + e2(r); }, "(" + e1.descr + ")+(" + e2.descr + ")"};

  SuperexpCert sup{b1.superexp.f_s + b2.superexp.f_s, b1.superexp.C1 + b2.superexp.C1,
                   std::max(b1.superexp.M_s, b2.superexp.M_s)};

  TargetBundle out = make_bundle(b1.name + "*" + b2.name, std::move(t), std::move(env), sup,
                                 merge_curvature(b1, b2), b1.mode);
  append_warnings(out, b1);
  append_warnings(out, b2);
  if (!assert_normalized)
    out.warnings.push_back("product density not asserted normalized; norm_quality=approximate");
  return out;
}

TargetBundle combine_mixture(const TargetBundle& b1, const TargetBundle& b2, double a1, double a2) {
  require_same_dim(b1, b2, "combine_mixture");
  if (!(a1 >= 0.0 && a2 >= 0.0)) throw ValidationError("combine_mixture: weights must be non-negative");
  if (std::abs(a1 + a2 - 1.0) > 1e-12) throw ValidationError("combine_mixture: weights must sum to 1");

  const LogTarget t1 = b1.target, t2 = b2.target;
  const double la1 = a1 > 0.0 ? std::log(a1) : -kInf;
  const double la2 = a2 > 0.0 ? std::log(a2) : -kInf;

  // Posterior component weights w_i = a_i f_i / f, computed in log space.
  auto weights = [=](const Vec& x, double& l1, double& l2) {
    l1 = la1 + t1.log_density(x);
    l2 = la2 + t2.log_density(x);
    const double lf = log_add_exp(l1, l2);
    return std::pair<double, double>{std::exp(l1 - lf), std::exp(l2 - lf)};
  };

  LogTarget t;
  t.dim = t1.dim;
  t.log_density = [=](const Vec& x) {
    return log_add_exp(la1 + t1.log_density(x), la2 + t2.log_density(x));
  };
  t.grad_log_density = [=](const Vec& x) -> Vec {
    double l1, l2;
    const auto [w1, w2] = weights(x, l1, l2);
    Vec g = Vec::Zero(x.size());
    if (w1 > 0.0) g += w1 * t1.grad_log_density(x);
    if (w2 > 0.0) g += w2 * t2.grad_log_density(x);
    return g;
  };
  if (t1.hess_log_density && t2.hess_log_density)
    t.hess_log_density = [=](const Vec& x) -> Mat {
      double l1, l2;
      const auto [w1, w2] = weights(x, l1, l2);
      const Vec g1 = t1.grad_log_density(x), g2 = t2.grad_log_density(x);
      const Vec g = w1 * g1 + w2 * g2;
      Mat H = -g * g.transpose();
      if (w1 > 0.0) H += w1 * (t1.hess_log_density(x) + g1 * g1.transpose());
      if (w2 > 0.0) H += w2 * (t2.hess_log_density(x) + g2 * g2.transpose());
      return H;
    };
  t.norm_quality = combine(t1.norm_quality, t2.norm_quality);

  const Envelope e1 = b1.envelope, e2 = b2.envelope;
  Envelope env{[e1, e2](double r) { return softplus(e1(r) + e2(r)); },
               "log(exp((" + e1.descr + ")+(" + e2.descr + "))+1)"};

  SuperexpCert sup{RateFunction::pointwise_min(b1.superexp.f_s, b2.superexp.f_s),
                   std::max(b1.superexp.C1, b2.superexp.C1),
                   std::max(b1.superexp.M_s, b2.superexp.M_s)};

  // Start the mode search from whichever component mode the mixture prefers.
  const Vec init = (a2 > 0.0 && t.log_density(b2.mode) > t.log_density(b1.mode)) ? b2.mode : b1.mode;
  std::ostringstream name;
  name << "mixture(" << a1 << "*" << b1.name << ", " << a2 << "*" << b2.name << ")";
  TargetBundle out = make_bundle(name.str(), std::move(t), std::move(env), sup,
                                 merge_curvature(b1, b2), init);
  append_warnings(out, b1);
  append_warnings(out, b2);
  return out;
}

TargetBundle gaussian_mixture_bundle(double a, MixtureEnvelope which) {
  if (!(a > 0.0) || !std::isfinite(a)) throw ValidationError("gaussian_mixture_bundle: a must be positive");
  const double log_c = 0.5 * std::log(a) - std::log(kPi);
  const double amax = std::max(a, 1.0), amin = std::min(a, 1.0);
  const double offset = which == MixtureEnvelope::corrected ? std::abs(log_c) : std::sqrt(a) / kPi;

  auto component = [&](double ax, double ay, const char* name) {
    LogTarget t;
    t.dim = 2;
    t.log_density = [=](const Vec& x) { return log_c - ax * x[0] * x[0] - ay * x[1] * x[1]; };
    t.grad_log_density = [=](const Vec& x) -> Vec { return Vec{{-2.0 * ax * x[0], -2.0 * ay * x[1]}}; };
    t.hess_log_density = [=](const Vec&) -> Mat {
      Mat H = Mat::Zero(2, 2);
      H(0, 0) = -2.0 * ax;
      H(1, 1) = -2.0 * ay;
      return H;
    };
    t.log_norm_offset = log_c;
    std::ostringstream d;
    d.precision(17);
    d << amax << "*z^2+" << offset;
    Envelope env{[=](double z) { return amax * z * z + offset; }, d.str()};
    SuperexpCert sup{RateFunction::affine(2.0 * amin), 0.0, 0.0};
    return make_bundle(name, std::move(t), std::move(env), sup, CurvatureCert{amin, 0.0}, Vec::Zero(2));
  };

  const TargetBundle f1 = component(a, 1.0, "f1");
  const TargetBundle f2 = component(1.0, a, "f2");
  TargetBundle out = combine_mixture(f1, f2, 0.5, 0.5);
  std::ostringstream name;
  name << "gaussian_mixture(a=" << a << (which == MixtureEnvelope::literal ? ", literal envelope" : "") << ")";
  out.name = name.str();
  return out;
}

}  // namespace rwcert
