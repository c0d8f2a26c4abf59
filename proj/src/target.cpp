#include "rwcert/target.hpp"

#include "rwcert/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwcert {

RateFunction RateFunction::affine(double slope, double intercept) {
  if (!(slope > 0.0) || !std::isfinite(slope) || !std::isfinite(intercept))
    throw ValidationError("rate function: affine f_s needs a positive finite slope");
  RateFunction r;
  r.affine_ = true;
  r.slope_ = slope;
  r.intercept_ = intercept;
  std::ostringstream os;
  os.precision(17);
  os << slope << "*u";
  if (intercept != 0.0) os << (intercept > 0 ? "+" : "") << intercept;
  r.descr_ = os.str();
  return r;
}

RateFunction RateFunction::general(std::function<double(double)> f, std::string descr) {
  if (!f) throw ValidationError("rate function: empty callable");
  RateFunction r;
  r.affine_ = false;
  r.f_ = std::move(f);
  r.descr_ = std::move(descr);
  return r;
}

double RateFunction::operator()(double u) const {
  if (affine_) return slope_ * u + intercept_;
  return f_(u);
}

double RateFunction::inverse(double x) const {
  if (std::isnan(x)) throw NumericError("rate function inverse: NaN argument");
  const double at0 = (*this)(0.0);
  if (x <= at0) return 0.0;
  if (x == kInf) return kInf;
  if (affine_) return (x - intercept_) / slope_;
  return invert_increasing([this](double u) { return f_(u); }, x, 0.0, 1.0);
}

RateFunction operator+(const RateFunction& a, const RateFunction& b) {
  if (a.affine_ && b.affine_) return RateFunction::affine(a.slope_ + b.slope_, a.intercept_ + b.intercept_);
  return RateFunction::general([a, b](double u) { return a(u) + b(u); },
                               "(" + a.descr_ + ")+(" + b.descr_ + ")");
}

RateFunction RateFunction::pointwise_min(const RateFunction& a, const RateFunction& b) {
  if (a.affine_ && b.affine_) {
    if (a.slope_ <= b.slope_ && a.intercept_ <= b.intercept_) return a;
    if (b.slope_ <= a.slope_ && b.intercept_ <= a.intercept_) return b;
  }
  return RateFunction::general([a, b](double u) { return std::min(a(u), b(u)); },
                               "min(" + a.descr_ + ", " + b.descr_ + ")");
}

namespace {

double checked_log_density(const LogTarget& t, const Vec& x) {
  const double v = t.log_density(x);
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "find_mode: non-finite log-density at x = " << x.transpose();
    throw NumericError(os.str());
  }
  return v;
}

}  // namespace

ModeResult find_mode(const LogTarget& target, const Vec& init, double tol, int max_iter) {
  if (!(tol > 0.0)) throw ValidationError("find_mode: tol must be positive");
  if (init.size() != target.dim) throw ValidationError("find_mode: init has wrong dimension");
  if (!target.grad_log_density) throw ValidationError("find_mode: target has no gradient");

  Vec x = init;
  double lf = checked_log_density(target, x);
  double step = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const Vec g = target.grad_log_density(x);
    if (!g.allFinite()) throw NumericError("find_mode: non-finite gradient");
    if (g.norm() < tol) return {x, lf, std::exp(lf), it};

    Vec dir = g;
    bool newton = false;
    if (target.hess_log_density) {
      const Mat H = target.hess_log_density(x);
      Eigen::LLT<Mat> llt(-H);
      if (llt.info() == Eigen::Success) {
        dir = llt.solve(g);
        newton = dir.allFinite() && dir.dot(g) > 0.0;
        if (!newton) dir = g;
      }
    }

    // Backtracking with the Armijo condition; full Newton step first.
    double t = newton ? 1.0 : std::min(1.0, 2.0 * step);
    const double slope = g.dot(dir);
    bool moved = false;
    for (int ls = 0; ls < 80; ++ls) {
      const Vec trial = x + t * dir;
      const double lt = target.log_density(trial);
      if (std::isfinite(lt) && lt >= lf + 1e-4 * t * slope) {
        x = trial;
        lf = lt;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!newton) step = t;
    if (!moved) {
      // Line search stalls only once the increase is below rounding; accept
      // the point if the gradient is already small on a relative scale.
      if (g.norm() < tol * std::max(1.0, std::abs(lf)) * 1e3) return {x, lf, std::exp(lf), it};
      throw ModeNotConverged("find_mode: line search failed to increase log-density", x);
    }
  }
  const Vec g = target.grad_log_density(x);
  if (g.norm() < tol) return {x, lf, std::exp(lf), max_iter};
  throw ModeNotConverged("find_mode: no convergence after " + std::to_string(max_iter) + " iterations", x);
}

TargetBundle make_bundle(std::string name, LogTarget target, Envelope envelope,
                         SuperexpCert superexp, std::optional<CurvatureCert> curvature,
                         const Vec& init, double mode_tol) {
  if (target.dim < 1) throw ValidationError("target: dimension must be positive");
  if (!target.log_density || !target.grad_log_density)
    throw ValidationError("target: log-density and gradient are required");
  if (!envelope.fn) throw ValidationError("target: envelope is required");
  if (superexp.M_s < 0.0) throw ValidationError("target: M_s must be non-negative");

  TargetBundle b;
  b.name = std::move(name);
  if (curvature) {
    if (!(curvature->eta > 0.0)) throw ValidationError("target: curvature eta must be positive");
    if (!(curvature->M_p >= 0.0)) throw ValidationError("target: curvature M_p must be non-negative");
    if (curvature->eta >= 1.0) {
      std::ostringstream os;
      os << "eta=" << curvature->eta << " is not below 1; clamped to " << kEtaCeiling;
      b.warnings.push_back(os.str());
      curvature->eta = kEtaCeiling;
    }
  }
  b.target = std::move(target);
  b.envelope = std::move(envelope);
  b.superexp = std::move(superexp);
  b.curvature = curvature;

  const ModeResult m = find_mode(b.target, init, mode_tol);
  b.mode = m.mode;
  b.log_p_star = m.log_p_star;
  b.p_star = m.p_star;
  b.M_star = std::max(b.superexp.M_s, curvature ? curvature->M_p : 0.0);
  return b;
}

TargetBundle normal_bundle(int p) {
  if (p < 1) throw ValidationError("normal target: dimension must be positive");
  const double c = -0.5 * p * std::log(2.0 * kPi);
  LogTarget t;
  t.dim = p;
  t.log_density = [c](const Vec& x) { return c - 0.5 * x.squaredNorm(); };
  t.grad_log_density = [](const Vec& x) -> Vec { return -x; };
  t.hess_log_density = [p](const Vec&) -> Mat { return -Mat::Identity(p, p); };
  t.log_norm_offset = c;

  const double k = -c;
  Envelope env{[k](double r) { return 0.5 * r * r + k; }, "r^2/2 + (p/2)log(2pi)"};
  SuperexpCert sup{RateFunction::affine(1.0), 0.0, 0.0};
  return make_bundle("normal", std::move(t), std::move(env), sup, CurvatureCert{0.99, 0.0},
                     Vec::Constant(p, 1.0));
}

}  // namespace rwcert
