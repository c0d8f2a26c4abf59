#include "rwcert/numerics.hpp"
#include "rwcert/target.hpp"

#include <algorithm>
#include <cmath>

namespace rwcert {

Vec random_direction(int p, Rng& rng) {
  Vec v(p);
  double n2 = 0.0;
  do {
    for (int i = 0; i < p; ++i) v[i] = rng.normal();
    n2 = v.squaredNorm();
  } while (n2 == 0.0);
  return v / std::sqrt(n2);
}

std::vector<double> default_verify_radii(const TargetBundle& bundle) {
  // Scaled by max(M*, 1) so that M* = 0 does not collapse the grid to the origin.
  const double base = std::max(bundle.M_star, 1.0);
  return {1.1 * base, 1.5 * base, 2.0 * base, 4.0 * base, 8.0 * base};
}

bool AssumptionReport::all_passed() const {
  return superexponential.passed() && curvature.passed() && envelope.passed();
}

namespace {

void record(CheckSummary& s, const Vec& x, double value, double bound, double tol) {
  ++s.n_checked;
  CheckFinding f{x, x.norm(), value, bound};
  if (!s.worst || f.margin() < s.worst->margin()) s.worst = f;
  if (value > bound + tol * std::max(1.0, std::abs(bound))) s.failures.push_back(std::move(f));
}

Mat fd_hessian(const LogTarget& t, const Vec& x) {
  const int p = t.dim;
  Mat H(p, p);
  for (int j = 0; j < p; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    H.col(j) = (t.grad_log_density(xp) - t.grad_log_density(xm)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace

AssumptionReport verify_assumptions(const TargetBundle& bundle, const VerifyOptions& opts) {
  if (opts.n_directions < 1) throw ValidationError("verify_assumptions: n_directions must be >= 1");
  AssumptionReport rep;
  rep.superexponential.name = "superexponential";
  rep.curvature.name = "curvature";
  rep.envelope.name = "envelope";
  rep.log_concavity.name = "log_concavity";
  rep.curvature.enabled = bundle.curvature.has_value();
  rep.log_concavity.enabled = opts.check_log_concavity;
  rep.radii = opts.radii.empty() ? default_verify_radii(bundle) : opts.radii;
  rep.n_directions = opts.n_directions;
  rep.seed = opts.seed;

  const int p = bundle.dim();
  const auto& t = bundle.target;
  const auto& sup = bundle.superexp;

  std::vector<Vec> points;
  Rng rng(opts.seed, 0x5e41);
  for (double r : rep.radii)
    for (int k = 0; k < opts.n_directions; ++k) points.push_back(r * random_direction(p, rng));
  points.insert(points.end(), opts.extra_points.begin(), opts.extra_points.end());

  for (const Vec& x : points) {
    if (x.size() != p) throw ValidationError("verify_assumptions: probe point has wrong dimension");
    const double r = x.norm();
    const double lf = t.log_density(x);
    record(rep.envelope, x, std::abs(lf), bundle.envelope(r), opts.tol);
    if (r == 0.0) continue;

    const Vec u = x / r;
    const Vec g = t.grad_log_density(x);
    if (r > sup.M_s) record(rep.superexponential, x, u.dot(g), sup.C1 - sup.f_s(r), opts.tol);
    if (bundle.curvature && r > bundle.curvature->M_p && g.norm() > 0.0)
      record(rep.curvature, x, u.dot(g) / g.norm(), -bundle.curvature->eta, opts.tol);
    if (opts.check_log_concavity) {
      Eigen::SelfAdjointEigenSolver<Mat> es(fd_hessian(t, x), Eigen::EigenvaluesOnly);
      // Finite-difference noise on the Hessian is O(1e-6) relative.
      const double top = es.eigenvalues().maxCoeff();
      record(rep.log_concavity, x, top, 0.0, 1e-6 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()));
    }
  }
  return rep;
}

}  // namespace rwcert
