#include "rwcert/drift.hpp"

#include "rwcert/numerics.hpp"
#include "rwcert/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwcert {

DriftMinCert drift_certificate(const TargetBundle& bundle, const RadialProposal& prop, const ConeParams& params) {
  return drift_certificate(bundle, prop, params, bundle.envelope);
}

DriftMinCert drift_certificate(const TargetBundle& bundle, const RadialProposal& prop, const ConeParams& params,
                               const Envelope& envelope) {
  const int p = bundle.dim();
  if (prop.dim() != p) throw ValidationError("drift: proposal dimension does not match target");
  if (!bundle.curvature)
    throw ValidationError("drift: bundle '" + bundle.name + "' has no curvature certificate (eta, M_p)");
  params.validate();

  DriftMinCert c;
  c.cone = params;
  c.p = p;
  c.M_star = bundle.M_star;
  c.log_p_star = bundle.log_p_star;
  c.norm_quality = bundle.target.norm_quality;
  if (params.eps_alpha > bundle.curvature->eta) {
    std::ostringstream os;
    os << "eps_alpha=" << params.eps_alpha << " exceeds the curvature margin eta=" << bundle.curvature->eta;
    c.warnings.push_back(os.str());
  }

  c.R_alpha = cone_radius(params);
  const EpsDelta ed = epsilon_delta(prop, p, params);
  c.box_mass = ed.box_mass;
  c.lambda_tilde = 1.0 - ed.box_mass / (1.0 + params.eps_alpha);
  c.eps = ed.eps;
  c.delta = ed.delta;
  c.K_eps = ed.K_eps;

  const RateFunction& fs = bundle.superexp.f_s;
  const double C1 = bundle.superexp.C1;
  const double Ms = bundle.M_star;
  const double K = c.K_eps;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Escape radius: beyond it the density has dropped by more than log(eps)/delta.
  const double t1 = fs.inverse(C1 - std::log(c.eps) / c.delta) + K;

  double t2 = nan;
  if (p == 1) {
    c.warnings.push_back("p=1: shell bracket term of R_eps skipped (exponent 1/(p-1) undefined)");
  } else {
    const double base = std::pow(c.eps / (prop.q0() * unit_ball_volume(p) * c.delta), 1.0 / (p - 1));
    const double bracket = base - K;
    if (!(bracket > 0.0)) throw NumericError("drift: R_eps bracket degenerate; shrink delta");
    t2 = 2.0 * K * K / bracket + K;
  }

  const double u0 = std::max(fs.inverse(C1), Ms);
  const double t3 = fs.inverse(C1 + std::max(envelope(u0) + bundle.log_p_star, 0.0)) + 1.0;
  const double t4 = std::max(Ms + K, 1.0);

  c.R_eps_terms = {t1, t2, t3, t4};
  c.R_eps = -kInf;
  for (int i = 0; i < 4; ++i) {
    if (!std::isnan(c.R_eps_terms[i]) && c.R_eps_terms[i] > c.R_eps) {
      c.R_eps = c.R_eps_terms[i];
      c.R_eps_argmax = i;
    }
  }
  if (!std::isfinite(c.R_eps)) throw NumericError("drift: R_eps is not finite");

  const double fR = envelope(c.R_eps);
  if (!(fR >= 0.0)) throw ValidationError("drift: envelope must be non-negative");
  c.log_b = std::log(3.0) + 0.5 * fR;
  c.b = std::exp(c.log_b);

  // R_max: f_s^{-1}(C1 - log(min((1-lambda)^2 / (2 p* (2b + eps_alpha)^2), 1))) v M*
  const double log_2b_eps = log_add_exp(std::log(2.0) + c.log_b, std::log(params.eps_alpha));
  const double log_ratio = 2.0 * std::log1p(-c.lambda_tilde) - std::log(2.0) - bundle.log_p_star - 2.0 * log_2b_eps;
  c.R_max = std::max(fs.inverse(C1 - std::min(log_ratio, 0.0)), Ms);

  c.log_eta_tilde = c.R_max > 0.0 ? -2.0 * envelope(c.R_max) + prop.log_q(c.R_max) + log_unit_ball_volume(p) +
                                        p * std::log(c.R_max)
                                  : -kInf;
  if (c.log_eta_tilde > 0.0) {
    c.warnings.push_back("eta_tilde above 1 clamped to 1");
    c.log_eta_tilde = 0.0;
  }
  c.eta_tilde = std::exp(c.log_eta_tilde);
  c.vacuous = !(c.log_eta_tilde >= kVacuousLogEta);
  if (c.vacuous) {
    std::ostringstream os;
    os << "log eta_tilde = " << c.log_eta_tilde << " < " << kVacuousLogEta << "; minorization constant is vacuous";
    c.warnings.push_back(os.str());
  }
  return c;
}

bool DriftReport::passed() const {
  return std::all_of(points.begin(), points.end(), [](const DriftPoint& d) { return d.drift_pass && d.ratio_pass; });
}

std::vector<Vec> drift_probe_points(int p, double r_hi, int n_points, std::uint64_t seed) {
  std::vector<Vec> pts;
  Rng rng(seed, 0xd21f);
  for (int k = 0; k < n_points; ++k) {
    const double r = n_points == 1 ? r_hi : r_hi * k / (n_points - 1);
    Vec dir = p == 1 ? Vec::Ones(1) : random_direction(p, rng);
    pts.push_back(r * dir);
  }
  return pts;
}

DriftReport verify_drift_mc(const DriftMinCert& cert, const TargetBundle& bundle, const RadialProposal& prop,
                            const std::vector<Vec>& points, int n, std::uint64_t seed, double k) {
  if (n < 1000) throw ValidationError("verify_drift_mc: n must be at least 1000");
  DriftReport rep;
  rep.n = n;
  rep.seed = seed;
  rep.se_multiplier = k;
  const double log_lambda = std::log(cert.lambda_tilde);

  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec& x = points[i];
    DriftPoint d;
    d.x = x;
    d.radius = x.norm();
    const double lfx = bundle.log_f(x);
    d.log_V = -0.5 * lfx;

    // PV(x)/V(x) = E[ h^{-1/2} ] on accepted moves (h >= 1) and
    // E[ sqrt(h) + 1 - h ] otherwise, with h = f(y)/f(x).
    Rng rng(seed, i);
    double sum = 0.0, sum2 = 0.0;
    Vec y(x.size());
    for (int j = 0; j < n; ++j) {
      y = x + prop.sample_increment(rng);
      const double lh = bundle.log_f(y) - lfx;
      double v;
      if (!std::isfinite(lh) && lh < 0.0)
        v = 1.0;  // h = 0: always rejected
      else if (lh >= 0.0)
        v = std::exp(-0.5 * lh);
      else {
        const double h = std::exp(lh);
        v = std::sqrt(h) + 1.0 - h;
      }
      sum += v;
      sum2 += v * v;
    }
    d.ratio = sum / n;
    d.ratio_se = std::sqrt(std::max(sum2 / n - d.ratio * d.ratio, 0.0) / (n - 1));
    d.log_PV = d.log_V + std::log(d.ratio);
    d.log_bound = log_add_exp(log_lambda + d.log_V, cert.log_b);

    // PV <= lambda V + b + k SE  <=>  (ratio - k se - lambda) V <= b
    const double excess = d.ratio - k * d.ratio_se - cert.lambda_tilde;
    d.drift_pass = excess <= 0.0 || std::log(excess) + d.log_V <= cert.log_b;
    if (d.radius > cert.R_eps) {
      d.ratio_checked = true;
      d.ratio_pass = d.ratio <= cert.lambda_tilde + k * d.ratio_se;
    } else if (d.ratio > cert.lambda_tilde + k * d.ratio_se && d.radius > 0.0) {
      std::ostringstream os;
      os << "PV/V=" << d.ratio << " exceeds lambda_tilde at |x|=" << d.radius
         << " inside R_eps=" << cert.R_eps << " (expected: contraction is only claimed beyond R_eps)";
      rep.notes.push_back(os.str());
    }
    rep.points.push_back(std::move(d));
  }
  return rep;
}

namespace {

using boost::math::quadrature::gauss_kronrod;

double proposal_window(const RadialProposal& prop) {
  return prop.family() == ProposalFamily::gaussian ? 40.0 * prop.scale() : (60.0 + 5.0 * prop.dim()) * prop.scale();
}

struct CellIntegrator {
  const TargetBundle& bundle;
  const RadialProposal& prop;
  double R;  // ball radius for clipping
  double max_err = 0.0;

  template <class F>
  double gk(F&& f, double a, double b, int max_pieces = 200, double rel_tol = 1e-12) {
    const QuadResult q = adaptive_gk(f, a, b, 1e-13, rel_tol, max_pieces);
    max_err = std::max(max_err, q.error);
    return q.value;
  }

  // Accepted transition density alpha(x,y) q(x,y).
  double kernel(const Vec& x, double lfx, const Vec& y) const {
    const double lfy = bundle.log_f(y);
    return std::exp(std::min(0.0, lfy - lfx) + prop.log_q((y - x).norm()));
  }

  // Bisection for a sign change of pred between lo (where pred is `at_lo`) and hi.
  template <class P>
  static double bisect(P&& pred, double lo, double hi, bool at_lo) {
    for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (pred(mid) == at_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  // Stationary points of log f along the line y(t), coordinate `axis` varying.
  template <class Y>
  std::vector<double> stationary_points(Y&& y_of, int axis, double a, double b) const {
    std::vector<double> out;
    auto up = [&](double t) { return bundle.target.grad_log_density(y_of(t))[axis] > 0.0; };
    const int n = std::max(16, int(std::ceil(10.0 * (b - a) / prop.scale())));
    double prev_t = a;
    bool prev_u = up(a);
    for (int k = 1; k <= n; ++k) {
      const double t = a + (b - a) * k / n;
      const bool u = up(t);
      if (u != prev_u) out.push_back(bisect(up, prev_t, t, prev_u));
      prev_t = t;
      prev_u = u;
    }
    return out;
  }

  // Integrates the kernel over [a, b] along the line y(t), split where it has
  // kinks: at t = t0 (the proposal center) and wherever log f(y(t)) crosses lfx.
  // log f is monotone between stationary points, so each such gap holds at most one crossing.
  template <class Y>
  double integrate_line(const Vec& x, double lfx, Y&& y_of, int axis, double t0, double a, double b) {
    if (!(b > a)) return 0.0;
    auto g = [&](double t) { return kernel(x, lfx, y_of(t)); };
    auto side = [&](double t) { return bundle.log_f(y_of(t)) > lfx; };
    std::vector<double> knots{a};
    for (double t : stationary_points(y_of, axis, a, b)) knots.push_back(t);
    knots.push_back(b);
    std::vector<double> cuts{a};
    if (t0 > a && t0 < b) cuts.push_back(t0);
    bool prev_s = side(a);
    for (std::size_t k = 1; k < knots.size(); ++k) {
      const bool st = side(knots[k]);
      if (st != prev_s) cuts.push_back(bisect(side, knots[k - 1], knots[k], prev_s));
      prev_s = st;
    }
    std::sort(cuts.begin(), cuts.end());
    // Slivers only cost refinement; a kink that close to an end is harmless.
    const double gap = 1e-9 * (b - a);
    std::vector<double> kept{a};
    for (double c : cuts)
      if (c - kept.back() > gap && b - c > gap) kept.push_back(c);
    kept.push_back(b);
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) v += gk(g, kept[i], kept[i + 1]);
    return v;
  }

  double integrate_1d(const Vec& x, double lfx, double a, double b) {
    a = std::max(a, -R);
    b = std::min(b, R);
    Vec y(1);
    return integrate_line(
        x, lfx,
        [&](double t) -> const Vec& {
          y[0] = t;
          return y;
        },
        0, x[0], a, b);
  }

  // Values of log f - lfx at the stationary points of log f along the vertical chord at s.
  std::vector<double> stationary_gaps(double lfx, double s, double a1, double b1) const {
    std::vector<double> out;
    const double h = std::sqrt(std::max(R * R - s * s, 0.0));
    const double a = std::max(a1, -h), b = std::min(b1, h);
    if (!(b > a)) return out;
    Vec y(2);
    y[0] = s;
    auto y_of = [&](double t) -> const Vec& {
      y[1] = t;
      return y;
    };
    for (double t : stationary_points(y_of, 1, a, b)) out.push_back(bundle.log_f(y_of(t)) - lfx);
    return out;
  }

  // Outer positions in (c, d) where the level curve log f = lfx has a vertical
  // tangent: the inner crossing count changes there and F(s) has a sqrt kink.
  void level_tangents(double lfx, double c, double d, double a1, double b1, std::vector<double>& out) const {
    const int n = std::max(32, int(std::ceil(10.0 * (d - c) / prop.scale())));
    double ps = c;
    auto pg = stationary_gaps(lfx, c, a1, b1);
    for (int k = 1; k <= n; ++k) {
      const double s = c + (d - c) * k / n;
      auto g = stationary_gaps(lfx, s, a1, b1);
      if (g.size() == pg.size()) {
        for (std::size_t j = 0; j < g.size(); ++j) {
          if ((g[j] > 0.0) == (pg[j] > 0.0)) continue;
          double lo = ps, hi = s;
          const bool slo = pg[j] > 0.0;
          for (int it = 0; it < 50; ++it) {
            const double mid = 0.5 * (lo + hi);
            const auto gm = stationary_gaps(lfx, mid, a1, b1);
            if (gm.size() != g.size()) break;
            ((gm[j] > 0.0) == slo ? lo : hi) = mid;
          }
          out.push_back(0.5 * (lo + hi));
        }
      }
      ps = s;
      pg = std::move(g);
    }
  }

  // Rectangle [a0,b0] x [a1,b1] intersected with the disc of radius R.
  double integrate_2d(const Vec& x, double lfx, double a0, double b0, double a1, double b1) {
    a0 = std::max(a0, -R);
    b0 = std::min(b0, R);
    if (!(b0 > a0)) return 0.0;
    auto outer = [&](double s) {
      const double h = std::sqrt(std::max(R * R - s * s, 0.0));
      Vec y(2);
      y[0] = s;
      return integrate_line(
          x, lfx,
          [&](double t) -> const Vec& {
            y[1] = t;
            return y;
          },
          1, x[1], std::max(a1, -h), std::min(b1, h));
    };
    // Outer kinks: the proposal center and where the disc edge crosses t = a1, b1.
    std::vector<double> cuts{a0, b0};
    auto add = [&](double c) {
      if (c > a0 && c < b0) cuts.push_back(c);
    };
    add(x[0]);
    for (double t : {a1, b1})
      if (std::abs(t) < R) {
        const double c = std::sqrt(R * R - t * t);
        add(c);
        add(-c);
      }
    std::sort(cuts.begin(), cuts.end());
    auto sum_pieces = [&] {
      // Near s = +-R the chord length behaves like sqrt(R -+ s); s = R - u^2 makes the piece smooth.
      double v = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double c = cuts[i], d = cuts[i + 1];
        if (!(d - c > 1e-12 * R)) continue;
        if (d >= R) {
          v += gk([&](double u) { return 2.0 * u * outer(R - u * u); }, 0.0, std::sqrt(R - c), 400, 1e-10);
        } else if (c <= -R) {
          v += gk([&](double u) { return 2.0 * u * outer(-R + u * u); }, 0.0, std::sqrt(d + R), 400, 1e-10);
        } else {
          v += gk(outer, c, d, 400, 1e-10);
        }
      }
      return v;
    };
    const double err0 = max_err;
    max_err = 0.0;
    double v = sum_pieces();
    // Only integrals whose error estimate is poor pay for locating the tangents.
    if (max_err > 1e-10) {
      std::vector<double> extra;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) level_tangents(lfx, cuts[i], cuts[i + 1], a1, b1, extra);
      if (!extra.empty()) {
        for (double c : extra) add(c);
        std::sort(cuts.begin(), cuts.end());
        max_err = 0.0;
        v = sum_pieces();
      }
    }
    max_err = std::max(max_err, err0);
    return v;
  }
};

}  // namespace

MinorReport verify_minorization_grid(const DriftMinCert& cert, const TargetBundle& bundle,
                                     const RadialProposal& prop, const MinorOptions& opts) {
  const int p = bundle.dim();
  if (p > 2) throw ValidationError("minorization check: oracle restricted to p <= 2");
  if (opts.cells_per_axis < 1 || opts.n_x < 1 || opts.n_sets < 0)
    throw ValidationError("minorization check: cells, x-points and sets must be positive");

  MinorReport rep;
  rep.quad_tol = opts.quad_tol;
  const double R = cert.R_max;
  const double L = std::min(opts.extent, R);
  const int m = opts.cells_per_axis;
  const double w = 2.0 * L / m;
  const double W = proposal_window(prop);
  const int n_cells = p == 1 ? m : m * m;
  const double log_ball = log_unit_ball_volume(p) + p * std::log(R);

  // x points inside the ball.
  std::vector<Vec> xs;
  Rng rng(opts.seed, 0x111e);
  const double Lx = L * (1.0 - 1e-9);
  for (int i = 0; i < opts.n_x; ++i) {
    if (p == 1) {
      xs.push_back(Vec::Constant(1, opts.n_x == 1 ? 0.0 : -Lx + 2.0 * Lx * i / (opts.n_x - 1)));
    } else {
      const double r = Lx * std::sqrt(rng.uniform());
      xs.push_back(r * random_direction(2, rng));
    }
  }

  // Random unions of cells.
  std::vector<std::vector<int>> unions(opts.n_sets);
  for (auto& u : unions) {
    for (int c = 0; c < n_cells; ++c)
      if (rng.uniform() < opts.union_density) u.push_back(c);
    if (u.empty()) u.push_back(int(rng.uniform() * n_cells) % n_cells);
  }

  // log Lebesgue volume of each cell intersected with the ball.
  std::vector<double> cell_logvol(n_cells);
  for (int c = 0; c < n_cells; ++c) {
    const int i = c % m, j = c / m;
    const double a0 = -L + i * w, b0 = a0 + w;
    if (p == 1) {
      cell_logvol[c] = std::log(std::min(b0, R) - std::max(a0, -R));
    } else {
      const double a1 = -L + j * w, b1 = a1 + w;
      // Disc-clipped area by 1-D quadrature of the chord length.
      double err = 0.0;
      const double area = gauss_kronrod<double, 15>::integrate(
          [&](double s) {
            const double h = std::sqrt(std::max(R * R - s * s, 0.0));
            return std::max(0.0, std::min(b1, h) - std::max(a1, -h));
          },
          std::max(a0, -R), std::min(b0, R), 20, 1e-12, &err);
      cell_logvol[c] = area > 0.0 ? std::log(area) : -kInf;
    }
  }

  CellIntegrator integ{bundle, prop, R};
  rep.worst_margin = kInf;
  rep.min_ball_mass = kInf;
  rep.n_x = int(xs.size());
  rep.n_sets = n_cells + opts.n_sets + 1;

  auto check = [&](const Vec& x, const std::string& name, double lhs, double log_vol) {
    ++rep.n_checks;
    const double rhs = std::isfinite(log_vol) ? std::exp(cert.log_eta_tilde + log_vol - log_ball) : 0.0;
    const double margin = lhs - rhs;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -opts.quad_tol) rep.failures.push_back({x, name, lhs, rhs});
  };

  std::vector<double> cell_mass(n_cells);
  for (const Vec& x : xs) {
    const double lfx = bundle.log_f(x);
    for (int c = 0; c < n_cells; ++c) {
      const int i = c % m, j = c / m;
      const double a0 = -L + i * w, b0 = a0 + w;
      double mass = 0.0;
      if (a0 <= x[0] + W && b0 >= x[0] - W) {
        if (p == 1) {
          mass = integ.integrate_1d(x, lfx, a0, b0);
        } else {
          const double a1 = -L + j * w, b1 = a1 + w;
          if (a1 <= x[1] + W && b1 >= x[1] - W) mass = integ.integrate_2d(x, lfx, a0, b0, a1, b1);
        }
      }
      cell_mass[c] = mass;
      check(x, "cell " + std::to_string(c), mass, cell_logvol[c]);
    }
    for (std::size_t u = 0; u < unions.size(); ++u) {
      double mass = 0.0, log_vol = -kInf;
      for (int c : unions[u]) {
        mass += cell_mass[c];
        log_vol = log_add_exp(log_vol, cell_logvol[c]);
      }
      check(x, "union " + std::to_string(u), mass, log_vol);
    }
    // Whole ball: nu(B) = 1, so the check is P(x, B) >= eta~.
    double ball_mass;
    if (p == 1)
      ball_mass = integ.integrate_1d(x, lfx, x[0] - W, x[0] + W);
    else
      ball_mass = integ.integrate_2d(x, lfx, x[0] - W, x[0] + W, x[1] - W, x[1] + W);
    rep.min_ball_mass = std::min(rep.min_ball_mass, ball_mass);
    check(x, "ball", ball_mass, log_ball);
  }
  rep.max_quad_error = integ.max_err;
  if (rep.max_quad_error > opts.quad_tol)
    throw ToleranceError("minorization check: quadrature tolerance not met", rep.worst_margin, rep.max_quad_error);
  return rep;
}

}  // namespace rwcert
