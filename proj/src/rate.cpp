#include "rwcert/rate.hpp"

#include "rwcert/numerics.hpp"
#include "rwcert/sampler.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwcert {

namespace {

constexpr double kRLo = 1e-6;
constexpr double kRHi = 1.0 - 1e-6;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double rosenthal_log_objective(double eta_tilde, double log_A, double log_alpha_tilde, double r) {
  const double l1 = std::log1p(-eta_tilde);
  const double first = l1 == -kInf ? -kInf : r * l1;
  const double second = -(1.0 - r) * log_alpha_tilde + r * log_A;
  return std::max(first, second);
}

RosenthalResult rosenthal_minimize(double eta_tilde, double log_A, double log_alpha_tilde) {
  if (!(eta_tilde >= 0.0 && eta_tilde <= 1.0)) throw ValidationError("rosenthal: eta_tilde must lie in [0,1]");
  if (std::isnan(log_A) || std::isnan(log_alpha_tilde)) throw NumericError("rosenthal: NaN constants");
  RosenthalResult res;
  res.log_A = log_A;
  res.log_alpha_tilde = log_alpha_tilde;
  res.A = std::exp(log_A);
  res.alpha_tilde = std::exp(log_alpha_tilde);

  std::vector<std::pair<double, bool>> cand{{kRLo, false}, {kRHi, false}};
  const double l1 = std::log1p(-eta_tilde);
  const double denom = log_alpha_tilde + log_A - l1;
  if (std::isfinite(denom) && denom != 0.0) {
    const double rc = log_alpha_tilde / denom;
    if (rc > 0.0 && rc < 1.0) cand.push_back({rc, true});
  }
  res.log_t_R = kInf;
  for (auto [r, crossing] : cand) {
    const double v = rosenthal_log_objective(eta_tilde, log_A, log_alpha_tilde, r);
    if (v < res.log_t_R) {
      res.log_t_R = v;
      res.r_star = r;
      res.crossing = crossing;
    }
  }
  res.t_R = std::exp(res.log_t_R);
  res.vacuous = !(res.log_t_R < 0.0);
  return res;
}

RosenthalResult rosenthal_upper_log(double log_eta_tilde, double lambda_tilde, double log_b, double eps_alpha) {
  if (lambda_tilde >= 1.0) throw NumericError("rosenthal: drift factor degenerate (lambda_tilde = 1)");
  if (!(lambda_tilde > 0.0)) throw ValidationError("rosenthal: lambda_tilde must lie in (0,1)");
  if (!(eps_alpha > 0.0 && eps_alpha < 1.0)) throw ValidationError("rosenthal: eps_alpha must lie in (0,1)");
  if (std::isnan(log_b)) throw ValidationError("rosenthal: b must be positive");
  const double l = lambda_tilde, e = eps_alpha;
  const double log_1ml = std::log1p(-l);
  // A = (b (2l + 2) + 2 l e) / (1 - l)
  const double log_A = log_add_exp(log_b + std::log(2.0 * l + 2.0), std::log(2.0 * l * e)) - log_1ml;
  // alpha~ = 1 + e (1 - l) / (1 - l + 2b + l e)
  const double log_D = log_add_exp(std::log(2.0) + log_b, std::log(1.0 - l + l * e));
  const double log_alpha = std::log1p(std::exp(std::log(e) + log_1ml - log_D));
  return rosenthal_minimize(std::min(std::exp(log_eta_tilde), 1.0), log_A, log_alpha);
}

RosenthalResult rosenthal_upper(double eta_tilde, double lambda_tilde, double b, double eps_alpha) {
  if (!(b > 0.0)) throw ValidationError("rosenthal: b must be positive");
  if (!(eta_tilde > 0.0 && eta_tilde <= 1.0)) throw ValidationError("rosenthal: eta_tilde must lie in (0,1]");
  return rosenthal_upper_log(std::log(eta_tilde), lambda_tilde, std::log(b), eps_alpha);
}

double m_coefficient(double lambda_tilde, double b, double f_at_x) {
  if (!(lambda_tilde > 0.0 && lambda_tilde < 1.0)) throw ValidationError("M(x): lambda_tilde must lie in (0,1)");
  if (!(b > 0.0)) throw ValidationError("M(x): b must be positive");
  if (!(f_at_x > 0.0)) throw ValidationError("M(x): f(x) must be positive");
  return 2.0 + b / (1.0 - lambda_tilde) + 1.0 / std::sqrt(f_at_x);
}

double log_m_coefficient(double lambda_tilde, double log_b, double log_f_at_x) {
  const double head = log_add_exp(std::log(2.0), log_b - std::log1p(-lambda_tilde));
  return log_add_exp(head, -0.5 * log_f_at_x);
}

const char* to_string(LowerMethod m) {
  switch (m) {
    case LowerMethod::acceptance: return "acceptance";
    case LowerMethod::bounded_proposal: return "bounded_proposal";
    case LowerMethod::mode: return "mode";
    case LowerMethod::spectral_dirichlet: return "spectral_dirichlet";
    case LowerMethod::spectral_conductance: return "spectral_conductance";
  }
  return "?";
}

double spectral_lower(SpectralMode mode, double m, double m1, double L, int p, double V_dagger_0, double J_tilde) {
  if (p < 1) throw ValidationError("spectral bound: p must be positive");
  if (mode == SpectralMode::dirichlet) {
    if (!(L > 0.0)) throw ValidationError("spectral bound (dirichlet): L must be positive");
    if (!(J_tilde > 0.0)) throw ValidationError("spectral bound (dirichlet): J_tilde must be positive");
    const double v = 1.0 - 0.5 * L * p * std::exp(-V_dagger_0) / std::pow(J_tilde, 0.5 * p + 1.0);
    return std::max(v, 0.0);
  }
  if (!(m + m1 > 0.0)) throw ValidationError("spectral bound (conductance): requires m + m1 > 0");
  const double ratio = std::exp(0.5 * p * std::log(2.0 * kPi) - V_dagger_0 - 0.5 * p * std::log(m + m1));
  if (!(ratio < 1.0))
    throw ValidationError("spectral bound (conductance): validity condition (2pi)^{p/2} e^{-V(0)}/(m+m1)^{p/2} < 1 violated (ratio " +
                          fmt(ratio) + ")");
  return std::max(1.0 - ratio, 0.0);
}

std::vector<Vec> auto_candidates(const TargetBundle& bundle, const RadialProposal& prop) {
  std::vector<Vec> out{bundle.mode};
  for (int i = 0; i < bundle.dim(); ++i)
    for (double k : {1.0, 2.0, 4.0})
      for (double sgn : {1.0, -1.0}) {
        Vec x = bundle.mode;
        x[i] += sgn * k * prop.scale();
        out.push_back(x);
      }
  return out;
}

namespace {

LowerBound make_bound(LowerMethod m, double raw) {
  LowerBound b;
  b.method = m;
  b.raw = raw;
  b.value = std::clamp(raw, 0.0, std::nextafter(1.0, 0.0));
  b.floored = b.value != raw;
  b.vacuous = !(b.value > 0.0);
  return b;
}

}  // namespace

LowerBound mode_lower_bound(const TargetBundle& bundle, const RadialProposal& prop, long n_mc, std::uint64_t seed) {
  using boost::math::quadrature::gauss_kronrod;
  const int p = bundle.dim();
  const Vec& xs = bundle.mode;
  const double lp = bundle.log_p_star;
  const double W = prop.family() == ProposalFamily::gaussian ? 40.0 * prop.scale() : (60.0 + 5.0 * p) * prop.scale();
  double ratio = 0.0, se = 0.0, err = 0.0;
  std::string method;
  auto integrand = [&](const Vec& y) { return std::exp(bundle.log_f(y) - lp + prop.log_q((y - xs).norm())); };
  if (p == 1) {
    Vec y(1);
    ratio = gauss_kronrod<double, 31>::integrate(
        [&](double t) {
          y[0] = t;
          return integrand(y);
        },
        xs[0] - W, xs[0] + W, 20, 1e-13, &err);
    method = "quadrature";
  } else if (p == 2) {
    Vec y(2);
    ratio = gauss_kronrod<double, 31>::integrate(
        [&](double s) {
          y[0] = s;
          double e2 = 0.0;
          const double v = gauss_kronrod<double, 31>::integrate(
              [&](double t) {
                y[1] = t;
                return integrand(y);
              },
              xs[1] - W, xs[1] + W, 20, 1e-13, &e2);
          err = std::max(err, e2);
          return v;
        },
        xs[0] - W, xs[0] + W, 20, 1e-13, &err);
    method = "quadrature";
  } else {
    if (n_mc < 1000) throw ValidationError("mode bound: n_mc must be at least 1000");
    Rng rng(seed, 0x30de);
    double s = 0.0, s2 = 0.0;
    for (long i = 0; i < n_mc; ++i) {
      const double v = std::exp(bundle.log_f(xs + prop.sample_increment(rng)) - lp);
      s += v;
      s2 += v * v;
    }
    ratio = s / n_mc;
    se = std::sqrt(std::max(s2 / n_mc - ratio * ratio, 0.0) / (n_mc - 1));
    method = "monte_carlo";
  }
  LowerBound b = make_bound(LowerMethod::mode, 1.0 - ratio);
  b.std_error = se;
  b.metadata["method"] = method;
  b.metadata["E_f_over_pstar"] = fmt(ratio);
  if (method == "quadrature") b.metadata["quad_error"] = fmt(err);
  return b;
}

std::vector<LowerBound> lower_bounds(const TargetBundle& bundle, const RadialProposal& prop, const LowerOptions& opts,
                                     std::vector<std::string>* notices) {
  const int p = bundle.dim();
  if (prop.dim() != p) throw ValidationError("lower bounds: proposal dimension does not match target");
  if (opts.n_mc < 10000) throw ValidationError("lower bounds: n_mc must be at least 1e4");
  auto notice = [&](const std::string& s) {
    if (notices) notices->push_back(s);
  };

  std::vector<Vec> cands = opts.candidates;
  if (opts.auto_candidates) {
    auto extra = auto_candidates(bundle, prop);
    cands.insert(cands.end(), extra.begin(), extra.end());
  }
  if (cands.empty()) throw ValidationError("lower bounds: candidate set is empty");
  for (const auto& c : cands)
    if (c.size() != p) throw ValidationError("lower bounds: candidate point has wrong dimension");

  std::vector<LowerBound> out;

  // Acceptance: 1 - min over candidates of the MC acceptance probability.
  {
    double best = kInf, best_se = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const AcceptanceEstimate a = estimate_acceptance(bundle, prop, cands[i], opts.n_mc, opts.seed, 0xacc0 + i);
      if (a.alpha_hat < best) {
        best = a.alpha_hat;
        best_se = a.se;
        arg = i;
      }
    }
    LowerBound b = make_bound(LowerMethod::acceptance, 1.0 - best);
    b.std_error = best_se;
    b.metadata["label"] = "candidate-set lower bound";
    b.metadata["n_candidates"] = std::to_string(cands.size());
    b.metadata["argmin_index"] = std::to_string(arg);
    b.metadata["alpha_hat_min"] = fmt(best);
    out.push_back(std::move(b));
  }

  // Bounded proposal with B = q(0).
  {
    double best = -kInf;
    for (const auto& c : cands) best = std::max(best, 1.0 - std::exp(prop.log_q0() - bundle.log_f(c)));
    LowerBound b = make_bound(LowerMethod::bounded_proposal, best);
    b.metadata["B"] = "q(0)";
    b.metadata["q0"] = fmt(prop.q0());
    out.push_back(std::move(b));
  }

  if (bundle.mode.size() == p)
    out.push_back(mode_lower_bound(bundle, prop, opts.n_mc, opts.seed));
  else
    notice("mode bound skipped: bundle has no mode");

  if (opts.spectral.m || opts.spectral.L) {
    if (prop.family() != ProposalFamily::gaussian) {
      notice("spectral bounds skipped: they require a Gaussian proposal (m1 = 1/sigma^2)");
    } else {
      const double m1 = prop.spectral_m1();
      const double V0 = prop.v_dagger_0();
      if (opts.spectral.L) {
        LowerBound b = make_bound(LowerMethod::spectral_dirichlet,
                                  spectral_lower(SpectralMode::dirichlet, opts.spectral.m.value_or(0.0), m1,
                                                 *opts.spectral.L, p, V0, m1));
        b.metadata["L"] = fmt(*opts.spectral.L);
        b.metadata["J_tilde"] = fmt(m1);
        b.metadata["V_dagger_0"] = fmt(V0);
        out.push_back(std::move(b));
      }
      if (opts.spectral.m) {
        LowerBound b = make_bound(LowerMethod::spectral_conductance,
                                  spectral_lower(SpectralMode::conductance, *opts.spectral.m, m1, 0.0, p, V0, m1));
        b.metadata["m"] = fmt(*opts.spectral.m);
        b.metadata["m1"] = fmt(m1);
        b.metadata["V_dagger_0"] = fmt(V0);
        out.push_back(std::move(b));
      }
    }
  }
  return out;
}

RateReport rate_report(const DriftMinCert& cert, const TargetBundle& bundle, const RadialProposal& prop,
                       const LowerOptions& opts) {
  RateReport r;
  r.upper = rosenthal_upper_log(cert.log_eta_tilde, cert.lambda_tilde, cert.log_b, cert.cone.eps_alpha);
  r.lower = lower_bounds(bundle, prop, opts, &r.notices);
  r.log_M_coefficient = log_add_exp(std::log(2.0), cert.log_b - std::log1p(-cert.lambda_tilde));
  r.M_coefficient = std::exp(r.log_M_coefficient);
  r.norm_quality = bundle.target.norm_quality;
  if (r.upper.vacuous) r.notices.push_back("upper bound is vacuous (t_R >= 1)");
  return r;
}

}  // namespace rwcert
