#include "rwcert/glm.hpp"

#include "rwcert/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rwcert {

// -- data ------------------------------------------------------------------

void GLMData::validate() const {
  if (X.rows() != T.rows()) throw ValidationError("glm data: X and T have different row counts");
  if (X.cols() < 1) throw ValidationError("glm data: need at least one covariate column");
  if (!X.allFinite() || !T.allFinite()) throw ValidationError("glm data: non-finite entries");
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

GLMData parse_glm_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split_csv_line(line);
  }
  if (header.size() < 2) throw ValidationError(source + ": header must be 'y,x1,...,xp' with p >= 1");
  if (header[0] != "y") throw ValidationError(source + ": first header column must be 'y', got '" + header[0] + "'");
  for (std::size_t j = 1; j < header.size(); ++j)
    if (header[j] != "x" + std::to_string(j))
      throw ValidationError(source + ": header column " + std::to_string(j + 1) + " must be 'x" + std::to_string(j) +
                            "', got '" + header[j] + "'");
  const std::size_t p = header.size() - 1;

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
    std::vector<double> row;
    for (const auto& f : fields) {
      char* end = nullptr;
      const double v = f.empty() ? 0.0 : std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size())
        throw ValidationError(source + ":" + std::to_string(lineno) + ": cannot parse '" + f + "' as a number");
      if (!std::isfinite(v))
        throw ValidationError(source + ":" + std::to_string(lineno) + ": non-finite value '" + f + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }

  GLMData d;
  d.X.resize(Eigen::Index(rows.size()), Eigen::Index(p));
  d.T.resize(Eigen::Index(rows.size()), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.T(Eigen::Index(i), 0) = rows[i][0];
    for (std::size_t j = 0; j < p; ++j) d.X(Eigen::Index(i), Eigen::Index(j)) = rows[i][j + 1];
  }
  return d;
}

GLMData load_glm_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open dataset '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_glm_csv(ss.str(), path);
}

// -- priors ----------------------------------------------------------------

void PriorSpec::validate() const {
  if (!g || !grad_g) throw ValidationError("prior: g and grad g are required");
  if (!(lambda2 > 0.0)) throw ValidationError("prior: lambda2 must be positive");
  if (kind == PriorKind::strongly_convex && !(lambda1 > 0.0))
    throw ValidationError("prior: strong convexity constant lambda1 must be positive");
  if (kind == PriorKind::dissipative && !(a_dag > 0.0 && b_dag >= 0.0))
    throw ValidationError("prior: dissipative prior needs a_dag > 0 and b_dag >= 0");
}

PriorSpec gaussian_prior(double tau2) {
  if (!(tau2 > 0.0)) throw ValidationError("prior: variance must be positive");
  PriorSpec pr;
  pr.g = [tau2](const Vec& t) { return 0.5 * t.squaredNorm() / tau2; };
  pr.grad_g = [tau2](const Vec& t) -> Vec { return t / tau2; };
  pr.hess_g = [tau2](const Vec& t) -> Mat { return Mat::Identity(t.size(), t.size()) / tau2; };
  pr.lambda1 = pr.lambda2 = 1.0 / tau2;
  pr.kind = PriorKind::strongly_convex;
  std::ostringstream os;
  os << "gaussian(tau2=" << tau2 << ")";
  pr.descr = os.str();
  return pr;
}

double prior_lipschitz_ratio(const PriorSpec& prior, int p, int n_pairs, std::uint64_t seed) {
  Rng rng(seed, 0x11b5);
  double worst = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    Vec a(p), b(p);
    for (int i = 0; i < p; ++i) {
      a[i] = 5.0 * rng.normal();
      b[i] = 5.0 * rng.normal();
    }
    const double d = (a - b).norm();
    if (d > 0.0) worst = std::max(worst, (prior.grad_g(a) - prior.grad_g(b)).norm() / d);
  }
  return worst;
}

const char* to_string(CumulantCase c) {
  return c == CumulantCase::bounded_gradient ? "bounded_gradient" : "convex_bounded_curvature";
}

// -- constants ---------------------------------------------------------------

GLMConstants glm_constants(const GLMData& data, const PriorSpec& prior, double lambda_data, double K_data,
                           CumulantCase cc, const std::vector<Vec>& grad_c_at_0, double eta, const GLMZeroTerms& zero) {
  prior.validate();
  if (data.X.rows() > 0) data.validate();
  if (!(lambda_data >= 0.0) || !std::isfinite(lambda_data)) throw ValidationError("glm: lambda_data must be finite, >= 0");
  if (!(K_data >= 0.0) || !std::isfinite(K_data)) throw ValidationError("glm: K_data must be finite, >= 0");
  const int n = data.n();
  if (int(grad_c_at_0.size()) != n && !(cc == CumulantCase::bounded_gradient && grad_c_at_0.empty()))
    throw ValidationError("glm: need one grad c(0, x_i) per observation");

  GLMConstants k;
  k.route = "general";
  k.lambda_data = lambda_data;
  k.K_data = K_data;
  k.cumulant_case = cc;
  k.prior_kind = prior.kind;
  k.gamma = prior.gamma();
  k.lambda2 = prior.lambda2;
  if (!(eta > 0.0 && eta * k.lambda2 < k.gamma)) {
    std::ostringstream os;
    os << "glm: curvature margin violated (need 0 < eta < gamma/lambda2 = " << k.gamma / k.lambda2 << ", eta=" << eta << ")";
    throw ValidationError(os.str());
  }
  k.eta = eta;

  for (int i = 0; i < n; ++i) k.sum_T += data.T.row(i).norm();
  double max_gc0 = 0.0;
  for (const auto& v : grad_c_at_0) max_gc0 = std::max(max_gc0, v.norm());
  const Vec zero_theta = Vec::Zero(data.p() > 0 ? data.p() : 1);
  const double g0 = std::abs(prior.g(zero_theta));
  const double gg0 = prior.grad_g(zero_theta).norm();
  const double prior_term = prior.kind == PriorKind::strongly_convex ? gg0 : prior.b_dag;
  const bool bounded = cc == CumulantCase::bounded_gradient;

  const double data_term = lambda_data * k.sum_T;
  k.C1 = data_term + (bounded ? n * K_data : n * max_gc0) + prior_term;
  k.K1 = zero.max_norm_Pi0 * k.sum_T + n * zero.max_abs_c0 + g0;
  k.K2 = data_term + (bounded ? n * K_data : n * max_gc0) + gg0;
  k.K3 = bounded ? 0.5 * k.lambda2 : 0.5 * (k.lambda2 + n * K_data);
  k.J_tilde = bounded ? n * K_data : n * max_gc0 + n * K_data;
  k.Mp_prime = std::max((k.C1 + data_term + k.J_tilde + gg0) / (k.gamma - eta * k.lambda2), 1.0);
  return k;
}

namespace {

double max_row_norm(const Mat& X) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) m = std::max(m, X.row(i).norm());
  return m;
}

double lambda_max_gram(const Mat& X) {
  if (X.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(X.transpose() * X, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

void check_binary(const Vec& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0.0 && y[i] != 1.0)
      throw ValidationError("logistic: non-binary y at row " + std::to_string(i + 1));
}

}  // namespace

double logistic_eta_limit(const Mat& X) { return 1.0 / (1.0 + lambda_max_gram(X) / 4.0); }

GLMConstants logistic_constants(const Mat& X, const Vec& y, double eta) {
  if (X.rows() != y.size()) throw ValidationError("logistic: X and y have different lengths");
  check_binary(y);
  const int n = int(X.rows());
  const double mx = max_row_norm(X);
  const double sy = y.cwiseAbs().sum();

  GLMConstants k;
  k.route = "logistic";
  k.cumulant_case = CumulantCase::bounded_gradient;
  k.prior_kind = PriorKind::strongly_convex;
  k.lambda_data = mx;
  k.K_data = mx;
  k.sum_T = sy;
  k.gamma = 1.0;
  k.lambda2 = 1.0 + lambda_max_gram(X) / 4.0;
  if (!(eta > 0.0 && eta * k.lambda2 < 1.0)) {
    std::ostringstream os;
    os << "logistic: curvature margin violated (need 0 < eta < 1/lambda2 = " << 1.0 / k.lambda2 << ", eta=" << eta << ")";
    throw ValidationError(os.str());
  }
  k.eta = eta;
  k.C1 = (n + sy) * mx;
  k.K1 = 0.0;
  k.K2 = mx * (n + sy);
  k.K3 = 1.0;
  k.J_tilde = n;
  k.Mp_prime = std::max((k.C1 + mx * sy + n) / (1.0 - eta * k.lambda2), 1.0);
  return k;
}

// -- normalizing constants --------------------------------------------------

double log_normalizer(const std::function<double(const Vec&)>& u, const std::function<Mat(const Vec&)>& hess,
                      const Vec& mode, NormalizerMethod method) {
  const int p = int(mode.size());
  const double um = u(mode);
  const Mat negH = -hess(mode);
  Eigen::SelfAdjointEigenSolver<Mat> es(negH);
  const Vec ev = es.eigenvalues();
  if (!(ev.minCoeff() > 0.0)) throw NumericError("normalizer: Hessian at the mode is not negative definite");

  if (method == NormalizerMethod::laplace)
    return um + 0.5 * p * std::log(2.0 * kPi) - 0.5 * ev.array().log().sum();
  if (method != NormalizerMethod::quadrature) throw ValidationError("normalizer: unsupported method");
  if (p > 2) throw ValidationError("normalizer: quadrature restricted to p <= 2");

  using boost::math::quadrature::gauss_kronrod;
  const double W = 40.0 / std::sqrt(ev.minCoeff());
  double err = 0.0;
  Vec t = mode;
  double v;
  if (p == 1) {
    v = gauss_kronrod<double, 31>::integrate(
        [&](double s) {
          t[0] = s;
          return std::exp(u(t) - um);
        },
        mode[0] - W, mode[0] + W, 20, 1e-13, &err);
  } else {
    v = gauss_kronrod<double, 31>::integrate(
        [&](double s) {
          t[0] = s;
          double e2 = 0.0;
          return gauss_kronrod<double, 31>::integrate(
              [&](double r) {
                t[1] = r;
                return std::exp(u(t) - um);
              },
              mode[1] - W, mode[1] + W, 20, 1e-13, &e2);
        },
        mode[0] - W, mode[0] + W, 20, 1e-13, &err);
  }
  return um + std::log(v);
}

namespace {

// Builds the normalized target from an unnormalized one: mode first, then the
// offset from the chosen normalizer.
LogTarget normalize(LogTarget t, const NormalizerOptions& norm) {
  const ModeResult m = find_mode(t, Vec::Zero(t.dim));
  double logZ;
  if (norm.method == NormalizerMethod::user)
    logZ = norm.user_log_normalizer;
  else
    logZ = log_normalizer(t.log_density, t.hess_log_density, m.mode, norm.method);
  const double offset = -logZ;
  auto ld = t.log_density;
  t.log_density = [ld, offset](const Vec& x) { return ld(x) + offset; };
  t.log_norm_offset = offset;
  t.norm_quality = NormQuality::approximate;
  return t;
}

std::string quad_descr(double a, double b, double c, double extra) {
  std::ostringstream os;
  os.precision(17);
  os << a << " + " << b << "*u + " << c << "*u^2 + |offset|(" << extra << ")";
  return os.str();
}

}  // namespace

TargetBundle expfam_posterior(const GLMData& data, const CumulantFn& cum, const PriorSpec& prior,
                              std::optional<double> eta, const NormalizerOptions& norm) {
  prior.validate();
  if (prior.kind != PriorKind::strongly_convex) throw ValidationError("expfam posterior: prior must be strongly convex");
  if (!cum.c || !cum.grad_c) throw ValidationError("expfam posterior: cumulant c and grad c are required");
  const int p = data.p();
  const int n = data.n();
  if (n > 0) data.validate();
  const Vec S = n > 0 ? Vec(data.X.colwise().sum().transpose()) : Vec::Zero(p);

  LogTarget t;
  t.dim = p;
  t.log_density = [=](const Vec& th) { return th.dot(S) - n * cum.c(th) - prior.g(th); };
  t.grad_log_density = [=](const Vec& th) -> Vec { return S - n * cum.grad_c(th) - prior.grad_g(th); };
  if (cum.hess_c && prior.hess_g)
    t.hess_log_density = [=](const Vec& th) -> Mat { return -n * cum.hess_c(th) - prior.hess_g(th); };
  t = normalize(std::move(t), norm);

  const Vec z = Vec::Zero(p);
  double sum_x = 0.0;
  for (int i = 0; i < n; ++i) sum_x += data.X.row(i).norm();
  const double gc0 = cum.grad_c(z).norm();
  const double gg0 = prior.grad_g(z).norm();
  const double C1 = sum_x + n * gc0 + gg0;

  const double a0 = std::abs(t.log_norm_offset) + n * std::abs(cum.c(z)) + std::abs(prior.g(z));
  const double a1 = sum_x + n * gc0 + gg0;
  const double a2 = 0.5 * (n * cum.hessian_bound + prior.lambda2);
  Envelope env{[=](double r) { return a0 + a1 * r + a2 * r * r; }, quad_descr(a0, a1, a2, t.log_norm_offset)};

  const double gamma = prior.gamma();
  const double e = eta.value_or(0.5 * gamma / prior.lambda2);
  if (!(e > 0.0 && e * prior.lambda2 < gamma)) throw ValidationError("expfam posterior: curvature margin violated");
  const double J = n * gc0 + n * cum.hessian_bound;
  const double Mp = std::max((C1 + sum_x + J + gg0) / (gamma - e * prior.lambda2), 1.0);

  return make_bundle("expfam_posterior", std::move(t), std::move(env),
                     SuperexpCert{RateFunction::affine(prior.lambda1), C1, 0.0}, CurvatureCert{e, Mp}, Vec::Zero(p));
}

TargetBundle logistic_bundle(const Mat& X, const Vec& y, const GLMConstants& k, const NormalizerOptions& norm) {
  check_binary(y);
  const int p = int(X.cols());
  const double log2 = std::log(2.0);
  LogTarget t;
  t.dim = p;
  // Cumulant centered at 0 (log(1+e^s) - log 2); the shift is absorbed by the normalizer.
  t.log_density = [=](const Vec& th) {
    const Vec s = X * th;
    double v = y.dot(s) - 0.5 * th.squaredNorm();
    for (Eigen::Index i = 0; i < s.size(); ++i) v -= softplus(s[i]) - log2;
    return v;
  };
  t.grad_log_density = [=](const Vec& th) -> Vec {
    const Vec s = X * th;
    Vec r(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) r[i] = y[i] - 1.0 / (1.0 + std::exp(-s[i]));
    return X.transpose() * r - th;
  };
  t.hess_log_density = [=](const Vec& th) -> Mat {
    const Vec s = X * th;
    Vec w(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double sg = 1.0 / (1.0 + std::exp(-s[i]));
      w[i] = sg * (1.0 - sg);
    }
    return -(X.transpose() * w.asDiagonal() * X) - Mat::Identity(p, p);
  };
  t = normalize(std::move(t), norm);

  const double off = std::abs(t.log_norm_offset);
  Envelope env{[k, off](double r) { return k.f_xy(r) + off; }, quad_descr(k.K1, k.K2, k.K3, t.log_norm_offset)};
  return make_bundle("logistic_posterior", std::move(t), std::move(env),
                     SuperexpCert{RateFunction::affine(k.gamma), k.C1, 0.0}, CurvatureCert{k.eta, k.Mp_prime},
                     Vec::Zero(p));
}

LogisticResult logistic_preset(const Mat& X, const Vec& y, const RadialProposal& prop, std::optional<double> eta,
                               std::optional<ConeParams> cone, const LowerOptions& lower, const NormalizerOptions& norm) {
  if (prop.dim() != X.cols()) throw ValidationError("logistic: proposal dimension does not match covariates");
  const double e = eta.value_or(0.5 * logistic_eta_limit(X));
  GLMConstants k = logistic_constants(X, y, e);
  TargetBundle b = logistic_bundle(X, y, k, norm);
  ConeParams cp = cone.value_or(ConeParams{});
  if (!cone) cp.eps_alpha = default_eps_alpha(e);
  DriftMinCert cert = drift_certificate(b, prop, cp);
  RateReport rate = rate_report(cert, b, prop, lower);
  return {std::move(b), k, std::move(cert), std::move(rate)};
}

TargetBundle poisson_bundle(const Mat& X, const Vec& y, const PriorSpec& prior, const NormalizerOptions& norm) {
  prior.validate();
  if (prior.kind != PriorKind::strongly_convex) throw ValidationError("poisson: prior must be strongly convex");
  if (X.rows() != y.size()) throw ValidationError("poisson: X and y have different lengths");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0) throw ValidationError("poisson: negative count at row " + std::to_string(i + 1));
    if (y[i] != std::floor(y[i])) throw ValidationError("poisson: non-integer count at row " + std::to_string(i + 1));
  }
  if (!prior.hess_g) throw ValidationError("poisson: prior Hessian required for the mode search");
  const int p = int(X.cols());
  LogTarget t;
  t.dim = p;
  t.log_density = [=](const Vec& th) {
    const Vec s = X * th;
    return y.dot(s) - s.array().exp().sum() - prior.g(th);
  };
  t.grad_log_density = [=](const Vec& th) -> Vec {
    const Vec s = X * th;
    return X.transpose() * (y - Vec(s.array().exp())) - prior.grad_g(th);
  };
  t.hess_log_density = [=](const Vec& th) -> Mat {
    const Vec s = X * th;
    return -(X.transpose() * Vec(s.array().exp()).asDiagonal() * X) - prior.hess_g(th);
  };
  t = normalize(std::move(t), norm);

  const Vec z = Vec::Zero(p);
  const int n = int(X.rows());
  const double mx = max_row_norm(X);
  const double gg0 = prior.grad_g(z).norm();
  // Convex cumulant exp(s) with grad c(0, x) = x.
  const double C1 = mx * y.cwiseAbs().sum() + n * mx + gg0;

  // exp(x'theta) has no quadratic bound, so the envelope keeps the exponential terms.
  Vec norms(n), yx(n);
  for (int i = 0; i < n; ++i) {
    norms[i] = X.row(i).norm();
    yx[i] = std::abs(y[i]) * norms[i];
  }
  const double a0 = std::abs(t.log_norm_offset) + std::abs(prior.g(z));
  const double a1 = yx.sum() + gg0;
  const double a2 = 0.5 * prior.lambda2;
  Envelope env{[=](double r) {
                 double v = a0 + a1 * r + a2 * r * r;
                 for (Eigen::Index i = 0; i < norms.size(); ++i) v += std::exp(norms[i] * r);
                 return v;
               },
               "|offset| + |g(0)| + (sum|y_i||x_i| + |grad g(0)|) u + lambda2 u^2/2 + sum exp(|x_i| u)"};
  return make_bundle("poisson_posterior", std::move(t), std::move(env),
                     SuperexpCert{RateFunction::affine(prior.gamma()), C1, 0.0}, std::nullopt, Vec::Zero(p));
}

double poisson_lower_formula(double f_at_mode, double h, int p) {
  if (!(f_at_mode > 0.0) || !(h > 0.0) || p < 1) throw ValidationError("poisson bound: needs f > 0, h > 0, p >= 1");
  return 1.0 - 1.0 / (f_at_mode * std::pow(2.0 * kPi * h, 0.5 * p));
}

PoissonResult poisson_preset(const Mat& X, const Vec& y, const PriorSpec& prior, const RadialProposal& prop,
                             const NormalizerOptions& norm) {
  if (prop.family() != ProposalFamily::gaussian) throw ValidationError("poisson: bound requires a Gaussian proposal");
  if (prop.dim() != X.cols()) throw ValidationError("poisson: proposal dimension does not match covariates");
  PoissonResult r{poisson_bundle(X, y, prior, norm), 0.0, false, {}};
  const double h = prop.scale() * prop.scale();
  r.lower_bound = poisson_lower_formula(r.bundle.p_star, h, int(X.cols()));
  if (r.lower_bound > 0.99) {
    r.near_vacuous = true;
    r.warnings.push_back("lower bound close to 1: convergence may be prohibitively slow; consider h < 1");
  }
  if (r.lower_bound <= 0.0) r.warnings.push_back("lower bound is vacuous (<= 0)");
  return r;
}

}  // namespace rwcert
