#include "rwcert/oracle.hpp"

#include "rwcert/numerics.hpp"
#include "rwcert/simd/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rwcert {

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim(); ++a) v *= width(a);
  return v;
}

Vec Grid::center(int flat) const {
  Vec c(dim());
  if (dim() == 1) {
    c[0] = lo[0] + (flat + 0.5) * width(0);
  } else {
    c[0] = lo[0] + (flat / n + 0.5) * width(0);
    c[1] = lo[1] + (flat % n + 0.5) * width(1);
  }
  return c;
}

bool Grid::covers(double r) const {
  for (int a = 0; a < dim(); ++a)
    if (lo[a] > -r || hi[a] < r) return false;
  return true;
}

void Grid::validate() const {
  if (dim() != 1 && dim() != 2) throw ValidationError("oracle restricted to p <= 2");
  if (hi.size() != lo.size()) throw ValidationError("oracle grid: lo/hi dimension mismatch");
  if (n < 11) throw ValidationError("oracle grid: need at least 11 cells per axis");
  for (int a = 0; a < dim(); ++a)
    if (!(hi[a] > lo[a]) || !std::isfinite(hi[a] - lo[a])) throw ValidationError("oracle grid: need hi > lo");
}

Grid Grid::grid1d(double lo, double hi, int n) {
  Grid g;
  g.lo = Vec::Constant(1, lo);
  g.hi = Vec::Constant(1, hi);
  g.n = n;
  g.validate();
  return g;
}

Grid Grid::grid2d(double lo, double hi, int n) {
  Grid g;
  g.lo = Vec::Constant(2, lo);
  g.hi = Vec::Constant(2, hi);
  g.n = n;
  g.validate();
  return g;
}

Grid default_oracle_grid(const TargetBundle& bundle) {
  const int p = bundle.dim();
  if (p > 2) throw ValidationError("oracle restricted to p <= 2");
  double s = 1.0;
  if (bundle.target.hess_log_density) {
    Eigen::SelfAdjointEigenSolver<Mat> es(-bundle.target.hess_log_density(bundle.mode), Eigen::EigenvaluesOnly);
    const double mn = es.eigenvalues().minCoeff();
    if (mn > 0.0 && std::isfinite(mn)) s = 1.0 / std::sqrt(mn);
  }
  const double half = bundle.mode.cwiseAbs().maxCoeff() + 8.0 * s;
  return p == 1 ? Grid::grid1d(-half, half, 161) : Grid::grid2d(-half, half, 61);
}

DiscreteKernel discretize(const TargetBundle& bundle, const RadialProposal& prop, const Grid& grid) {
  grid.validate();
  if (bundle.dim() != grid.dim() || prop.dim() != grid.dim())
    throw ValidationError("oracle: grid, target and proposal dimensions differ");

  DiscreteKernel k;
  k.n = grid.size();
  k.cell_volume = grid.cell_volume();
  k.centers.reserve(k.n);
  k.log_f.resize(k.n);
  for (int i = 0; i < k.n; ++i) {
    k.centers.push_back(grid.center(i));
    k.log_f[i] = bundle.log_f(k.centers[i]);
    if (std::isnan(k.log_f[i])) throw NumericError("oracle: log-density is NaN at a grid center");
  }

  const std::size_t n = std::size_t(k.n);
  k.P.assign(n * n, 0.0);
  std::vector<double> log_q(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) log_q[j] = prop.log_q((k.centers[i] - k.centers[j]).norm());
    std::span<double> row(k.P.data() + i * n, n);
    simd::metropolis_weights(k.log_f[i], k.log_f, log_q, k.cell_volume, row);
    row[i] = 0.0;
    const double off = simd::sum(row);
    const double diag = 1.0 - off;
    if (diag < 0.0) {
      std::ostringstream os;
      os << "oracle: row " << i << " has off-diagonal mass " << off << " > 1; refine grid or shrink extent";
      throw NumericError(os.str());
    }
    row[i] = diag;
  }
  return k;
}

namespace {

// y = x P, row by row.
void left_multiply(const DiscreteKernel& k, const std::vector<double>& x, std::vector<double>& y) {
  std::fill(y.begin(), y.end(), 0.0);
  const std::size_t n = std::size_t(k.n);
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] != 0.0) simd::axpy(x[i], std::span<const double>(k.row(int(i)), n), y);
}

}  // namespace

StationaryResult stationary_and_slem(const DiscreteKernel& k, double tol, int max_iter) {
  const std::size_t n = std::size_t(k.n);
  if (n < 2) throw ValidationError("oracle: kernel needs at least two states");
  StationaryResult r;

  // Start from f on the centers, which is stationary up to rounding when the
  // kernel was built by discretize().
  std::vector<double> pi(n), next(n);
  const double lmax = *std::max_element(k.log_f.begin(), k.log_f.end());
  for (std::size_t i = 0; i < n; ++i) pi[i] = std::exp(k.log_f[i] - lmax);
  double s = simd::sum(pi);
  for (auto& v : pi) v /= s;

  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    left_multiply(k, pi, next);
    s = simd::sum(next);
    for (auto& v : next) v /= s;
    const double change = simd::l1_distance(next, pi);
    pi.swap(next);
    r.iterations = it;
    if (change < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericError("oracle: power iteration for the stationary vector did not converge");

  Mat S(k.n, k.n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(pi[i] > 0.0)) throw NumericError("oracle: stationary vector has a zero entry; shrink extent");
    sq[i] = std::sqrt(pi[i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) S(Eigen::Index(i), Eigen::Index(j)) = sq[i] * k(int(i), int(j)) / sq[j];
  S = 0.5 * (S + S.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("oracle: eigen-decomposition failed");
  const Vec ev = es.eigenvalues();  // ascending
  r.spectrum.assign(ev.data(), ev.data() + ev.size());
  std::reverse(r.spectrum.begin(), r.spectrum.end());
  r.slem = std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 2]));
  if (!(r.slem < 1.0)) throw NumericError("oracle: SLEM >= 1, the discretized chain does not mix");
  r.pi_hat = std::move(pi);
  return r;
}

double reversibility_residual(const DiscreteKernel& k, const std::vector<double>& pi) {
  double worst = 0.0;
  for (int i = 0; i < k.n; ++i)
    for (int j = i + 1; j < k.n; ++j) worst = std::max(worst, std::abs(pi[i] * k(i, j) - pi[j] * k(j, i)));
  return worst;
}

std::vector<double> tv_decay(const DiscreteKernel& k, const std::vector<double>& pi, int start, int n_steps) {
  if (start < 0 || start >= k.n) throw ValidationError("oracle: TV start index outside the grid");
  if (n_steps < 0) throw ValidationError("oracle: n_steps must be >= 0");
  std::vector<double> mu(std::size_t(k.n), 0.0), next(std::size_t(k.n));
  mu[std::size_t(start)] = 1.0;
  std::vector<double> tv;
  tv.reserve(std::size_t(n_steps) + 1);
  tv.push_back(0.5 * simd::l1_distance(mu, pi));
  for (int t = 1; t <= n_steps; ++t) {
    left_multiply(k, mu, next);
    mu.swap(next);
    tv.push_back(0.5 * simd::l1_distance(mu, pi));
  }
  return tv;
}

int nearest_cell(const DiscreteKernel& k, const Vec& x) {
  int best = 0;
  double bd = kInf;
  for (int i = 0; i < k.n; ++i) {
    const double d = (k.centers[i] - x).squaredNorm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

bool SandwichVerdict::passed() const {
  return std::all_of(lines.begin(), lines.end(), [](const SandwichLine& l) { return !l.checked || l.pass; });
}

SandwichVerdict sandwich_check(const RateReport& report, double slem, double slack) {
  if (!(slem >= 0.0 && slem < 1.0)) throw ValidationError("sandwich: slem must lie in [0, 1)");
  if (!(slack >= 0.0)) throw ValidationError("sandwich: slack must be >= 0");
  SandwichVerdict v;
  v.slem = slem;
  v.slack = slack;
  for (const auto& lb : report.lower) {
    SandwichLine l;
    l.label = std::string("lower:") + to_string(lb.method);
    l.bound = lb.value;
    l.margin = slem + slack - lb.value;
    if (lb.vacuous) {
      l.checked = false;
      l.note = "vacuous lower bound, not checked";
    } else {
      l.pass = l.margin >= 0.0;
    }
    v.lines.push_back(std::move(l));
  }
  SandwichLine u;
  u.label = "upper:rosenthal";
  u.bound = report.upper.t_R;
  u.margin = report.upper.t_R + slack - slem;
  if (report.upper.vacuous) {
    u.checked = false;
    u.note = "upper bound vacuous (t_R >= 1), not checked";
    v.annotations.push_back("upper bound vacuous; only the lower half of the sandwich was checked");
  } else {
    u.pass = u.margin >= 0.0;
  }
  v.lines.push_back(std::move(u));
  return v;
}

}  // namespace rwcert
