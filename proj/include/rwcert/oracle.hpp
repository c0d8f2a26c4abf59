#pragma once

#include "rwcert/proposal.hpp"
#include "rwcert/rate.hpp"
#include "rwcert/target.hpp"

#include <string>
#include <vector>

namespace rwcert {

/// Tensor grid of n cells per axis on [lo, hi] (p = 1 or 2). Cell i along an
/// axis has center lo + (i + 1/2) * width.
struct Grid {
  Vec lo, hi;
  int n = 161;

  int dim() const { return int(lo.size()); }
  int size() const { return dim() == 1 ? n : n * n; }
  double width(int axis) const { return (hi[axis] - lo[axis]) / n; }
  double cell_volume() const;
  Vec center(int flat) const;
  /// Whether the grid contains the closed ball B(0, r).
  bool covers(double r) const;
  void validate() const;

  static Grid grid1d(double lo, double hi, int n);
  static Grid grid2d(double lo, double hi, int n);
};

/// [mode - 8 s, mode + 8 s] per axis with s the largest posterior standard
/// deviation from the Hessian at the mode (1 if unavailable); 161 cells in
/// 1-D, 61 per axis in 2-D.
Grid default_oracle_grid(const TargetBundle& bundle);

struct DiscreteKernel {
  int n = 0;
  std::vector<double> P;  // row-major n x n
  std::vector<Vec> centers;
  std::vector<double> log_f;
  double cell_volume = 0.0;

  double operator()(int i, int j) const { return P[std::size_t(i) * n + j]; }
  const double* row(int i) const { return P.data() + std::size_t(i) * n; }
};

/// Off-diagonal P_ij = alpha(x_i, x_j) q(|x_i - x_j|) * cell volume; the
/// diagonal takes the rejected mass.
DiscreteKernel discretize(const TargetBundle& bundle, const RadialProposal& prop, const Grid& grid);

struct StationaryResult {
  std::vector<double> pi_hat;
  double slem = 0.0;
  std::vector<double> spectrum;  // eigenvalues of the symmetrized kernel, descending
  int iterations = 0;
};

/// Stationary vector by power iteration (L1 change below tol), then the
/// spectrum of D^{1/2} P D^{-1/2} with D = diag(pi_hat).
StationaryResult stationary_and_slem(const DiscreteKernel& k, double tol = 1e-12, int max_iter = 100000);

/// max_ij |pi_i P_ij - pi_j P_ji|
double reversibility_residual(const DiscreteKernel& k, const std::vector<double>& pi);

/// TV_t = 1/2 || e_start P^t - pi ||_1 for t = 0..n_steps.
std::vector<double> tv_decay(const DiscreteKernel& k, const std::vector<double>& pi, int start, int n_steps);

/// Index of the cell whose center is nearest to x.
int nearest_cell(const DiscreteKernel& k, const Vec& x);

struct SandwichLine {
  std::string label;
  double bound = 0.0;
  double margin = 0.0;  // positive means satisfied
  bool checked = true;
  bool pass = true;
  std::string note;
};

struct SandwichVerdict {
  double slem = 0.0;
  double slack = 0.0;
  std::vector<SandwichLine> lines;
  std::vector<std::string> annotations;
  bool passed() const;
};

/// Every non-vacuous lower bound <= slem + slack, and slem <= t_R + slack
/// unless the upper bound is vacuous.
SandwichVerdict sandwich_check(const RateReport& report, double slem, double slack);

}  // namespace rwcert
