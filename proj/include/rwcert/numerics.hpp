#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>

namespace rwcert {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// log of the volume of the unit Euclidean ball in R^p.
double log_unit_ball_volume(int p);
inline double unit_ball_volume(int p) { return std::exp(log_unit_ball_volume(p)); }

double normal_cdf(double x);
double normal_sf(double x);
/// Phi(b) - Phi(a) computed on the tail that avoids cancellation.
double normal_interval(double a, double b);
double normal_quantile(double p);

/// log(exp(a) + exp(b)) without overflow; handles -inf operands.
double log_add_exp(double a, double b);
/// log(1 + exp(x)).
double softplus(double x);

/// Smallest x in [lo, inf) with pred(x) true, for a predicate that is false
/// then true as x grows. The upper end of the bracket is doubled until pred
/// holds; the result is within `tol` (absolute, or relative beyond 1) of the
/// threshold and always satisfies pred.
double bisect_threshold(const std::function<bool(double)>& pred, double lo, double hi_guess,
                        double tol, int max_expansions = 2000);

/// Solve f(u) = target for a continuous increasing f on [lo, inf), assuming
/// f(lo) <= target. Same bracketing as bisect_threshold.
double invert_increasing(const std::function<double(double)>& f, double target, double lo,
                         double hi_guess, double tol = 1e-14);

/// Central finite-difference gradient, for checking analytic gradients.
template <class F, class V>
V finite_difference_gradient(const F& f, const V& x, double h = 1e-6) {
  V g = x;
  for (int i = 0; i < x.size(); ++i) {
    V xp = x, xm = x;
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] += step;
    xm[i] -= step;
    g[i] = (f(xp) - f(xm)) / (2.0 * step);
  }
  return g;
}

/// 64-bit FNV-1a over raw bytes; stable across platforms with the same
/// double representation. Used for report provenance hashes.
std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed = 14695981039346656037ull);
std::uint64_t hash_doubles(std::span<const double> values);
std::string hex64(std::uint64_t v);

}  // namespace rwcert
