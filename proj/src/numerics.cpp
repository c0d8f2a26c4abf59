#include "rwcert/numerics.hpp"

#include "rwcert/types.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cstdio>
#include <cstring>

namespace rwcert {

double log_unit_ball_volume(int p) {
  if (p < 1) throw ValidationError("unit ball volume: dimension must be positive");
  const double half = 0.5 * p;
  return half * std::log(kPi) - std::lgamma(half + 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double normal_interval(double a, double b) {
  if (!(b > a)) return 0.0;
  if (a >= 0.0) return normal_sf(a) - normal_sf(b);
  if (b <= 0.0) return normal_cdf(b) - normal_cdf(a);
  return 1.0 - normal_cdf(a) - normal_sf(b);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile: p must lie in (0,1)");
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double log_add_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double bisect_threshold(const std::function<bool(double)>& pred, double lo, double hi_guess,
                        double tol, int max_expansions) {
  if (pred(lo)) return lo;
  double hi = std::max(hi_guess, lo + 1.0);
  int expansions = 0;
  while (!pred(hi)) {
    lo = hi;
    hi = lo + 2.0 * std::max(1.0, std::abs(lo));
    if (++expansions > max_expansions || !std::isfinite(hi))
      throw NumericError("bisect_threshold: predicate never satisfied while expanding bracket");
  }
  for (int it = 0; it < 4000; ++it) {
    const double width = hi - lo;
    if (width <= tol * std::max(1.0, std::abs(hi))) break;
    const double mid = lo + 0.5 * width;
    if (mid <= lo || mid >= hi) break;
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double invert_increasing(const std::function<double(double)>& f, double target, double lo,
                         double hi_guess, double tol) {
  return bisect_threshold([&](double u) { return f(u) >= target; }, lo, hi_guess, tol);
}

std::uint64_t fnv1a(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t hash_doubles(std::span<const double> values) {
  std::uint64_t h = 14695981039346656037ull;
  for (double v : values) {
    unsigned char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof(double));
    h = fnv1a(buf, h);
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace rwcert
