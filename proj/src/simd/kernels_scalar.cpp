#include "rwcert/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace rwcert::simd::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void metropolis_weights(double log_f_from, std::span<const double> log_f_to,
                        std::span<const double> log_q, double scale, std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double log_accept = std::min(0.0, log_f_to[j] - log_f_from);
    out[j] = scale * std::exp(log_accept + log_q[j]);
  }
}

void exp_inplace(std::span<double> x) {
  for (double& v : x) v = std::exp(v);
}

}  // namespace rwcert::simd::scalar
