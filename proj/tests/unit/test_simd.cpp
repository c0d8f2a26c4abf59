#include "rwcert/rng.hpp"
#include "rwcert/simd/kernels.hpp"
#include "rwcert/types.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace rwcert;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale) {
  Rng r(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = scale * r.normal();
  return v;
}

// Restores the dispatch target on scope exit.
struct IsaGuard {
  simd::Isa saved = simd::active_isa();
  ~IsaGuard() { simd::set_isa(saved); }
};

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("scalar reference kernels") {
  const std::vector<double> a{1, 2, 3}, b{4, -5, 6};
  CHECK(simd::scalar::dot(a, b) == 12.0);
  CHECK(simd::scalar::sum(a) == 6.0);
  CHECK(simd::scalar::l1_distance(a, b) == 3 + 7 + 3);
  std::vector<double> y{1, 1, 1};
  simd::scalar::axpy(2.0, a, y);
  CHECK(y == std::vector<double>{3, 5, 7});

  const std::vector<double> lf{0.0, -1.0, 1.0}, lq{0.0, 0.0, std::log(0.5)};
  std::vector<double> out(3);
  simd::scalar::metropolis_weights(0.0, lf, lq, 2.0, out);
  CHECK(out[0] == doctest::Approx(2.0));
  CHECK(out[1] == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(out[2] == doctest::Approx(1.0));
}

TEST_CASE("dispatch can be forced to scalar") {
  IsaGuard g;
  simd::set_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  CHECK(simd::isa_supported(simd::Isa::scalar));
}

#if defined(RWCERT_HAVE_AVX2)
TEST_CASE("avx2 kernels match the scalar reference") {
  if (!simd::isa_supported(simd::Isa::avx2)) {
    MESSAGE("CPU lacks AVX2/FMA; equivalence test skipped");
    return;
  }
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 161u, 1000u, 1003u}) {
    const auto a = random_vec(n, 1 + n, 3.0), b = random_vec(n, 1000 + n, 3.0);
    const double tol = 1e-13 * (1.0 + double(n));
    CHECK(simd::avx2::dot(a, b) == doctest::Approx(simd::scalar::dot(a, b)).epsilon(tol).scale(double(n) + 1.0));
    CHECK(simd::avx2::sum(a) == doctest::Approx(simd::scalar::sum(a)).epsilon(tol).scale(double(n) + 1.0));
    CHECK(simd::avx2::l1_distance(a, b) == doctest::Approx(simd::scalar::l1_distance(a, b)).epsilon(tol));

    std::vector<double> y1 = b, y2 = b;
    simd::scalar::axpy(0.37, a, y1);
    simd::avx2::axpy(0.37, a, y2);
    for (std::size_t i = 0; i < n; ++i) CHECK(y2[i] == doctest::Approx(y1[i]).epsilon(1e-15));

    const auto lq = random_vec(n, 77 + n, 2.0);
    std::vector<double> w1(n), w2(n);
    simd::scalar::metropolis_weights(0.4, a, lq, 0.1, w1);
    simd::avx2::metropolis_weights(0.4, a, lq, 0.1, w2);
    for (std::size_t i = 0; i < n; ++i) CHECK(w2[i] == doctest::Approx(w1[i]).epsilon(1e-14));
  }
}

TEST_CASE("avx2 exp across the double range") {
  if (!simd::isa_supported(simd::Isa::avx2)) return;
  std::vector<double> x;
  for (double v = -745.0; v <= 709.0; v += 0.731) x.push_back(v);
  x.insert(x.end(), {0.0, -0.0, 1e-300, -1e-300, 709.7, -744.5, -800.0, 800.0});
  std::vector<double> s = x, v = x;
  simd::scalar::exp_inplace(s);
  simd::avx2::exp_inplace(v);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (s[i] == 0.0 || std::isinf(s[i])) {
      CHECK(v[i] == s[i]);
    } else if (s[i] < 1e-300) {
      // subnormal results: absolute agreement
      CHECK(std::abs(v[i] - s[i]) < 1e-310);
    } else {
      CHECK(v[i] == doctest::Approx(s[i]).epsilon(4e-15));
    }
  }
}

TEST_CASE("avx2 handles -inf and NaN like the scalar path") {
  if (!simd::isa_supported(simd::Isa::avx2)) return;
  const double ninf = -std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> lf{ninf, 0.0, nan, 2.0, ninf, -3.0, 1.0, 0.5, nan};
  const std::vector<double> lq(lf.size(), -1.0);
  std::vector<double> w1(lf.size()), w2(lf.size());
  simd::scalar::metropolis_weights(0.0, lf, lq, 1.0, w1);
  simd::avx2::metropolis_weights(0.0, lf, lq, 1.0, w2);
  for (std::size_t i = 0; i < lf.size(); ++i) {
    if (std::isnan(w1[i])) CHECK(std::isnan(w2[i]));
    else CHECK(w2[i] == doctest::Approx(w1[i]).epsilon(1e-15));
  }
}

TEST_CASE("dispatched kernels follow the selected isa") {
  if (!simd::isa_supported(simd::Isa::avx2)) return;
  IsaGuard g;
  const auto a = random_vec(1001, 5, 1.0);
  simd::set_isa(simd::Isa::scalar);
  const double s = simd::sum(a);
  simd::set_isa(simd::Isa::avx2);
  CHECK(simd::sum(a) == doctest::Approx(s).epsilon(1e-13));
}
#endif

}
