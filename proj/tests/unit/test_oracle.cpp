#include "rwcert/numerics.hpp"
#include "rwcert/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace rwcert;

namespace {

DiscreteKernel two_state(double a) {
  DiscreteKernel k;
  k.n = 2;
  k.P = {1 - a, a, a, 1 - a};
  k.centers = {Vec::Constant(1, 0.0), Vec::Constant(1, 1.0)};
  k.log_f = {0.0, 0.0};
  k.cell_volume = 1.0;
  return k;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("grid geometry") {
  const Grid g = Grid::grid1d(-8, 8, 161);
  CHECK(g.size() == 161);
  CHECK(g.width(0) == doctest::Approx(16.0 / 161));
  CHECK(g.center(0)[0] == doctest::Approx(-8.0 + 8.0 / 161));
  CHECK(g.center(80)[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g.covers(8.0));
  CHECK_FALSE(g.covers(8.1));
  const Grid g2 = Grid::grid2d(-1, 1, 11);
  CHECK(g2.size() == 121);
  CHECK(g2.cell_volume() == doctest::Approx(4.0 / 121));
  CHECK_THROWS_AS(Grid::grid1d(-1, 1, 10), ValidationError);
  CHECK_THROWS_AS(Grid::grid1d(1, -1, 20), ValidationError);
  Grid g3{Vec::Zero(3), Vec::Ones(3), 11};
  CHECK_THROWS_WITH_AS(g3.validate(), doctest::Contains("p <= 2"), ValidationError);
}

TEST_CASE("discretized kernel rows and symmetry") {
  const TargetBundle b = normal_bundle(1);
  const auto q = RadialProposal::gaussian(1, 1.0);
  const DiscreteKernel k = discretize(b, q, Grid::grid1d(-6, 6, 121));
  for (int i = 0; i < k.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < k.n; ++j) {
      CHECK(k(i, j) >= 0.0);
      s += k(i, j);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  // reflection x -> -x maps cell i to n-1-i
  for (int i = 0; i < k.n; i += 7)
    for (int j = 0; j < k.n; j += 5) CHECK(k(i, j) == doctest::Approx(k(k.n - 1 - i, k.n - 1 - j)).epsilon(1e-12));
  CHECK(nearest_cell(k, Vec::Constant(1, 0.02)) == 60);
  CHECK_THROWS_AS(discretize(b, q, Grid::grid2d(-1, 1, 11)), ValidationError);
}

TEST_CASE("stationary vector is proportional to f") {
  const TargetBundle b = normal_bundle(1);
  const auto q = RadialProposal::gaussian(1, 1.0);
  const DiscreteKernel k = discretize(b, q, Grid::grid1d(-7, 7, 141));
  const StationaryResult s = stationary_and_slem(k);
  double z = 0.0;
  for (double l : k.log_f) z += std::exp(l);
  for (int i = 0; i < k.n; ++i) CHECK(s.pi_hat[i] == doctest::Approx(std::exp(k.log_f[i]) / z).epsilon(1e-8));
  CHECK(reversibility_residual(k, s.pi_hat) < 1e-15);
  CHECK(s.spectrum.front() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::is_sorted(s.spectrum.rbegin(), s.spectrum.rend()));
  CHECK(s.slem > 0.5);
  CHECK(s.slem < 1.0);
}

TEST_CASE("two-state chain") {
  for (double a : {0.1, 0.3, 0.8}) {
    const StationaryResult s = stationary_and_slem(two_state(a));
    CHECK(s.slem == doctest::Approx(std::abs(1 - 2 * a)).epsilon(1e-12));
    CHECK(s.pi_hat[0] == doctest::Approx(0.5));
  }
  const auto tv = tv_decay(two_state(0.3), {0.5, 0.5}, 0, 10);
  REQUIRE(tv.size() == 11);
  for (int t = 0; t <= 10; ++t) CHECK(tv[t] == doctest::Approx(0.5 * std::pow(0.4, t)).epsilon(1e-12));
}

TEST_CASE("TV decay from a point mass") {
  const TargetBundle b = normal_bundle(1);
  const auto q = RadialProposal::gaussian(1, 1.0);
  const DiscreteKernel k = discretize(b, q, Grid::grid1d(-8, 8, 161));
  const StationaryResult s = stationary_and_slem(k);
  const int start = nearest_cell(k, Vec::Constant(1, 3.0));
  const auto tv = tv_decay(k, s.pi_hat, start, 300);
  CHECK(tv[0] == doctest::Approx(1.0 - s.pi_hat[start]).epsilon(1e-12));
  for (std::size_t t = 1; t < tv.size(); ++t) CHECK(tv[t] <= tv[t - 1] + 1e-15);
  // before roundoff: 0.8^60 ~ 1e-6
  const double slope = (std::log(tv[60]) - std::log(tv[40])) / 20.0;
  CHECK(slope == doctest::Approx(std::log(s.slem)).epsilon(0.02));
  CHECK_THROWS_AS(tv_decay(k, s.pi_hat, k.n, 3), ValidationError);
}

TEST_CASE("sandwich verdicts") {
  RateReport r;
  r.upper.vacuous = false;
  r.upper.t_R = 0.9;
  LowerBound lb{LowerMethod::mode, 0.3, 0.3};
  r.lower = {lb};
  CHECK(sandwich_check(r, 0.5, 1e-3).passed());
  CHECK_FALSE(sandwich_check(r, 0.95, 1e-3).passed());
  r.lower[0].value = 0.6;
  const SandwichVerdict bad = sandwich_check(r, 0.5, 1e-3);
  CHECK_FALSE(bad.passed());
  CHECK(bad.lines[0].margin == doctest::Approx(0.5 + 1e-3 - 0.6));

  r.upper.vacuous = true;
  r.lower[0].value = 0.2;
  const SandwichVerdict half = sandwich_check(r, 0.97, 1e-3);
  CHECK(half.passed());
  CHECK(!half.annotations.empty());
  r.lower[0].vacuous = true;
  r.lower[0].value = 0.0;
  CHECK(sandwich_check(r, 0.1, 0.0).passed());
  CHECK_THROWS_AS(sandwich_check(r, 1.0, 0.0), ValidationError);
}

}
