#include "rwcert/numerics.hpp"
#include "rwcert/proposal.hpp"
#include "rwcert/sampler.hpp"

#include <doctest.h>

#include <cmath>

using namespace rwcert;

TEST_SUITE("proposal") {

TEST_CASE("gaussian density values") {
  const auto q = RadialProposal::gaussian(1, 1.0);
  CHECK(q.density_at(Vec::Zero(1), Vec::Zero(1)) == doctest::Approx(0.398942280401433).epsilon(1e-12));
  CHECK(q.density_at(Vec::Zero(1), Vec::Constant(1, 2.0)) ==
        doctest::Approx(std::exp(-2.0) / std::sqrt(2 * kPi)).epsilon(1e-12));
  CHECK(q.q0() == doctest::Approx(1.0 / std::sqrt(2 * kPi)).epsilon(1e-14));
  CHECK_THROWS_AS(q.density_at(Vec::Zero(1), Vec::Zero(2)), ValidationError);
}

TEST_CASE("density is symmetric") {
  const auto q = RadialProposal::laplace(2, 0.7);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Vec x(2), y(2);
    x << rng.normal(), rng.normal();
    y << 2 * rng.normal(), rng.normal();
    CHECK(q.density_at(x, y) == q.density_at(y, x));
  }
}

TEST_CASE("radial densities decrease and integrate to one") {
  for (int p : {1, 2, 3}) {
    for (const auto& q : {RadialProposal::gaussian(p, 0.8), RadialProposal::laplace(p, 1.3)}) {
      double prev = q.log_q(0.0);
      for (double r = 0.1; r < 20.0; r += 0.1) {
        const double v = q.log_q(r);
        CHECK(v < prev);
        CHECK(std::isfinite(v));
        prev = v;
      }
      CHECK(q.tail_mass(0.0) == doctest::Approx(1.0).epsilon(1e-12));
      // radial density integrates to 1 - tail mass
      const double R = 3.0;
      double acc = 0.0;
      const int m = 20000;
      for (int i = 0; i < m; ++i) {
        const double r = (i + 0.5) * R / m;
        acc += p * unit_ball_volume(p) * std::pow(r, p - 1) * q.q(r) * R / m;
      }
      CHECK(acc == doctest::Approx(1.0 - q.tail_mass(R)).epsilon(1e-6));
    }
  }
}

TEST_CASE("box probabilities") {
  const auto q = RadialProposal::gaussian(1, 1.0);
  CHECK(q.box_probability(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)).value ==
        doctest::Approx(std::erf(1.0 / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(q.box_probability(Vec::Zero(1), Vec::Zero(1)).value == 0.0);
  CHECK(std::abs(q.box_probability(Vec::Constant(1, -8.0), Vec::Constant(1, 8.0)).value - 1.0) < 1e-10);
  CHECK_THROWS_AS(q.box_probability(Vec::Constant(1, 1.0), Vec::Constant(1, 0.0)), ValidationError);

  const auto g2 = RadialProposal::gaussian(2, 1.5);
  Vec lo(2), hi(2);
  lo << -0.3, 0.2;
  hi << 1.1, 2.0;
  const double expect = (normal_cdf(1.1 / 1.5) - normal_cdf(-0.3 / 1.5)) * (normal_cdf(2.0 / 1.5) - normal_cdf(0.2 / 1.5));
  CHECK(g2.box_probability(lo, hi).value == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("box probability is monotone under inclusion") {
  const auto q = RadialProposal::laplace(2, 1.0);
  Vec lo(2), hi(2);
  lo << -0.5, -0.5;
  hi << 0.5, 0.5;
  double prev = 0.0;
  for (double grow : {0.0, 0.2, 0.5, 1.0}) {
    const double v = q.box_probability(lo.array() - grow, hi.array() + grow).value;
    CHECK(v >= prev);
    CHECK(v <= 1.0);
    prev = v;
  }
  const auto q1 = RadialProposal::laplace(1, 1.0);
  CHECK(q1.box_probability(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)).value ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-10));
}

TEST_CASE("non-separable box probability in four dimensions uses QMC") {
  const auto q = RadialProposal::laplace(4, 1.0);
  const auto b = q.box_probability(Vec::Constant(4, -1.0), Vec::Constant(4, 1.0), 5);
  CHECK(b.method == "qmc");
  CHECK(b.std_error > 0.0);
  CHECK(b.value > 0.0);
  CHECK(b.value < 1.0 - q.tail_mass(2.0) + 5 * b.std_error);  // the box sits inside B(0, 2)
  CHECK(b.value > 1.0 - q.tail_mass(1.0) - 5 * b.std_error);  // and contains B(0, 1)
}

TEST_CASE("tail radius") {
  CHECK(RadialProposal::gaussian(1, 1.0).tail_radius(0.05) == doctest::Approx(normal_quantile(0.975)).epsilon(1e-8));
  CHECK(RadialProposal::gaussian(2, 1.0).tail_radius(0.05) ==
        doctest::Approx(std::sqrt(-2.0 * std::log(0.05))).epsilon(1e-8));
  CHECK(RadialProposal::gaussian(1, 1.0).tail_radius(0.999999) < 1e-5);
  const auto q = RadialProposal::laplace(3, 0.5);
  double prev = kInf;
  for (double e : {0.001, 0.01, 0.1, 0.5}) {
    const double K = q.tail_radius(e);
    CHECK(K <= prev);
    CHECK(q.tail_mass(K) <= e * (1 + 1e-9));
    prev = K;
  }
  CHECK_THROWS_AS(q.tail_radius(0.0), ValidationError);
  CHECK_THROWS_AS(q.tail_radius(1.0), ValidationError);
}

TEST_CASE("increments are reproducible and follow the radial law") {
  const auto q = RadialProposal::gaussian(1, 1.0);
  Rng a(42);
  Rng b = a;
  CHECK(q.sample_increment(a)[0] == q.sample_increment(b)[0]);

  Rng rng(42);
  const int n = 100000;
  const double K = q.tail_radius(0.05);
  double sum = 0.0;
  int outside = 0;
  std::vector<double> radii;
  for (int i = 0; i < n; ++i) {
    const Vec z = q.sample_increment(rng);
    sum += z[0];
    outside += z.norm() > K;
    radii.push_back(z.norm());
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(double(n)));
  CHECK(outside / double(n) >= 0.04);
  CHECK(outside / double(n) <= 0.06);
  CHECK(ks_one_sample(radii, [&](double r) { return q.radial_cdf(r); }) < 0.02);

  for (const auto& l : {RadialProposal::laplace(1, 0.7), RadialProposal::laplace(3, 0.7)}) {
    std::vector<double> rl;
    for (int i = 0; i < n; ++i) rl.push_back(l.sample_increment(rng).norm());
    CHECK(ks_one_sample(rl, [&](double r) { return l.radial_cdf(r); }) < 0.02);
  }
}

TEST_CASE("proposal family parsing and invalid scales") {
  CHECK(parse_proposal_family("gaussian") == ProposalFamily::gaussian);
  CHECK(parse_proposal_family("laplace") == ProposalFamily::laplace);
  CHECK_THROWS_AS(parse_proposal_family("uniform"), ValidationError);
  CHECK_THROWS_AS(RadialProposal::gaussian(1, 0.0), ValidationError);
  CHECK_THROWS_AS(RadialProposal::laplace(0, 1.0), ValidationError);
  CHECK(RadialProposal::gaussian(2, 0.5).spectral_m1() == doctest::Approx(4.0));
}

}
