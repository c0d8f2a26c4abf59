#include "rwcert/numerics.hpp"
#include "rwcert/target.hpp"

#include <doctest.h>

#include <cmath>

using namespace rwcert;

namespace {

TargetBundle gaussian_1d(double eta, double slope = 1.0, double C1 = 0.0) {
  LogTarget t;
  t.dim = 1;
  t.log_density = [](const Vec& x) { return -0.5 * x[0] * x[0] - 0.5 * std::log(2 * kPi); };
  t.grad_log_density = [](const Vec& x) -> Vec { return -x; };
  t.hess_log_density = [](const Vec&) -> Mat { return -Mat::Identity(1, 1); };
  Envelope env{[](double z) { return 0.5 * z * z + 0.5 * std::log(2 * kPi); }, "z^2/2 + log(2 pi)/2"};
  return make_bundle("n", t, env, SuperexpCert{RateFunction::affine(slope), C1, 0.0}, CurvatureCert{eta, 0.0},
                     Vec::Constant(1, 1.0));
}

}  // namespace

TEST_SUITE("target") {

TEST_CASE("mode of the standard normal from 3.0") {
  const TargetBundle b = normal_bundle(1);
  const ModeResult m = find_mode(b.target, Vec::Constant(1, 3.0));
  CHECK(std::abs(m.mode[0]) < 1e-10);
  CHECK(m.p_star == doctest::Approx(0.398942280401433).epsilon(1e-12));
}

TEST_CASE("mode search without a Hessian") {
  LogTarget t;
  t.dim = 2;
  t.log_density = [](const Vec& x) { return -std::pow(x[0] - 1.0, 2) - 2.0 * std::pow(x[1] + 0.5, 2); };
  t.grad_log_density = [](const Vec& x) -> Vec {
    Vec g(2);
    g << -2.0 * (x[0] - 1.0), -4.0 * (x[1] + 0.5);
    return g;
  };
  const ModeResult m = find_mode(t, Vec::Zero(2));
  CHECK(m.mode[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(m.mode[1] == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("mode search reports the last iterate on failure") {
  LogTarget t;
  t.dim = 1;
  t.log_density = [](const Vec& x) { return x[0]; };  // unbounded
  t.grad_log_density = [](const Vec&) -> Vec { return Vec::Ones(1); };
  try {
    find_mode(t, Vec::Zero(1), 1e-8, 20);
    FAIL("expected ModeNotConverged");
  } catch (const ModeNotConverged& e) {
    CHECK(e.last_iterate().size() == 1);
    CHECK(e.last_iterate()[0] > 0.0);
  }
}

TEST_CASE("rate function inverse convention") {
  const RateFunction f = RateFunction::affine(2.0, 1.0);
  CHECK(f(3.0) == 7.0);
  CHECK(f.inverse(7.0) == doctest::Approx(3.0));
  CHECK(f.inverse(0.5) == 0.0);  // below f(0): infimum of the domain
  const RateFunction g = RateFunction::general([](double u) { return u * u * u; }, "u^3");
  CHECK(g.inverse(27.0) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(g.inverse(-1.0) == 0.0);
  const RateFunction m = RateFunction::pointwise_min(RateFunction::affine(1.0), RateFunction::affine(2.0));
  CHECK(m(5.0) == 5.0);
  const RateFunction s = RateFunction::affine(1.0) + RateFunction::affine(1.0);
  CHECK(s(2.5) == 5.0);
}

TEST_CASE("product of two standard normals") {
  const TargetBundle n1 = normal_bundle(1), n2 = normal_bundle(1);
  const TargetBundle p = combine_product(n1, n2);
  CHECK(p.superexp.f_s(1.7) == doctest::Approx(3.4));
  CHECK(p.superexp.C1 == 0.0);
  CHECK(p.envelope(2.0) == doctest::Approx(4.0 + std::log(2 * kPi)));
  CHECK(p.target.norm_quality == NormQuality::approximate);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const Vec x = Vec::Constant(1, 4.0 * rng.normal());
    CHECK(std::abs(p.log_f(x)) <= p.envelope(x.norm()) + 1e-12);
  }
}

TEST_CASE("product takes the smaller eta") {
  const TargetBundle p = combine_product(gaussian_1d(0.4), gaussian_1d(0.7));
  REQUIRE(p.curvature);
  CHECK(p.curvature->eta == 0.4);
}

TEST_CASE("product rejects mismatched dimensions") {
  CHECK_THROWS_AS(combine_product(normal_bundle(1), normal_bundle(2)), ValidationError);
}

TEST_CASE("mixture rules") {
  const TargetBundle f1 = gaussian_1d(0.5, 1.0, 0.0), f2 = gaussian_1d(0.9, 2.0, 3.0);
  const TargetBundle m = combine_mixture(f1, f2, 0.3, 0.7);
  CHECK(m.superexp.f_s(4.0) == doctest::Approx(4.0));
  CHECK(m.superexp.C1 == 3.0);
  CHECK(m.curvature->eta == 0.5);
  CHECK(m.envelope(1.0) == doctest::Approx(softplus(2.0 * f1.envelope(1.0))));

  const TargetBundle d = combine_mixture(f1, f2, 1.0, 0.0);
  for (double x : {-3.0, -0.2, 0.0, 1.4, 6.0})
    CHECK(d.log_f(Vec::Constant(1, x)) == doctest::Approx(f1.log_f(Vec::Constant(1, x))).epsilon(1e-14));
  CHECK_THROWS_AS(combine_mixture(f1, f2, 0.5, 0.6), ValidationError);
}

TEST_CASE("gaussian mixture a=0.5 certificate forms") {
  const TargetBundle b = gaussian_mixture_bundle(0.5);
  CHECK(b.dim() == 2);
  CHECK(b.superexp.f_s(2.0) == doctest::Approx(2.0));
  CHECK(b.superexp.C1 == 0.0);
  REQUIRE(b.curvature);
  CHECK(b.curvature->eta == 0.5);
  const double c = std::abs(std::log(std::sqrt(0.5) / kPi));
  for (double z : {0.0, 0.5, 2.0, 7.0})
    CHECK(b.envelope(z) == doctest::Approx(std::log(std::exp(2 * z * z + 2 * c) + 1.0)).epsilon(1e-12));
}

TEST_CASE("gaussian mixture limits") {
  const TargetBundle one = gaussian_mixture_bundle(1.0);
  CHECK(one.mode.norm() < 1e-8);
  Vec x(2);
  x << 0.3, -0.8;
  CHECK(one.log_f(x) == doctest::Approx(-std::log(kPi) - x.squaredNorm()).epsilon(1e-13));

  const TargetBundle four = gaussian_mixture_bundle(4.0);
  CHECK(four.curvature->eta == kEtaCeiling);
  CHECK(!four.warnings.empty());
  CHECK_THROWS_AS(gaussian_mixture_bundle(0.0), ValidationError);
}

TEST_CASE("literal mixture envelope fails at the origin") {
  const TargetBundle lit = gaussian_mixture_bundle(0.5, MixtureEnvelope::literal);
  const double at0 = std::abs(lit.log_f(Vec::Zero(2)));
  CHECK(at0 > lit.envelope(0.0));
  VerifyOptions vo;
  vo.radii = {0.01};
  vo.n_directions = 8;
  CHECK_FALSE(verify_assumptions(lit, vo).envelope.passed());
  CHECK(verify_assumptions(gaussian_mixture_bundle(0.5), vo).envelope.passed());
}

TEST_CASE("assumption checks pass for the standard normal") {
  VerifyOptions vo;
  const AssumptionReport r = verify_assumptions(normal_bundle(3), vo);
  CHECK(r.all_passed());
  CHECK(r.log_concavity.passed());
  CHECK(r.superexponential.n_checked == 5 * 64);
  CHECK(default_verify_radii(normal_bundle(1)) == std::vector<double>{1.1, 1.5, 2.0, 4.0, 8.0});
}

TEST_CASE("heavy-tailed target refutes a linear rate at large radius") {
  LogTarget t;
  t.dim = 1;
  t.log_density = [](const Vec& x) { return -std::log(kPi) - std::log1p(x[0] * x[0]); };
  t.grad_log_density = [](const Vec& x) -> Vec { return Vec::Constant(1, -2.0 * x[0] / (1.0 + x[0] * x[0])); };
  Envelope env{[](double r) { return std::log(kPi) + r * r; }, "log(pi) + r^2"};
  const TargetBundle b = make_bundle("cauchy", t, env, SuperexpCert{RateFunction::affine(1.0), 0.0, 0.0},
                                     std::nullopt, Vec::Zero(1));
  VerifyOptions vo;
  vo.radii = {10.0};
  vo.n_directions = 4;
  const AssumptionReport far = verify_assumptions(b, vo);
  CHECK_FALSE(far.superexponential.passed());
  REQUIRE(far.superexponential.worst);
  CHECK(far.superexponential.worst->value == doctest::Approx(-20.0 / 101.0));
  vo.radii = {0.5};
  CHECK(verify_assumptions(b, vo).superexponential.passed());
}

TEST_CASE("mixture is not log-concave between the modes") {
  VerifyOptions vo;
  const AssumptionReport r = verify_assumptions(gaussian_mixture_bundle(0.5), vo);
  CHECK_FALSE(r.log_concavity.passed());
  CHECK(r.all_passed());  // informational only
}

}
