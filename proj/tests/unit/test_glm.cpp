#include "rwcert/glm.hpp"
#include "rwcert/numerics.hpp"

#include <doctest.h>

#include <cmath>

using namespace rwcert;

namespace {

Mat col(std::initializer_list<double> v) {
  Mat X(Eigen::Index(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) X(i++, 0) = x;
  return X;
}

Vec vec(std::initializer_list<double> v) { return col(v).col(0); }

// Coarse grid, then a fine grid around the best coarse point.
double grid_argmax(const std::function<double(double)>& f, double lo, double hi) {
  double best = lo, fb = -kInf;
  for (double x = lo; x <= hi; x += 1e-3)
    if (f(x) > fb) fb = f(x), best = x;
  const double c = best;
  for (double x = c - 2e-3; x <= c + 2e-3; x += 1e-7)
    if (f(x) > fb) fb = f(x), best = x;
  return best;
}

PriorSpec dissipative_prior() {
  PriorSpec pr = gaussian_prior(1.0);
  pr.kind = PriorKind::dissipative;
  pr.a_dag = 0.8;
  pr.b_dag = 0.3;
  return pr;
}

}  // namespace

TEST_SUITE("glm") {

TEST_CASE("logistic toy constants") {
  const GLMConstants k = logistic_constants(col({1, -1}), vec({1, 0}), 0.5);
  CHECK(k.C1 == 3.0);
  CHECK(k.K1 == 0.0);
  CHECK(k.K2 == 3.0);
  CHECK(k.K3 == 1.0);
  CHECK(k.lambda2 == 1.5);
  CHECK(k.Mp_prime == 24.0);
  CHECK(k.f_xy(1.0) == 4.0);
  CHECK(3.0 * std::exp(0.5 * k.f_xy(1.0)) == doctest::Approx(22.167).epsilon(1e-4));
  CHECK(logistic_eta_limit(col({1, -1})) == doctest::Approx(1.0 / 1.5));
  CHECK_THROWS_WITH_AS(logistic_constants(col({1, -1}), vec({1, 0}), 0.7), doctest::Contains("curvature margin"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(logistic_constants(col({1, -1}), vec({1, 2}), 0.5), doctest::Contains("non-binary"),
                       ValidationError);
}

TEST_CASE("four C1 cases") {
  GLMData d{col({1, -1}), col({1, 0})};
  const std::vector<Vec> gc0{Vec::Constant(1, 0.5), Vec::Constant(1, 0.5)};
  const auto sc = gaussian_prior(1.0);
  const auto ds = dissipative_prior();
  CHECK(glm_constants(d, sc, 1.0, 1.0, CumulantCase::bounded_gradient, {}, 0.4).C1 == 3.0);
  CHECK(glm_constants(d, ds, 1.0, 1.0, CumulantCase::bounded_gradient, {}, 0.4).C1 == doctest::Approx(3.3));
  CHECK(glm_constants(d, sc, 1.0, 1.0, CumulantCase::convex_bounded_curvature, gc0, 0.4).C1 == 2.0);
  CHECK(glm_constants(d, ds, 1.0, 1.0, CumulantCase::convex_bounded_curvature, gc0, 0.4).C1 == doctest::Approx(2.3));

  const GLMConstants k = glm_constants(d, sc, 1.0, 1.0, CumulantCase::convex_bounded_curvature, gc0, 0.4);
  CHECK(k.K3 == doctest::Approx(1.5));
  CHECK(k.J_tilde == doctest::Approx(1.0 + 2.0));
  CHECK(k.gamma == 1.0);
  CHECK(k.Mp_prime >= 1.0);
  CHECK(glm_constants(d, ds, 1.0, 1.0, CumulantCase::bounded_gradient, {}, 0.4).gamma == 0.8);
  CHECK_THROWS_WITH_AS(glm_constants(d, ds, 1.0, 1.0, CumulantCase::bounded_gradient, {}, 0.8),
                       doctest::Contains("curvature margin violated"), ValidationError);
  CHECK_THROWS_AS(glm_constants(d, sc, 1.0, 1.0, CumulantCase::convex_bounded_curvature, {}, 0.4), ValidationError);
}

TEST_CASE("empty data reduces to the prior") {
  PriorSpec pr = gaussian_prior(1.0);
  pr.g = [](const Vec& t) { return 0.5 * (t.array() - 1.0).square().sum(); };
  pr.grad_g = [](const Vec& t) -> Vec { return t.array() - 1.0; };
  GLMData d{Mat(0, 1), Mat(0, 1)};
  const GLMConstants k = glm_constants(d, pr, 1.0, 1.0, CumulantCase::bounded_gradient, {}, 0.5);
  CHECK(k.K1 == 0.5);
  CHECK(k.K2 == 1.0);
  CHECK(k.K3 == 0.5);
  CHECK(k.C1 == 1.0);
}

TEST_CASE("gaussian prior Lipschitz spot check") {
  CHECK(prior_lipschitz_ratio(gaussian_prior(2.0), 3, 100, 1) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(gaussian_prior(2.0).lambda1 == 0.5);
  CHECK_THROWS_AS(gaussian_prior(0.0), ValidationError);
}

TEST_CASE("conjugate gaussian posterior") {
  GLMData d{col({0.5, 1.5, -0.2, 2.0}), col({0.5, 1.5, -0.2, 2.0})};
  CumulantFn c{[](const Vec& t) { return 0.5 * t.squaredNorm(); }, [](const Vec& t) -> Vec { return t; },
               [](const Vec& t) -> Mat { return Mat::Identity(t.size(), t.size()); }, 1.0};
  const PriorSpec pr = gaussian_prior(1.0);
  const TargetBundle b = expfam_posterior(d, c, pr);
  const double mean = (0.5 + 1.5 - 0.2 + 2.0) / 5.0;
  CHECK(b.mode[0] == doctest::Approx(mean).epsilon(1e-10));
  // posterior N(mean, 1/5): exact density at the mode
  CHECK(b.p_star == doctest::Approx(std::sqrt(5.0 / (2 * kPi))).epsilon(1e-9));
  CHECK(b.superexp.C1 == doctest::Approx(4.2));
  CHECK(b.target.norm_quality == NormQuality::approximate);
  VerifyOptions vo;
  CHECK(verify_assumptions(b, vo).all_passed());

  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Vec th = Vec::Constant(1, 5.0 * rng.normal());
    if (th.norm() == 0.0) continue;
    const double dir = th.dot(b.target.grad_log_density(th)) / th.norm();
    CHECK(dir <= b.superexp.C1 - pr.lambda1 * th.norm() + 1e-9);
    const Vec fd = finite_difference_gradient(b.target.log_density, th);
    CHECK(fd[0] == doctest::Approx(b.target.grad_log_density(th)[0]).epsilon(1e-5));
  }

  GLMData none{Mat(0, 1), Mat(0, 1)};
  const TargetBundle prior_only = expfam_posterior(none, c, pr);
  CHECK(prior_only.superexp.C1 == 0.0);
  CHECK(std::abs(prior_only.mode[0]) < 1e-10);
  CHECK_THROWS_AS(expfam_posterior(d, c, dissipative_prior()), ValidationError);
}

TEST_CASE("logistic posterior") {
  const Mat X = col({1, -1});
  const Vec y = vec({1, 0});
  const GLMConstants k = logistic_constants(X, y, 0.5);
  const TargetBundle b = logistic_bundle(X, y, k);
  auto u = [&](double t) { return y[0] * t - std::log1p(std::exp(t)) - std::log1p(std::exp(-t)) - 0.5 * t * t; };
  CHECK(b.mode[0] == doctest::Approx(grid_argmax(u, -3, 3)).epsilon(1e-6));

  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const Vec th = Vec::Constant(1, 4.0 * rng.normal());
    CHECK(std::abs(b.log_f(th)) <= b.envelope(th.norm()) + 1e-9);
    const Vec fd = finite_difference_gradient(b.target.log_density, th);
    CHECK(fd[0] == doctest::Approx(b.target.grad_log_density(th)[0]).epsilon(1e-5));
    if (th.norm() > k.Mp_prime)
      CHECK(th.norm() - k.C1 >= k.eta * b.target.grad_log_density(th).norm() - 1e-9);
  }
  for (double r : {30.0, 50.0, 100.0}) {
    const Vec th = Vec::Constant(1, r);
    CHECK(th.norm() - k.C1 >= k.eta * b.target.grad_log_density(th).norm());
  }

  const LogisticResult res = logistic_preset(X, y, RadialProposal::gaussian(1, 1.0), 0.5, std::nullopt,
                                             LowerOptions{{Vec::Zero(1)}, true, 10000, 1, {}});
  CHECK(std::isfinite(res.cert.log_b));
  CHECK(std::isfinite(res.cert.R_max));
  CHECK((res.rate.upper.vacuous || res.rate.upper.t_R < 1.0));
}

TEST_CASE("poisson posterior and bound") {
  CHECK(poisson_lower_formula(0.5, 1.0, 1) == doctest::Approx(1.0 - 1.0 / (0.5 * std::sqrt(2 * kPi))).epsilon(1e-14));
  CHECK(poisson_lower_formula(0.5, 1.0, 1) == doctest::Approx(0.20212).epsilon(1e-4));

  const Mat X = col({0.5, -0.3, 0.1});
  const Vec y = vec({2, 0, 1});
  const PriorSpec pr = gaussian_prior(1.0);
  const PoissonResult r = poisson_preset(X, y, pr, RadialProposal::gaussian(1, 0.5));
  auto u = [&](double t) {
    double v = -0.5 * t * t;
    for (int i = 0; i < 3; ++i) v += y[i] * X(i, 0) * t - std::exp(X(i, 0) * t);
    return v;
  };
  CHECK(r.bundle.mode[0] == doctest::Approx(grid_argmax(u, -3, 3)).epsilon(1e-6));
  CHECK(r.lower_bound == doctest::Approx(poisson_lower_formula(r.bundle.p_star, 0.25, 1)));
  CHECK(r.bundle.target.norm_quality == NormQuality::approximate);

  const PoissonResult wide = poisson_preset(X, y, pr, RadialProposal::gaussian(1, 100.0));
  CHECK(wide.lower_bound > 0.99);
  CHECK(wide.near_vacuous);
  CHECK(!wide.warnings.empty());

  CHECK_THROWS_WITH_AS(poisson_bundle(X, vec({2, -1, 1}), pr), doctest::Contains("negative count"), ValidationError);
  CHECK_THROWS_AS(poisson_preset(X, y, pr, RadialProposal::laplace(1, 1.0)), ValidationError);
}

TEST_CASE("normalizer methods agree in one dimension") {
  auto u = [](const Vec& t) { return -0.5 * t.squaredNorm() + 3.0; };
  auto h = [](const Vec& t) -> Mat { return -Mat::Identity(t.size(), t.size()); };
  const double exact = 3.0 + 0.5 * std::log(2 * kPi);
  CHECK(log_normalizer(u, h, Vec::Zero(1), NormalizerMethod::laplace) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(log_normalizer(u, h, Vec::Zero(1), NormalizerMethod::quadrature) == doctest::Approx(exact).epsilon(1e-10));
  CHECK(log_normalizer(u, h, Vec::Zero(2), NormalizerMethod::quadrature) ==
        doctest::Approx(3.0 + std::log(2 * kPi)).epsilon(1e-8));
  CHECK_THROWS_AS(log_normalizer(u, h, Vec::Zero(3), NormalizerMethod::quadrature), ValidationError);
}

TEST_CASE("csv parsing") {
  const GLMData d = parse_glm_csv("y,x1,x2\n1,0.5,-1\n0,2,3e-1\n");
  CHECK(d.n() == 2);
  CHECK(d.p() == 2);
  CHECK(d.X(1, 1) == 0.3);
  CHECK(d.T(0, 0) == 1.0);
  CHECK_THROWS_WITH_AS(parse_glm_csv("y,x1\n1,abc\n"), doctest::Contains(":2:"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_glm_csv("y,x1\n1,2\n1,nan\n"), doctest::Contains(":3:"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_glm_csv("y,x1\n1,2,3\n"), doctest::Contains(":2:"), ValidationError);
  CHECK_THROWS_AS(parse_glm_csv("x1,y\n1,2\n"), ValidationError);
  CHECK_THROWS_AS(parse_glm_csv("y,x2\n1,2\n"), ValidationError);
  CHECK_THROWS_AS(parse_glm_csv("y,x1\n1,1e999\n"), ValidationError);
  CHECK_THROWS_AS(load_glm_csv("/nonexistent/file.csv"), ValidationError);
}

}
