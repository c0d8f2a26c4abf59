#include "rwcert/commands.hpp"
#include "rwcert/config.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace rwcert;

TEST_SUITE("config") {

TEST_CASE("minimal config uses defaults") {
  const RunConfig c = parse_config("[target]\npreset = normal\n");
  CHECK(c.preset == "normal");
  CHECK(c.dim == 1);
  CHECK(c.family == ProposalFamily::gaussian);
  CHECK(c.scale == 1.0);
  CHECK(c.seed == 1);
  CHECK_FALSE(c.eps_alpha_set);
}

TEST_CASE("full normal config") {
  const RunConfig c = load_config(std::string(RWCERT_CONFIG_DIR) + "/normal1d.cfg");
  CHECK(c.spectral_m == 1.0);
  CHECK(c.spectral_L == 1.0);
  CHECK(*c.grid_lo == -8.0);
  CHECK(*c.cells == 161);
  CHECK(c.tv_steps == 200);
}

TEST_CASE("points and lists") {
  const RunConfig c = parse_config(
      "[target]\npreset = mixture\n[lower]\ncandidates = 0,0; 1.5, -2\n[verify]\nradii = 1, 2.5\n"
      "[sample]\ninitial = 0.1,0.2\n");
  REQUIRE(c.candidates.size() == 2);
  CHECK(c.candidates[1][1] == -2.0);
  CHECK(c.radii == std::vector<double>{1.0, 2.5});
  CHECK(c.dim == 2);
  CHECK_THROWS_AS(parse_config("[target]\npreset = mixture\n[lower]\ncandidates = 0\n"), ValidationError);
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_WITH_AS(parse_config("[target]\npreset = normal\nsigma = 2\n"), doctest::Contains("unknown key target.sigma"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[target]\npreset = normal\n[extra]\nx = 1\n"),
                       doctest::Contains("unknown section"), ValidationError);
}

TEST_CASE("values are type and range checked") {
  CHECK_THROWS_AS(parse_config("[proposal]\nscale = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[target]\npreset = student\n"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[target]\npreset = normal\n[proposal]\nscale = -1\n"), doctest::Contains("> 0"),
                       ValidationError);
  CHECK_THROWS_AS(parse_config("[target]\npreset = normal\n[proposal]\nscale = abc\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[target]\npreset = normal\n[proposal]\nfamily = uniform\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[target]\npreset = normal\n[lower]\nmc = 50\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[target]\npreset = normal\n[oracle]\nlo = -1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[target]\npreset = normal\n[oracle]\nlo = 1\nhi = -1\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[target]\npreset = logistic\n"), ValidationError);
  CHECK_THROWS_AS(parse_config("[target]\npreset = normal\ndim = 2\n[sample]\ninitial = 1\n"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_config("[target]\npreset = normal\n[drift]\neps_alpha = 0.5\n"),
                       doctest::Contains("1/3"), ValidationError);
  CHECK_THROWS_AS(parse_config("[target]\npreset = normal\n[drift]\nK = 0.5\n"), ValidationError);
}

TEST_CASE("data paths resolve against the config directory") {
  const RunConfig c = parse_config("[target]\npreset = logistic\ndata = d.csv\n", "x.cfg", "/some/dir");
  CHECK(c.data_path == "/some/dir/d.csv");
}

TEST_CASE("seed precedence") {
  RunConfig c = parse_config("[target]\npreset = normal\n[run]\nseed = 9\n");
  ::unsetenv("RWCERT_SEED");
  CHECK(effective_seed(c, std::nullopt) == 9);
  ::setenv("RWCERT_SEED", "5", 1);
  CHECK(effective_seed(c, std::nullopt) == 5);
  CHECK(effective_seed(c, 3) == 3);
  ::setenv("RWCERT_SEED", "x", 1);
  CHECK_THROWS_AS(effective_seed(c, std::nullopt), ValidationError);
  ::unsetenv("RWCERT_SEED");
}

TEST_CASE("pipeline defaults") {
  const Pipeline p = build_pipeline(parse_config("[target]\npreset = normal\n"));
  CHECK(p.cone.eps_alpha == doctest::Approx(0.3).epsilon(1e-8));
  const Pipeline l = build_pipeline(load_config(std::string(RWCERT_CONFIG_DIR) + "/logistic.cfg"));
  REQUIRE(l.glm);
  CHECK(l.glm->eta == doctest::Approx(0.5 / 1.5 * 1.0).epsilon(1e-12));
}

}
