#include "rwcert/commands.hpp"

#include "rwcert/glm.hpp"
#include "rwcert/numerics.hpp"
#include "rwcert/oracle.hpp"
#include "rwcert/report.hpp"
#include "rwcert/sampler.hpp"
#include "rwcert/simd/kernels.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rwcert {

namespace fs = std::filesystem;

std::uint64_t effective_seed(const RunConfig& cfg, const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("RWCERT_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw ValidationError(std::string("cli: RWCERT_SEED must be a non-negative integer, got '") + env + "'");
    return v;
  }
  return cfg.seed;
}

Pipeline build_pipeline(const RunConfig& cfg) {
  Pipeline pl{cfg, {}, std::nullopt, std::nullopt, cfg.cone, {}};
  const NormalizerOptions norm{cfg.normalizer, 0.0};

  if (cfg.preset == "normal") {
    pl.bundle = normal_bundle(cfg.dim);
  } else if (cfg.preset == "mixture") {
    pl.bundle = gaussian_mixture_bundle(cfg.mixture_a, cfg.mixture_envelope);
  } else {
    const GLMData d = load_glm_csv(cfg.data_path);
    const Vec y = d.T.col(0);
    if (cfg.preset == "logistic") {
      const double eta = cfg.eta.value_or(0.5 * logistic_eta_limit(d.X));
      pl.glm = logistic_constants(d.X, y, eta);
      pl.bundle = logistic_bundle(d.X, y, *pl.glm, norm);
    } else {
      if (cfg.eta) throw ValidationError("config: target.eta has no effect for the poisson preset");
      pl.bundle = poisson_bundle(d.X, y, gaussian_prior(cfg.prior_variance), norm);
    }
  }
  const int p = pl.bundle.dim();
  pl.prop = cfg.family == ProposalFamily::gaussian ? RadialProposal::gaussian(p, cfg.scale)
                                                   : RadialProposal::laplace(p, cfg.scale);

  if (!cfg.eps_alpha_set && pl.bundle.curvature) pl.cone.eps_alpha = default_eps_alpha(pl.bundle.curvature->eta);
  pl.cone.validate();

  for (const auto& c : cfg.candidates)
    if (c.size() != p) throw ValidationError("config: lower.candidates point has wrong dimension");
  pl.lower.candidates = cfg.candidates;
  pl.lower.auto_candidates = cfg.auto_candidates;
  pl.lower.n_mc = cfg.n_mc;
  pl.lower.spectral.m = cfg.spectral_m;
  pl.lower.spectral.L = cfg.spectral_L;
  return pl;
}

namespace {

std::string file_hash(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string s = ss.str();
  return hex64(fnv1a(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()), s.size())));
}

Json header(const std::string& command, const CliOptions& o, std::uint64_t seed) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = command;
  j["config"] = o.config;
  j["config_hash"] = file_hash(o.config);
  j["seed"] = seed;
  return j;
}

struct Bounds {
  std::optional<DriftMinCert> cert;
  RateReport rate;
};

Bounds compute_bounds(const Pipeline& pl, std::ostream& out) {
  Bounds b;
  if (pl.bundle.curvature) {
    b.cert = drift_certificate(pl.bundle, *pl.prop, pl.cone);
    b.rate = rate_report(*b.cert, pl.bundle, *pl.prop, pl.lower);
  } else {
    // No curvature certificate: only the lower bounds are available.
    b.rate.upper = RosenthalResult{};
    b.rate.lower = lower_bounds(pl.bundle, *pl.prop, pl.lower, &b.rate.notices);
    b.rate.norm_quality = pl.bundle.target.norm_quality;
    b.rate.log_M_coefficient = kInf;
    b.rate.M_coefficient = kInf;
    b.rate.notices.push_back("drift: target has no curvature certificate, so no drift/minorization constants; "
                             "upper bound unavailable (reported as vacuous)");
  }
  for (const auto& n : b.rate.notices) out << "notice: " << n << '\n';
  return b;
}

void print_bounds(const Bounds& b, std::ostream& out) {
  if (b.cert) {
    out << "lambda_tilde = " << format_double(b.cert->lambda_tilde) << '\n'
        << "log b        = " << format_double(b.cert->log_b) << '\n'
        << "R_max        = " << format_double(b.cert->R_max) << '\n'
        << "log eta~     = " << format_double(b.cert->log_eta_tilde) << (b.cert->vacuous ? " (vacuous)" : "") << '\n';
  }
  out << "upper t_R    = " << format_double(b.rate.upper.t_R) << (b.rate.upper.vacuous ? " (vacuous)" : "") << '\n';
  for (const auto& l : b.rate.lower)
    out << "lower " << to_string(l.method) << " = " << format_double(l.value) << (l.vacuous ? " (vacuous)" : "")
        << '\n';
}

int cmd_verify(const Pipeline& pl, const CliOptions& o, std::uint64_t seed, std::ostream& out) {
  VerifyOptions vo;
  vo.radii = pl.cfg.radii;
  vo.n_directions = pl.cfg.directions;
  vo.seed = seed;
  vo.check_log_concavity = pl.cfg.log_concavity;
  const AssumptionReport ar = verify_assumptions(pl.bundle, vo);
  Json j = header("verify", o, seed);
  j["target"] = to_json(pl.bundle);
  j["assumptions"] = to_json(ar);

  bool drift_ok = true, minor_ok = true;
  if (pl.bundle.curvature) {
    const DriftMinCert cert = drift_certificate(pl.bundle, *pl.prop, pl.cone);
    const auto pts = drift_probe_points(pl.bundle.dim(), 1.2 * cert.R_eps, pl.cfg.drift_points, seed);
    const DriftReport dr = verify_drift_mc(cert, pl.bundle, *pl.prop, pts, pl.cfg.drift_mc, seed);
    j["drift_check"] = to_json(dr);
    drift_ok = dr.passed();
    out << "drift check: " << (drift_ok ? "PASS" : "FAIL") << " (" << dr.points.size() << " points)\n";
    if (pl.bundle.dim() <= 2) {
      MinorOptions mo = pl.cfg.minor;
      mo.seed = seed;
      const MinorReport mr = verify_minorization_grid(cert, pl.bundle, *pl.prop, mo);
      j["minorization_check"] = to_json(mr);
      minor_ok = mr.passed();
      out << "minorization check: " << (minor_ok ? "PASS" : "FAIL") << " (" << mr.n_checks << " checks)\n";
    } else {
      j["minorization_check"] = nullptr;
    }
  } else {
    j["drift_check"] = nullptr;
    j["minorization_check"] = nullptr;
  }
  write_json((fs::path(o.out) / "assumptions.json").string(), j);

  for (const CheckSummary* s : {&ar.superexponential, &ar.curvature, &ar.envelope, &ar.log_concavity}) {
    out << s->name << ": " << (!s->enabled ? "skipped" : s->passed() ? "PASS" : "FAIL") << " (" << s->n_checked
        << " checks)\n";
  }
  if (!ar.all_passed()) {
    out << "verify: a declared certificate is refuted (see assumptions.json)\n";
    return kExitValidation;
  }
  if (!drift_ok) throw NumericError("drift: MC check of PV <= lambda_tilde V + b failed (see assumptions.json)");
  if (!minor_ok) throw NumericError("minorization: quadrature check of P(x,A) >= eta~ nu(A) failed (see assumptions.json)");
  return kExitOk;
}

int cmd_bounds(const Pipeline& pl, const CliOptions& o, std::uint64_t seed, std::ostream& out) {
  const Bounds b = compute_bounds(pl, out);
  Json j = header("bounds", o, seed);
  j["target"] = to_json(pl.bundle);
  j["proposal"] = to_json(*pl.prop);
  if (pl.glm) j["glm_constants"] = to_json(*pl.glm);
  j["certificate"] = b.cert ? to_json(*b.cert) : Json(nullptr);
  j["rate"] = to_json(b.rate, b.cert ? &*b.cert : nullptr);
  if (pl.cfg.preset == "poisson" && pl.prop->family() == ProposalFamily::gaussian) {
    const double h = pl.prop->scale() * pl.prop->scale();
    const double v = poisson_lower_formula(pl.bundle.p_star, h, pl.bundle.dim());
    j["poisson_lower"] = provenanced(v, "poisson_mode_density_bound", {pl.bundle.p_star, h});
    if (v > 0.99) out << "warning: poisson lower bound " << format_double(v) << " is close to 1; consider h < 1\n";
  }
  write_json((fs::path(o.out) / "cert.json").string(), j);
  write_bounds_csv((fs::path(o.out) / "bounds.csv").string(), b.rate);
  print_bounds(b, out);
  return kExitOk;
}

int cmd_lower(const Pipeline& pl, const CliOptions& o, std::ostream& out) {
  RateReport r;
  r.lower = lower_bounds(pl.bundle, *pl.prop, pl.lower, &r.notices);
  for (const auto& n : r.notices) out << "notice: " << n << '\n';
  const std::string path = (fs::path(o.out) / "lower.csv").string();
  write_bounds_csv(path, r, false);
  for (const auto& l : r.lower)
    out << to_string(l.method) << " = " << format_double(l.value) << (l.vacuous ? " (vacuous)" : "") << '\n';
  return kExitOk;
}

int cmd_sample(const Pipeline& pl, const CliOptions& o, std::uint64_t seed, std::ostream& out) {
  ChainConfig cc;
  cc.initial = pl.cfg.initial.value_or(pl.bundle.mode);
  if (cc.initial.size() != pl.bundle.dim()) throw ValidationError("sample: sample.initial has wrong dimension");
  cc.steps = pl.cfg.steps;
  cc.seed = seed;
  cc.record_every = pl.cfg.record_every;
  const ChainOutput co = run_chain(pl.bundle, *pl.prop, cc);
  write_chain_csv((fs::path(o.out) / "chain.csv").string(), co);
  out << "steps = " << co.steps << ", acceptance rate = " << format_double(co.acceptance_rate)
      << ", non-finite rejections = " << co.nonfinite_rejections << '\n';
  return kExitOk;
}

int cmd_oracle(const Pipeline& pl, const CliOptions& o, std::uint64_t seed, std::ostream& out) {
  const int p = pl.bundle.dim();
  if (p > 2) throw ValidationError("oracle restricted to p <= 2");
  Grid grid = default_oracle_grid(pl.bundle);
  if (pl.cfg.grid_lo) {
    grid = p == 1 ? Grid::grid1d(*pl.cfg.grid_lo, *pl.cfg.grid_hi, pl.cfg.cells.value_or(161))
                  : Grid::grid2d(*pl.cfg.grid_lo, *pl.cfg.grid_hi, pl.cfg.cells.value_or(61));
  } else if (pl.cfg.cells) {
    grid.n = *pl.cfg.cells;
    grid.validate();
  }

  const Bounds b = compute_bounds(pl, out);
  const DiscreteKernel k = discretize(pl.bundle, *pl.prop, grid);
  const StationaryResult st = stationary_and_slem(k);
  const double resid = reversibility_residual(k, st.pi_hat);
  Vec start = pl.cfg.tv_start.value_or(Vec(pl.bundle.mode + Vec::Constant(p, 3.0 * pl.prop->scale())));
  const int start_idx = nearest_cell(k, start);
  const auto tv = tv_decay(k, st.pi_hat, start_idx, pl.cfg.tv_steps);
  const double slack = o.slack.value_or(pl.cfg.slack);
  SandwichVerdict v = sandwich_check(b.rate, st.slem, slack);
  if (!grid.covers(4.0)) v.annotations.push_back("grid does not cover B(0,4)");

  double mass = 0.0;
  for (double x : st.pi_hat) mass += x;

  Json j = header("oracle", o, seed);
  j["target"] = pl.bundle.name;
  j["proposal"] = to_json(*pl.prop);
  j["grid"] = Json{{"lo", std::vector<double>(grid.lo.data(), grid.lo.data() + grid.lo.size())},
                   {"hi", std::vector<double>(grid.hi.data(), grid.hi.data() + grid.hi.size())},
                   {"cells_per_axis", grid.n},
                   {"cell_volume", grid.cell_volume()}};
  j["slem"] = provenanced(st.slem, "discretized_kernel_slem", {grid.lo[0], grid.hi[0], double(grid.n)});
  j["spectral_gap"] = 1.0 - st.slem;
  j["power_iterations"] = st.iterations;
  j["pi_total_mass"] = mass;
  j["reversibility_residual"] = resid;
  j["tv_start_cell"] = start_idx;
  j["tv_final"] = tv.back();
  j["rate"] = to_json(b.rate, b.cert ? &*b.cert : nullptr);
  j["sandwich"] = to_json(v);
  const fs::path dir(o.out);
  write_json((dir / "oracle.json").string(), j);
  write_tv_csv((dir / "tv.csv").string(), tv);
  write_spectrum_csv((dir / "spectrum.csv").string(), st.spectrum);

  out << "slem = " << format_double(st.slem) << " (grid " << grid.n << " cells/axis, reversibility residual "
      << format_double(resid) << ")\n";
  for (const auto& l : v.lines)
    out << "  " << l.label << " = " << format_double(l.bound) << ": "
        << (!l.checked ? "skipped, " + l.note : l.pass ? "ok" : "VIOLATED") << " (margin " << format_double(l.margin)
        << ")\n";
  for (const auto& a : v.annotations) out << "  note: " << a << '\n';
  out << "sandwich: " << (v.passed() ? "PASS" : "FAIL") << '\n';
  return v.passed() ? kExitOk : kExitSandwich;
}

int cmd_report(const CliOptions& o, std::uint64_t seed, std::ostream& out) {
  const fs::path dir(o.out);
  Json j = header("report", o, seed);
  int found = 0;
  for (const char* name : {"assumptions", "cert", "oracle"}) {
    const fs::path p = dir / (std::string(name) + ".json");
    if (fs::exists(p)) {
      j[name] = read_json(p.string());
      ++found;
    } else {
      j[name] = nullptr;
    }
  }
  if (found == 0)
    throw ValidationError("report: no assumptions.json, cert.json or oracle.json in '" + o.out + "'; run other commands first");
  write_json((dir / "report.json").string(), j);
  out << "report: merged " << found << " file(s) into " << (dir / "report.json").string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const CliOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_config(o.config);
    const std::uint64_t seed = effective_seed(cfg, o.seed);
    if (o.command == "report") return cmd_report(o, seed, out);

    RunConfig c = cfg;
    if (o.mc) {
      if (*o.mc < 10000) throw ValidationError("cli: --mc must be at least 10000");
      c.n_mc = *o.mc;
    }
    Pipeline pl = build_pipeline(c);
    pl.lower.seed = seed;
    for (const auto& w : pl.bundle.warnings) out << "warning: " << w << '\n';

    if (o.command == "verify") return cmd_verify(pl, o, seed, out);
    if (o.command == "bounds") return cmd_bounds(pl, o, seed, out);
    if (o.command == "lower") return cmd_lower(pl, o, out);
    if (o.command == "sample") return cmd_sample(pl, o, seed, out);
    if (o.command == "oracle") return cmd_oracle(pl, o, seed, out);
    throw ValidationError("cli: unknown command '" + o.command + "'");
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometric-ergodicity certificates for random walk Metropolis chains", "rwcert"};
  app.require_subcommand(1, 1);
  CliOptions o;
  std::uint64_t seed = 0;
  double slack = 0.0;
  long mc = 0;

  const std::vector<std::pair<const char*, const char*>> cmds{
      {"verify", "falsification checks of the target certificates, the drift inequality and (p <= 2) the minorization"},
      {"bounds", "drift/minorization constants and rate bounds (cert.json, bounds.csv)"},
      {"lower", "lower-bound table (lower.csv)"},
      {"sample", "run an RWMH chain (chain.csv)"},
      {"oracle", "discretized-kernel SLEM, TV decay and the sandwich check"},
      {"report", "merge existing JSON outputs into report.json"}};
  for (const auto& [name, descr] : cmds) {
    CLI::App* sub = app.add_subcommand(name, descr);
    sub->add_option("--config", o.config, "config file")->required();
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "seed (overrides RWCERT_SEED and the config)");
    sub->add_option("--slack", slack, "sandwich slack")->check(CLI::NonNegativeNumber);
    sub->add_option("--mc", mc, "Monte Carlo draws for the lower bounds");
    sub->callback([&o, name = std::string(name)] { o.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--slack")) o.slack = slack;
    if (sub->count("--mc")) o.mc = mc;
  }
  return run(o, out, err);
}

}  // namespace rwcert
