#include "rwcert/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace rwcert {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"target", {"preset", "dim", "a", "mixture_envelope", "data", "prior_variance", "eta", "normalizer"}},
      {"proposal", {"family", "scale"}},
      {"drift", {"K", "eps_alpha", "alpha", "eps", "points", "mc"}},
      {"minorization", {"extent", "cells", "n_x", "n_sets", "union_density", "quad_tol"}},
      {"lower", {"candidates", "auto_candidates", "mc", "spectral_m", "spectral_L"}},
      {"verify", {"radii", "directions", "log_concavity"}},
      {"sample", {"steps", "initial", "record_every"}},
      {"oracle", {"lo", "hi", "cells", "tv_steps", "tv_start", "slack"}},
      {"run", {"seed"}},
  };
  return s;
}

struct Reader {
  const pt::ptree& tree;
  std::string source;

  std::optional<std::string> raw(const std::string& sec, const std::string& key) const {
    const auto s = tree.get_child_optional(sec);
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }

  [[noreturn]] void fail(const std::string& sec, const std::string& key, const std::string& msg) const {
    throw ValidationError("config " + source + ": " + sec + "." + key + " " + msg);
  }

  static bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
  }

  std::optional<double> real(const std::string& sec, const std::string& key) const {
    const auto v = raw(sec, key);
    if (!v) return std::nullopt;
    double d;
    if (!parse_double(*v, d)) fail(sec, key, "must be a finite number, got '" + *v + "'");
    return d;
  }

  std::optional<double> positive(const std::string& sec, const std::string& key) const {
    const auto v = real(sec, key);
    if (v && !(*v > 0.0)) fail(sec, key, "must be > 0");
    return v;
  }

  std::optional<long> integer(const std::string& sec, const std::string& key, long min) const {
    const auto v = raw(sec, key);
    if (!v) return std::nullopt;
    char* end = nullptr;
    const long n = std::strtol(v->c_str(), &end, 10);
    if (v->empty() || end != v->c_str() + v->size()) fail(sec, key, "must be an integer, got '" + *v + "'");
    if (n < min) fail(sec, key, "must be >= " + std::to_string(min));
    return n;
  }

  std::optional<bool> boolean(const std::string& sec, const std::string& key) const {
    const auto v = raw(sec, key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(sec, key, "must be true or false, got '" + *v + "'");
  }

  Vec point(const std::string& sec, const std::string& key, const std::string& text) const {
    std::vector<double> xs;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      const auto a = tok.find_first_not_of(" \t");
      const auto b = tok.find_last_not_of(" \t");
      tok = a == std::string::npos ? "" : tok.substr(a, b - a + 1);
      double d;
      if (!parse_double(tok, d)) fail(sec, key, "has a bad coordinate '" + tok + "'");
      xs.push_back(d);
    }
    if (xs.empty()) fail(sec, key, "is an empty point");
    return Eigen::Map<Vec>(xs.data(), Eigen::Index(xs.size()));
  }

  // "x1,x2; y1,y2"
  std::optional<std::vector<Vec>> points(const std::string& sec, const std::string& key) const {
    const auto v = raw(sec, key);
    if (!v) return std::nullopt;
    std::vector<Vec> out;
    std::istringstream is(*v);
    std::string tok;
    while (std::getline(is, tok, ';'))
      if (tok.find_first_not_of(" \t") != std::string::npos) out.push_back(point(sec, key, tok));
    return out;
  }
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source, const std::string& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError("config " + source + ": line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [sec, body] : tree) {
    const auto it = schema().find(sec);
    if (it == schema().end()) {
      if (body.empty()) throw ValidationError("config " + source + ": key '" + sec + "' outside any section");
      throw ValidationError("config " + source + ": unknown section [" + sec + "]");
    }
    for (const auto& [key, val] : body)
      if (!it->second.count(key)) throw ValidationError("config " + source + ": unknown key " + sec + "." + key);
  }

  Reader r{tree, source};
  RunConfig c;
  c.source = source;

  const auto preset = r.raw("target", "preset");
  if (!preset) throw ValidationError("config " + source + ": target.preset is required");
  c.preset = *preset;
  if (c.preset != "normal" && c.preset != "mixture" && c.preset != "logistic" && c.preset != "poisson")
    r.fail("target", "preset", "must be one of normal, mixture, logistic, poisson; got '" + c.preset + "'");
  if (auto v = r.integer("target", "dim", 1)) c.dim = int(*v);
  if (auto v = r.positive("target", "a")) c.mixture_a = *v;
  if (auto v = r.raw("target", "mixture_envelope")) {
    if (*v == "corrected") c.mixture_envelope = MixtureEnvelope::corrected;
    else if (*v == "literal") c.mixture_envelope = MixtureEnvelope::literal;
    else r.fail("target", "mixture_envelope", "must be corrected or literal");
  }
  if (auto v = r.raw("target", "data")) {
    std::filesystem::path p(*v);
    c.data_path = p.is_absolute() ? p.string() : (std::filesystem::path(base_dir) / p).string();
  }
  if (auto v = r.positive("target", "prior_variance")) c.prior_variance = *v;
  if (auto v = r.positive("target", "eta")) c.eta = *v;
  if (auto v = r.raw("target", "normalizer")) {
    if (*v == "laplace") c.normalizer = NormalizerMethod::laplace;
    else if (*v == "quadrature") c.normalizer = NormalizerMethod::quadrature;
    else r.fail("target", "normalizer", "must be laplace or quadrature");
  }
  if ((c.preset == "logistic" || c.preset == "poisson") && c.data_path.empty())
    r.fail("target", "data", "is required for the " + c.preset + " preset");
  if (c.preset == "mixture" && r.raw("target", "dim") && c.dim != 2) r.fail("target", "dim", "must be 2 for mixture");
  if (c.preset == "mixture") c.dim = 2;

  if (auto v = r.raw("proposal", "family")) {
    try {
      c.family = parse_proposal_family(*v);
    } catch (const ValidationError&) {
      r.fail("proposal", "family", "must be gaussian or laplace, got '" + *v + "'");
    }
  }
  if (auto v = r.positive("proposal", "scale")) c.scale = *v;

  if (auto v = r.real("drift", "K")) c.cone.K = *v;
  if (auto v = r.real("drift", "eps_alpha")) {
    c.cone.eps_alpha = *v;
    c.eps_alpha_set = true;
  }
  if (auto v = r.real("drift", "alpha")) c.cone.alpha = *v;
  if (auto v = r.positive("drift", "eps")) c.cone.eps_override = *v;
  if (auto v = r.integer("drift", "points", 1)) c.drift_points = int(*v);
  if (auto v = r.integer("drift", "mc", 1000)) c.drift_mc = int(*v);
  // With eps_alpha left to its default the cone is validated after the target's eta is known.
  if (c.eps_alpha_set) c.cone.validate();
  else if (r.raw("drift", "K") || r.raw("drift", "alpha")) {
    ConeParams probe = c.cone;
    probe.eps_alpha = 1e-6;
    probe.validate();
  }

  if (auto v = r.positive("minorization", "extent")) c.minor.extent = *v;
  if (auto v = r.integer("minorization", "cells", 2)) c.minor.cells_per_axis = int(*v);
  if (auto v = r.integer("minorization", "n_x", 1)) c.minor.n_x = int(*v);
  if (auto v = r.integer("minorization", "n_sets", 1)) c.minor.n_sets = int(*v);
  if (auto v = r.positive("minorization", "union_density")) c.minor.union_density = *v;
  if (auto v = r.positive("minorization", "quad_tol")) c.minor.quad_tol = *v;

  if (auto v = r.points("lower", "candidates")) c.candidates = *v;
  if (auto v = r.boolean("lower", "auto_candidates")) c.auto_candidates = *v;
  if (auto v = r.integer("lower", "mc", 10000)) c.n_mc = *v;
  if (auto v = r.real("lower", "spectral_m")) c.spectral_m = *v;
  if (auto v = r.positive("lower", "spectral_L")) c.spectral_L = *v;

  if (auto v = r.raw("verify", "radii")) {
    const Vec rr = r.point("verify", "radii", *v);
    for (Eigen::Index i = 0; i < rr.size(); ++i) {
      if (!(rr[i] > 0.0)) r.fail("verify", "radii", "entries must be > 0");
      c.radii.push_back(rr[i]);
    }
  }
  if (auto v = r.integer("verify", "directions", 1)) c.directions = int(*v);
  if (auto v = r.boolean("verify", "log_concavity")) c.log_concavity = *v;

  if (auto v = r.integer("sample", "steps", 1)) c.steps = *v;
  if (auto v = r.raw("sample", "initial")) c.initial = r.point("sample", "initial", *v);
  if (auto v = r.integer("sample", "record_every", 1)) c.record_every = *v;

  c.grid_lo = r.real("oracle", "lo");
  c.grid_hi = r.real("oracle", "hi");
  if (c.grid_lo.has_value() != c.grid_hi.has_value()) r.fail("oracle", "lo", "and oracle.hi must be given together");
  if (c.grid_lo && !(*c.grid_hi > *c.grid_lo)) r.fail("oracle", "hi", "must exceed oracle.lo");
  if (auto v = r.integer("oracle", "cells", 11)) c.cells = int(*v);
  if (auto v = r.integer("oracle", "tv_steps", 0)) c.tv_steps = int(*v);
  if (auto v = r.raw("oracle", "tv_start")) c.tv_start = r.point("oracle", "tv_start", *v);
  if (auto v = r.real("oracle", "slack")) {
    if (*v < 0.0) r.fail("oracle", "slack", "must be >= 0");
    c.slack = *v;
  }

  if (auto v = r.integer("run", "seed", 0)) c.seed = std::uint64_t(*v);

  const int p = c.dim;
  auto check_dim = [&](const Vec& x, const std::string& sec, const std::string& key) {
    if (c.preset != "logistic" && c.preset != "poisson" && x.size() != p)
      r.fail(sec, key, "has dimension " + std::to_string(x.size()) + ", target has " + std::to_string(p));
  };
  for (const auto& x : c.candidates) check_dim(x, "lower", "candidates");
  if (c.initial) check_dim(*c.initial, "sample", "initial");
  if (c.tv_start) check_dim(*c.tv_start, "oracle", "tv_start");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), path, dir.empty() ? "." : dir.string());
}

}  // namespace rwcert
