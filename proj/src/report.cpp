#include "rwcert/report.hpp"

#include "rwcert/numerics.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rwcert {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

namespace {

Json hash_of(std::initializer_list<double> inputs) {
  const std::vector<double> v(inputs);
  return hex64(hash_doubles(v));
}

Json vec_json(const Vec& x) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(finite_or_null(x[i]));
  return a;
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("report: cannot write '" + path + "'");
  return f;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json finding_json(const CheckFinding& f) {
  return Json{{"x", vec_json(f.x)},
              {"radius", finite_or_null(f.radius)},
              {"value", finite_or_null(f.value)},
              {"bound", finite_or_null(f.bound)},
              {"margin", finite_or_null(f.margin())}};
}

Json check_json(const CheckSummary& s) {
  Json j{{"name", s.name}, {"enabled", s.enabled}, {"n_checked", s.n_checked}, {"passed", s.passed()}};
  j["n_failures"] = s.failures.size();
  Json fails = Json::array();
  for (std::size_t i = 0; i < s.failures.size() && i < 10; ++i) fails.push_back(finding_json(s.failures[i]));
  j["failures"] = fails;
  j["worst"] = s.worst ? finding_json(*s.worst) : Json(nullptr);
  return j;
}

}  // namespace

Json provenanced(double value, const char* formula, std::initializer_list<double> inputs) {
  Json j{{"value", finite_or_null(value)}, {"formula", formula}, {"inputs_hash", hash_of(inputs)}};
  if (!std::isfinite(value)) j["nonfinite"] = format_double(value);
  return j;
}

Json provenanced_log(double value, double log_value, const char* formula, std::initializer_list<double> inputs) {
  Json j{{"value", finite_or_null(value)},
         {"log", finite_or_null(log_value)},
         {"formula", formula},
         {"inputs_hash", hash_of(inputs)}};
  if (!std::isfinite(value)) j["nonfinite"] = format_double(value);
  return j;
}

Json to_json(const TargetBundle& b) {
  Json j;
  j["name"] = b.name;
  j["dim"] = b.dim();
  j["mode"] = vec_json(b.mode);
  j["log_p_star"] = provenanced(b.log_p_star, "log_density_at_mode", {});
  j["M_star"] = provenanced(b.M_star, "max_of_superexp_and_curvature_radii",
                            {b.superexp.M_s, b.curvature ? b.curvature->M_p : 0.0});
  j["superexponential"] = Json{{"f_s", b.superexp.f_s.describe()},
                               {"C1", finite_or_null(b.superexp.C1)},
                               {"M_s", finite_or_null(b.superexp.M_s)}};
  j["curvature"] = b.curvature ? Json{{"eta", b.curvature->eta}, {"M_p", finite_or_null(b.curvature->M_p)}}
                               : Json(nullptr);
  j["envelope"] = b.envelope.descr;
  j["log_norm_offset"] = finite_or_null(b.target.log_norm_offset);
  j["norm_quality"] = to_string(b.target.norm_quality);
  j["warnings"] = b.warnings;
  return j;
}

Json to_json(const RadialProposal& q) {
  return Json{{"family", to_string(q.family())},
              {"dim", q.dim()},
              {"scale", q.scale()},
              {"log_q0", q.log_q0()},
              {"description", q.describe()}};
}

Json to_json(const DriftMinCert& c) {
  const double ea = c.cone.eps_alpha;
  Json j;
  j["drift_function"] = DriftMinCert::drift_fn_descr;
  j["minorization_measure"] = DriftMinCert::nu_descr;
  j["p"] = c.p;
  j["cone"] = Json{{"K", c.cone.K},
                   {"eps_alpha", ea},
                   {"alpha", c.cone.alpha},
                   {"eps_alpha_tilde", c.cone.eps_alpha_tilde()}};
  j["R_alpha"] = provenanced(c.R_alpha, "cone_radius", {c.cone.K, ea});
  j["box_mass"] = provenanced(c.box_mass, "cone_box_probability", {c.R_alpha, double(c.p)});
  j["lambda_tilde"] = provenanced(c.lambda_tilde, "drift_factor", {c.box_mass, ea});
  j["eps"] = provenanced(c.eps, "shell_epsilon", {ea, c.box_mass});
  j["K_eps"] = provenanced(c.K_eps, "proposal_tail_radius", {c.eps});
  j["delta"] = provenanced(c.delta, "shell_delta", {c.eps, c.K_eps, double(c.p)});
  Json terms = Json::array();
  for (double t : c.R_eps_terms) terms.push_back(finite_or_null(t));
  j["R_eps_terms"] = terms;
  j["R_eps_argmax"] = c.R_eps_argmax;
  j["R_eps"] = provenanced(c.R_eps, "escape_radius_max_of_four",
                           {c.R_eps_terms[0], c.R_eps_terms[1], c.R_eps_terms[2], c.R_eps_terms[3]});
  j["b"] = provenanced_log(c.b, c.log_b, "drift_constant_from_envelope", {c.R_eps});
  j["R_max"] = provenanced(c.R_max, "small_set_radius", {c.lambda_tilde, c.log_b, ea, c.log_p_star, c.M_star});
  j["eta_tilde"] = provenanced_log(c.eta_tilde, c.log_eta_tilde, "minorization_constant", {c.R_max, double(c.p)});
  j["vacuous"] = c.vacuous;
  j["M_star"] = finite_or_null(c.M_star);
  j["log_p_star"] = finite_or_null(c.log_p_star);
  j["norm_quality"] = to_string(c.norm_quality);
  j["warnings"] = c.warnings;
  return j;
}

Json to_json(const RateReport& r, const DriftMinCert* cert) {
  const double l = cert ? cert->lambda_tilde : 0.0;
  const double lb = cert ? cert->log_b : 0.0;
  const double le = cert ? cert->log_eta_tilde : 0.0;
  const double ea = cert ? cert->cone.eps_alpha : 0.0;
  Json j;
  const auto& u = r.upper;
  j["upper"] = Json{
      {"t_R", provenanced_log(u.t_R, u.log_t_R, "rosenthal_coupling_optimum", {le, l, lb, ea})},
      {"r_star", finite_or_null(u.r_star)},
      {"crossing", u.crossing},
      {"A", provenanced_log(u.A, u.log_A, "rosenthal_A", {l, lb, ea})},
      {"alpha_tilde", provenanced_log(u.alpha_tilde, u.log_alpha_tilde, "rosenthal_alpha", {l, lb, ea})},
      {"vacuous", u.vacuous}};
  Json lower = Json::array();
  for (const auto& b : r.lower) {
    Json m = Json::object();
    for (const auto& [k, v] : b.metadata) m[k] = v;
    lower.push_back(Json{{"method", to_string(b.method)},
                         {"value", provenanced(b.value, to_string(b.method), {b.raw})},
                         {"raw", finite_or_null(b.raw)},
                         {"floored", b.floored},
                         {"vacuous", b.vacuous},
                         {"std_error", finite_or_null(b.std_error)},
                         {"metadata", m}});
  }
  j["lower"] = lower;
  j["M_coefficient"] =
      provenanced_log(r.M_coefficient, r.log_M_coefficient, "convergence_prefactor_without_start_term", {l, lb});
  j["norm_quality"] = to_string(r.norm_quality);
  j["notices"] = r.notices;
  return j;
}

Json to_json(const AssumptionReport& r) {
  Json j;
  j["all_passed"] = r.all_passed();
  j["radii"] = r.radii;
  j["n_directions"] = r.n_directions;
  j["seed"] = r.seed;
  j["checks"] = Json::array({check_json(r.superexponential), check_json(r.curvature), check_json(r.envelope),
                             check_json(r.log_concavity)});
  j["note"] = "log-concavity is informational and does not affect all_passed";
  return j;
}

Json to_json(const GLMConstants& k) {
  Json j;
  j["route"] = k.route;
  j["cumulant_case"] = to_string(k.cumulant_case);
  j["prior_kind"] = k.prior_kind == PriorKind::strongly_convex ? "strongly_convex" : "dissipative";
  j["lambda_data"] = k.lambda_data;
  j["K_data"] = k.K_data;
  j["sum_T"] = k.sum_T;
  j["C1"] = provenanced(k.C1, "glm_superexp_offset", {k.lambda_data, k.K_data, k.sum_T});
  j["K1"] = provenanced(k.K1, "glm_envelope_constant", {k.sum_T});
  j["K2"] = provenanced(k.K2, "glm_envelope_linear", {k.lambda_data, k.K_data, k.sum_T});
  j["K3"] = provenanced(k.K3, "glm_envelope_quadratic", {k.lambda2, k.K_data});
  j["J_tilde"] = provenanced(k.J_tilde, "glm_gradient_growth", {k.K_data});
  j["lambda2"] = provenanced(k.lambda2, "posterior_gradient_lipschitz", {k.lambda2});
  j["gamma"] = k.gamma;
  j["eta"] = k.eta;
  j["Mp_prime"] = provenanced(k.Mp_prime, "glm_curvature_radius", {k.C1, k.J_tilde, k.gamma, k.eta, k.lambda2});
  return j;
}

Json to_json(const DriftReport& r) {
  Json pts = Json::array();
  for (const auto& p : r.points)
    pts.push_back(Json{{"radius", p.radius},
                       {"log_V", finite_or_null(p.log_V)},
                       {"ratio", finite_or_null(p.ratio)},
                       {"ratio_se", finite_or_null(p.ratio_se)},
                       {"log_PV", finite_or_null(p.log_PV)},
                       {"log_bound", finite_or_null(p.log_bound)},
                       {"drift_pass", p.drift_pass},
                       {"ratio_checked", p.ratio_checked},
                       {"ratio_pass", p.ratio_pass}});
  return Json{{"passed", r.passed()}, {"n", r.n}, {"seed", r.seed}, {"se_multiplier", r.se_multiplier},
              {"points", pts},        {"notes", r.notes}};
}

Json to_json(const MinorReport& r) {
  return Json{{"passed", r.passed()},
              {"n_x", r.n_x},
              {"n_sets", r.n_sets},
              {"n_checks", r.n_checks},
              {"worst_margin", finite_or_null(r.worst_margin)},
              {"min_ball_mass", finite_or_null(r.min_ball_mass)},
              {"quad_tol", r.quad_tol},
              {"max_quad_error", finite_or_null(r.max_quad_error)},
              {"n_failures", r.failures.size()}};
}

Json to_json(const SandwichVerdict& v) {
  Json lines = Json::array();
  for (const auto& l : v.lines)
    lines.push_back(Json{{"label", l.label},
                         {"bound", finite_or_null(l.bound)},
                         {"margin", finite_or_null(l.margin)},
                         {"checked", l.checked},
                         {"pass", l.pass},
                         {"note", l.note}});
  return Json{{"passed", v.passed()}, {"slem", v.slem}, {"slack", v.slack}, {"lines", lines},
              {"annotations", v.annotations}};
}

void write_json(const std::string& path, const Json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
  if (!f) throw NumericError("report: write failed for '" + path + "'");
}

Json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("report: cannot open '" + path + "'");
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("report: '" + path + "' is not valid JSON: " + e.what());
  }
}

void write_bounds_csv(const std::string& path, const RateReport& r, bool include_upper) {
  auto f = open_out(path);
  f << "method,value,raw,vacuous,std_error,metadata\n";
  for (const auto& b : r.lower) {
    std::string meta;
    for (const auto& [k, v] : b.metadata) meta += (meta.empty() ? "" : ";") + k + "=" + v;
    f << to_string(b.method) << ',' << format_double(b.value) << ',' << format_double(b.raw) << ','
      << (b.vacuous ? "true" : "false") << ',' << format_double(b.std_error) << ',' << csv_escape(meta) << '\n';
  }
  if (!include_upper) return;
  const auto& u = r.upper;
  f << "rosenthal_upper," << format_double(u.t_R) << ',' << format_double(u.t_R) << ','
    << (u.vacuous ? "true" : "false") << ",0,"
    << csv_escape("log_t_R=" + format_double(u.log_t_R) + ";r_star=" + format_double(u.r_star)) << '\n';
}

void write_chain_csv(const std::string& path, const ChainOutput& out) {
  auto f = open_out(path);
  const int p = out.states.empty() ? 0 : int(out.states.front().size());
  f << "step";
  for (int i = 0; i < p; ++i) f << ",x" << (i + 1);
  f << ",accepted\n";
  for (std::size_t k = 0; k < out.states.size(); ++k) {
    f << out.step[k];
    for (int i = 0; i < p; ++i) f << ',' << format_double(out.states[k][i]);
    f << ',' << int(out.accepted_flag[k]) << '\n';
  }
}

void write_tv_csv(const std::string& path, const std::vector<double>& tv) {
  auto f = open_out(path);
  f << "step,tv\n";
  for (std::size_t t = 0; t < tv.size(); ++t) f << t << ',' << format_double(tv[t]) << '\n';
}

void write_spectrum_csv(const std::string& path, const std::vector<double>& spectrum) {
  auto f = open_out(path);
  f << "index,eigenvalue\n";
  for (std::size_t i = 0; i < spectrum.size(); ++i) f << i << ',' << format_double(spectrum[i]) << '\n';
}

}  // namespace rwcert
