#include "rwcert/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace rwcert {

StepResult rwmh_step(const TargetBundle& bundle, const RadialProposal& prop, const Vec& x, double log_f_x, Rng& rng) {
  StepResult s;
  Vec y = x + prop.sample_increment(rng);
  const double lfy = bundle.log_f(y);
  const double u = rng.uniform();
  if (!std::isfinite(lfy)) {
    s.next = x;
    s.log_f_next = log_f_x;
    s.nonfinite = true;
    return s;
  }
  if (metropolis_accept(lfy - log_f_x, u)) {
    s.next = std::move(y);
    s.log_f_next = lfy;
    s.accepted = true;
  } else {
    s.next = x;
    s.log_f_next = log_f_x;
  }
  return s;
}

ChainOutput run_chain(const TargetBundle& bundle, const RadialProposal& prop, const ChainConfig& cfg) {
  if (cfg.steps < 1) throw ValidationError("chain: steps must be >= 1");
  if (cfg.record_every < 1) throw ValidationError("chain: record_every must be >= 1");
  if (cfg.initial.size() != bundle.dim()) throw ValidationError("chain: initial point has wrong dimension");
  double lf = bundle.log_f(cfg.initial);
  if (!std::isfinite(lf)) throw NumericError("chain: non-finite log-density at the initial point");

  ChainOutput out;
  out.steps = cfg.steps;
  out.step.push_back(0);
  out.states.push_back(cfg.initial);
  out.accepted_flag.push_back(0);

  Rng rng(cfg.seed, cfg.stream);
  Vec x = cfg.initial;
  for (long t = 1; t <= cfg.steps; ++t) {
    StepResult s = rwmh_step(bundle, prop, x, lf, rng);
    out.accepted += s.accepted;
    out.nonfinite_rejections += s.nonfinite;
    x = std::move(s.next);
    lf = s.log_f_next;
    if (t % cfg.record_every == 0) {
      out.step.push_back(t);
      out.states.push_back(x);
      out.accepted_flag.push_back(s.accepted);
    }
  }
  out.acceptance_rate = double(out.accepted) / double(cfg.steps);
  return out;
}

AcceptanceEstimate estimate_acceptance(const TargetBundle& bundle, const RadialProposal& prop, const Vec& x, long n,
                                       std::uint64_t seed, std::uint64_t stream) {
  if (n < 1000) throw ValidationError("estimate_acceptance: n must be at least 1000");
  const double lfx = bundle.log_f(x);
  Rng rng(seed, stream);
  double sum = 0.0, sum2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const Vec y = x + prop.sample_increment(rng);
    const double lh = bundle.log_f(y) - lfx;
    const double a = std::isfinite(lh) || lh > 0.0 ? std::exp(std::min(0.0, lh)) : 0.0;
    sum += a;
    sum2 += a * a;
  }
  const double mean = sum / n;
  return {mean, std::sqrt(std::max(sum2 / n - mean * mean, 0.0) / (n - 1))};
}

double log_flux(const TargetBundle& bundle, const RadialProposal& prop, const Vec& x, const Vec& y) {
  const double lfx = bundle.log_f(x), lfy = bundle.log_f(y);
  return lfx + std::min(0.0, lfy - lfx) + prop.log_q((x - y).norm());
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ValidationError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  return d;
}

double ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw ValidationError("ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  const double n = double(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double F = cdf(a[i]);
    d = std::max({d, (i + 1) / n - F, F - i / n});
  }
  return d;
}

}  // namespace rwcert
