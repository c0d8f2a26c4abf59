#pragma once

#include "rwcert/proposal.hpp"
#include "rwcert/target.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace rwcert {

struct ChainConfig {
  Vec initial;
  long steps = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  long record_every = 1;
};

struct ChainOutput {
  std::vector<long> step;  // step index of each recorded state; 0 is the initial state
  std::vector<Vec> states;
  std::vector<char> accepted_flag;  // whether the move into the recorded state was accepted
  long accepted = 0;
  long steps = 0;
  long nonfinite_rejections = 0;
  double acceptance_rate = 0.0;
};

struct StepResult {
  Vec next;
  double log_f_next = 0.0;
  bool accepted = false;
  bool nonfinite = false;
};

/// Metropolis decision from one uniform draw: accept iff u < h, i.e.
/// log u < log h. Certain acceptance when log h >= 0.
inline bool metropolis_accept(double log_h, double u) { return u < 1.0 && std::log(u) < log_h; }

/// One RWMH transition. Consumes the increment draws and exactly one uniform.
/// A proposal with non-finite log-density is rejected and flagged.
StepResult rwmh_step(const TargetBundle& bundle, const RadialProposal& prop, const Vec& x, double log_f_x, Rng& rng);

ChainOutput run_chain(const TargetBundle& bundle, const RadialProposal& prop, const ChainConfig& cfg);

struct AcceptanceEstimate {
  double alpha_hat = 0.0;
  double se = 0.0;
};

/// MC mean of min(1, f(y)/f(x)) over y ~ Q(x, .).
AcceptanceEstimate estimate_acceptance(const TargetBundle& bundle, const RadialProposal& prop, const Vec& x, long n,
                                       std::uint64_t seed, std::uint64_t stream = 0);

/// log of f(x) alpha(x,y) q(x,y); symmetric in (x, y) for a correct kernel.
double log_flux(const TargetBundle& bundle, const RadialProposal& prop, const Vec& x, const Vec& y);

/// Kolmogorov-Smirnov statistics.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf);

}  // namespace rwcert
