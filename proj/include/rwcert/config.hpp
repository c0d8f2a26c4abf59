#pragma once

#include "rwcert/geometry.hpp"
#include "rwcert/glm.hpp"
#include "rwcert/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rwcert {

/// Parsed run configuration. See README for the file schema; every key is
/// optional except target.preset.
struct RunConfig {
  std::string source;  // path of the config file, for messages

  // [target]
  std::string preset;  // normal | mixture | logistic | poisson
  int dim = 1;
  double mixture_a = 0.5;
  MixtureEnvelope mixture_envelope = MixtureEnvelope::corrected;
  std::string data_path;  // resolved against the config directory
  double prior_variance = 1.0;
  std::optional<double> eta;
  NormalizerMethod normalizer = NormalizerMethod::laplace;

  // [proposal]
  ProposalFamily family = ProposalFamily::gaussian;
  double scale = 1.0;

  // [drift]
  ConeParams cone;
  bool eps_alpha_set = false;
  int drift_points = 20;
  int drift_mc = 100000;

  // [minorization]
  MinorOptions minor;

  // [lower]
  std::vector<Vec> candidates;
  bool auto_candidates = true;
  long n_mc = 20000;
  std::optional<double> spectral_m;
  std::optional<double> spectral_L;

  // [verify]
  std::vector<double> radii;
  int directions = 64;
  bool log_concavity = true;

  // [sample]
  long steps = 10000;
  std::optional<Vec> initial;
  long record_every = 1;

  // [oracle]
  std::optional<double> grid_lo, grid_hi;
  std::optional<int> cells;
  int tv_steps = 100;
  std::optional<Vec> tv_start;
  double slack = 1e-3;

  // [run]
  std::uint64_t seed = 1;
};

/// Parses INI text. Unknown sections and keys are rejected, values are
/// type- and range-checked before anything is computed.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>",
                       const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

}  // namespace rwcert
