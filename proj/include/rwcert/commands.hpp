#pragma once

#include "rwcert/config.hpp"
#include "rwcert/drift.hpp"
#include "rwcert/proposal.hpp"
#include "rwcert/rate.hpp"
#include "rwcert/target.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rwcert {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumeric = 2, kExitSandwich = 3 };

struct CliOptions {
  std::string command;  // verify | bounds | lower | sample | oracle | report
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> slack;
  std::optional<long> mc;
};

/// Target, proposal and GLM extras built from a config.
struct Pipeline {
  RunConfig cfg;
  TargetBundle bundle;
  std::optional<RadialProposal> prop;
  std::optional<GLMConstants> glm;
  ConeParams cone;
  LowerOptions lower;
};

Pipeline build_pipeline(const RunConfig& cfg);

/// Seed precedence: --seed, then RWCERT_SEED, then the config.
std::uint64_t effective_seed(const RunConfig& cfg, const std::optional<std::uint64_t>& flag);

/// Runs one subcommand; messages go to out/err. Returns the exit code.
int run(const CliOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv with CLI11 and dispatches to run().
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rwcert
