#pragma once

#include "rwcert/drift.hpp"
#include "rwcert/glm.hpp"
#include "rwcert/oracle.hpp"
#include "rwcert/rate.hpp"
#include "rwcert/sampler.hpp"
#include "rwcert/target.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <vector>

namespace rwcert {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

/// {"value", "formula", "inputs_hash"}; non-finite values are written as
/// null with the reason in "nonfinite".
Json provenanced(double value, const char* formula, std::initializer_list<double> inputs);
/// Same, plus the natural log of the value, which stays finite when the
/// value itself over- or underflows.
Json provenanced_log(double value, double log_value, const char* formula, std::initializer_list<double> inputs);

/// A finite double, or null.
Json finite_or_null(double v);

Json to_json(const TargetBundle& b);
Json to_json(const RadialProposal& q);
Json to_json(const DriftMinCert& c);
Json to_json(const RateReport& r, const DriftMinCert* cert);
Json to_json(const AssumptionReport& r);
Json to_json(const GLMConstants& k);
Json to_json(const DriftReport& r);
Json to_json(const MinorReport& r);
Json to_json(const SandwichVerdict& v);

/// Pretty-printed with a trailing newline; creates parent directories.
void write_json(const std::string& path, const Json& j);
Json read_json(const std::string& path);

/// method,value,raw,vacuous,std_error,metadata (metadata as key=value;...)
void write_bounds_csv(const std::string& path, const RateReport& r, bool include_upper = true);
/// step,x1..xp,accepted
void write_chain_csv(const std::string& path, const ChainOutput& out);
/// step,tv
void write_tv_csv(const std::string& path, const std::vector<double>& tv);
/// index,eigenvalue
void write_spectrum_csv(const std::string& path, const std::vector<double>& spectrum);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace rwcert
