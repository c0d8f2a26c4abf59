#pragma once

// Data-parallel inner loops used by the discretization oracle.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The top-level functions dispatch on the instruction set chosen at
// startup: AVX2+FMA when the CPU reports both, scalar otherwise. Setting the
// environment variable RWCERT_ISA=scalar forces the reference path.
//
// Variants agree to rounding: reductions reassociate, and the AVX2 exp is a
// polynomial accurate to a few ulp rather than libm's.

#include <span>

namespace rwcert::simd {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
/// Switch the dispatch target. Throws ValidationError if unsupported.
void set_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double l1_distance(std::span<const double> a, std::span<const double> b);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// out[j] = scale * exp(min(0, log_f_to[j] - log_f_from) + log_q[j])
///
/// One row of a Metropolis kernel: acceptance probability times proposal
/// density times cell volume, with the acceptance ratio kept in log space.
void metropolis_weights(double log_f_from, std::span<const double> log_f_to,
                        std::span<const double> log_q, double scale, std::span<double> out);
void exp_inplace(std::span<double> x);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double l1_distance(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
void metropolis_weights(double log_f_from, std::span<const double> log_f_to,
                        std::span<const double> log_q, double scale, std::span<double> out);
void exp_inplace(std::span<double> x);
}  // namespace scalar

#if defined(RWCERT_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double l1_distance(std::span<const double> a, std::span<const double> b);
void axpy(double a, std::span<const double> x, std::span<double> y);
void metropolis_weights(double log_f_from, std::span<const double> log_f_to,
                        std::span<const double> log_q, double scale, std::span<double> out);
void exp_inplace(std::span<double> x);
}  // namespace avx2
#endif

}  // namespace rwcert::simd
