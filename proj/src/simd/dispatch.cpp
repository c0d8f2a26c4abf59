#include "rwcert/simd/kernels.hpp"

#include "rwcert/types.hpp"

#include <atomic>
#include <cstdlib>
#include <string_view>

namespace rwcert::simd {

namespace {

bool cpu_has_avx2() {
#if defined(RWCERT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("RWCERT_ISA")) {
    if (std::string_view(env) == "scalar") return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_supported(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) throw ValidationError(std::string("instruction set not available: ") + isa_name(isa));
  current().store(isa, std::memory_order_relaxed);
}

#if defined(RWCERT_HAVE_AVX2)
#define RWCERT_DISPATCH(call)                               \
  do {                                                      \
    if (active_isa() == Isa::avx2) return avx2::call;       \
    return scalar::call;                                    \
  } while (0)
#else
#define RWCERT_DISPATCH(call) return scalar::call
#endif

double dot(std::span<const double> a, std::span<const double> b) { RWCERT_DISPATCH(dot(a, b)); }

double sum(std::span<const double> a) { RWCERT_DISPATCH(sum(a)); }

double l1_distance(std::span<const double> a, std::span<const double> b) {
  RWCERT_DISPATCH(l1_distance(a, b));
}

void axpy(double a, std::span<const double> x, std::span<double> y) { RWCERT_DISPATCH(axpy(a, x, y)); }

void metropolis_weights(double log_f_from, std::span<const double> log_f_to,
                        std::span<const double> log_q, double scale, std::span<double> out) {
  RWCERT_DISPATCH(metropolis_weights(log_f_from, log_f_to, log_q, scale, out));
}

void exp_inplace(std::span<double> x) { RWCERT_DISPATCH(exp_inplace(x)); }

#undef RWCERT_DISPATCH

}  // namespace rwcert::simd
