#include <cstdlib>
#include <string>

#include "kflow/error.hpp"
#include "kflow/simd/kernels.hpp"

namespace kflow::simd {

namespace {

constexpr KernelTable kScalar{&scalar::dot, &scalar::axpy, &scalar::squared_distance};
#ifdef KFLOW_HAVE_AVX2_TU
constexpr KernelTable kAvx2{&avx2::dot, &avx2::axpy, &avx2::squared_distance};
#endif

Backend detect() noexcept {
  Backend best = available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
  if (const char* env = std::getenv("KFLOW_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return Backend::scalar;
    if (want == "avx2" && available(Backend::avx2)) return Backend::avx2;
  }
  return best;
}

}  // namespace

bool available(Backend backend) noexcept {
  switch (backend) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(KFLOW_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend backend) {
  if (!available(backend))
    throw ValueError("SIMD backend " + std::string(backend_name(backend)) + " is not available on this CPU");
#ifdef KFLOW_HAVE_AVX2_TU
  if (backend == Backend::avx2) return kAvx2;
#endif
  return kScalar;
}

Backend active_backend() noexcept {
  static const Backend chosen = detect();
  return chosen;
}

const KernelTable& active() noexcept {
  static const KernelTable& chosen = table(active_backend());
  return chosen;
}

std::string_view backend_name(Backend backend) noexcept {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

}  // namespace kflow::simd
