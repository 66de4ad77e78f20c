#pragma once

// Inner-loop kernels with a scalar reference and vectorized variants.
// The active backend is chosen once at first use from CPU features; the
// KFLOW_SIMD environment variable ("scalar" or "avx2") overrides it.

#include <cstddef>
#include <string_view>

namespace kflow::simd {

enum class Backend { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
}  // namespace avx2

bool available(Backend backend) noexcept;
/// Kernel table for a specific backend; throws if it is unavailable on this CPU.
const KernelTable& table(Backend backend);
const KernelTable& active() noexcept;
Backend active_backend() noexcept;
std::string_view backend_name(Backend backend) noexcept;

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline double squared_distance(const double* a, const double* b, std::size_t n) {
  return active().squared_distance(a, b, n);
}

}  // namespace kflow::simd
