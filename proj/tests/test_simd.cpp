#include <cmath>
#include <vector>

#include "doctest.h"
#include "kflow/random.hpp"
#include "kflow/simd/kernels.hpp"

using namespace kflow;

namespace {

std::vector<double> draw(std::size_t n, std::uint64_t stream) {
  SeededRng rng(99, stream);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("scalar kernels on small inputs") {
  const double a[] = {1, 2, 3}, b[] = {4, 5, 6};
  CHECK(simd::scalar::dot(a, b, 3) == 32.0);
  CHECK(simd::scalar::squared_distance(a, b, 3) == 27.0);
  double y[] = {1, 1, 1};
  simd::scalar::axpy(2.0, a, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[2] == 7.0);
  CHECK(simd::scalar::dot(a, b, 0) == 0.0);
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!simd::available(simd::Backend::avx2)) {
    MESSAGE("avx2 unavailable on this CPU; skipped");
    return;
  }
  const auto& s = simd::table(simd::Backend::scalar);
  const auto& v = simd::table(simd::Backend::avx2);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 63u, 64u, 257u}) {
    CAPTURE(n);
    const auto a = draw(n, 1), b = draw(n, 2);
    double mag = 0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(s.dot(a.data(), b.data(), n) - v.dot(a.data(), b.data(), n)) <= 1e-13 * (mag + 1));
    const double ds = s.squared_distance(a.data(), b.data(), n);
    CHECK(std::abs(ds - v.squared_distance(a.data(), b.data(), n)) <= 1e-13 * (ds + 1));
    auto y1 = draw(n, 3), y2 = y1;
    s.axpy(0.37, a.data(), y1.data(), n);
    v.axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (std::abs(y1[i]) + 1));
  }
}

TEST_CASE("backend names and selection") {
  CHECK(simd::backend_name(simd::Backend::scalar) == "scalar");
  CHECK(simd::backend_name(simd::Backend::avx2) == "avx2");
  CHECK(simd::available(simd::Backend::scalar));
  CHECK(simd::available(simd::active_backend()));
}
