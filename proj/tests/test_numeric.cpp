#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kflow/error.hpp"
#include "kflow/fft.hpp"
#include "kflow/linalg.hpp"
#include "kflow/random.hpp"

using namespace kflow;
using cd = std::complex<double>;

namespace {

// O(N^2) unitary DFT used as the reference.
std::vector<cd> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<cd> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cd s = 0;
    for (std::size_t j = 0; j < n; ++j)
      s += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * j) / static_cast<double>(n));
    out[k] = s / std::sqrt(static_cast<double>(n));
  }
  return out;
}

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  SeededRng rng(seed, 0);
  return randn(rng, shape);
}

}  // namespace

TEST_CASE("dft of a constant and of a cosine") {
  const ComplexTensor a = dft_forward(Tensor::from({1, 1, 1, 1}));
  const double expect_a[] = {2, 0, 0, 0};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(a[i] - cd(expect_a[i], 0)) < 1e-15);
  const ComplexTensor b = dft_forward(Tensor::from({1, 0, -1, 0}));
  const double expect_b[] = {0, 1, 0, 1};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(b[i] - cd(expect_b[i], 0)) < 1e-15);
}

TEST_CASE("dft matches the direct sum on a random length-16 signal") {
  const Tensor x = random_tensor({16}, 3);
  const auto ref = naive_dft(x.values());
  const ComplexTensor X = dft_forward(x);
  for (std::size_t k = 0; k < 16; ++k) CHECK(std::abs(X[k] - ref[k]) <= 1e-10);
}

TEST_CASE("dft is unitary and inverts") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor x = random_tensor({8, 8}, seed);
    const ComplexTensor X = dft_forward(x);
    double e = 0;
    for (const cd& v : X.data()) e += std::norm(v);
    CHECK(std::abs(std::sqrt(e) - norm2(x.data())) <= 1e-10 * norm2(x.data()));
    CHECK(relative_error(dft_inverse(X).data(), x.data()) <= 1e-10);
  }
  const Tensor ones = dft_inverse(ComplexTensor({4}, {2, 0, 0, 0}));
  for (double v : ones.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dft rejects bad input") {
  CHECK_THROWS_AS(dft_forward(Tensor({6})), ShapeError);
  CHECK_THROWS_AS(dft_forward(Tensor({4, 3})), ShapeError);
  ComplexTensor broken({4}, {0, cd(0, 1), 0, 0});
  CHECK_THROWS_AS(dft_inverse(broken), ValueError);
}

TEST_CASE("eigh on small matrices") {
  const SymmetricEigen d = eigh_symmetric(Tensor({2, 2}, {3, 0, 0, 1}));
  CHECK(d.values[0] == doctest::Approx(3));
  CHECK(d.values[1] == doctest::Approx(1));
  CHECK(d.vectors.at(0, 0) == doctest::Approx(1));
  CHECK(d.vectors.at(1, 1) == doctest::Approx(1));

  const SymmetricEigen r = eigh_symmetric(Tensor({2, 2}, {1, 1, 1, 1}));
  CHECK(r.values[0] == doctest::Approx(2));
  CHECK(std::abs(r.values[1]) < 1e-14);
  CHECK(r.vectors.at(0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(r.vectors.at(1, 0) == doctest::Approx(1 / std::sqrt(2.0)));
}

TEST_CASE("eigh reconstructs a random symmetric matrix") {
  const Tensor g = random_tensor({8, 8}, 11);
  Tensor a({8, 8});
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) a.at(i, j) = g.at(i, j) + g.at(j, i);
  const SymmetricEigen e = eigh_symmetric(a);
  for (std::size_t i = 0; i + 1 < 8; ++i) CHECK(e.values[i] >= e.values[i + 1]);
  Tensor lam({8, 8});
  for (std::size_t i = 0; i < 8; ++i) lam.at(i, i) = e.values[i];
  const Tensor recon = matmul(matmul(e.vectors, lam), transpose(e.vectors));
  CHECK(relative_error(recon.data(), a.data()) <= 1e-8);
  const Tensor vtv = matmul(transpose(e.vectors), e.vectors);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(vtv.at(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-9);
  for (std::size_t k = 0; k < 8; ++k) {
    std::vector<double> av(8, 0.0);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) av[i] += a.at(i, j) * e.vectors.at(j, k);
    std::vector<double> lv(8);
    for (std::size_t i = 0; i < 8; ++i) lv[i] = e.values[k] * e.vectors.at(i, k);
    CHECK(relative_error(av, lv) <= 1e-8);
  }
}

TEST_CASE("eigh rejects an asymmetric matrix") {
  CHECK_THROWS_AS(eigh_symmetric(Tensor({2, 2}, {1, 2, 0, 1})), ValueError);
}

TEST_CASE("randn is deterministic per seed and stream") {
  SeededRng a(7, 0), b(7, 0), c(7, 1);
  const Tensor x = randn(a, {4}), y = randn(b, {4}), z = randn(c, {4});
  CHECK(x == y);
  CHECK_FALSE(x == z);
}

TEST_CASE("randn moments") {
  SeededRng rng(123, 0);
  const Tensor x = randn(rng, {100000});
  double mean = 0, var = 0;
  for (double v : x.data()) mean += v;
  mean /= 1e5;
  for (double v : x.data()) var += (v - mean) * (v - mean);
  var /= 1e5 - 1;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("tensor invariants") {
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeError);
  CHECK_THROWS_AS(Tensor({2}, {1.0}), ShapeError);
  CHECK_THROWS(Tensor({1}, {std::nan("")}));
}
