#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kflow/error.hpp"
#include "kflow/kamp.hpp"
#include "kflow/linalg.hpp"
#include "kflow/random.hpp"

using namespace kflow;
using namespace kflow::kamp;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  SeededRng rng(seed, 5);
  return randn(rng, shape);
}

std::vector<Tensor> random_set(Shape shape, std::size_t n, std::uint64_t seed) {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_tensor(shape, seed * 1000 + i));
  return out;
}

}  // namespace

TEST_CASE("wavelet filters are orthonormal") {
  for (auto f : {wavelet::Family::haar, wavelet::Family::db6}) {
    const auto h = wavelet::lowpass(f);
    double s = 0, s2 = 0;
    for (double v : h) s += v, s2 += v * v;
    CHECK(s == doctest::Approx(std::numbers::sqrt2).epsilon(1e-12));
    CHECK(s2 == doctest::Approx(1.0).epsilon(1e-12));
    // Even shifts are orthogonal.
    for (std::size_t m = 2; m < h.size(); m += 2) {
      double c = 0;
      for (std::size_t k = 0; k + m < h.size(); ++k) c += h[k] * h[k + m];
      CHECK(std::abs(c) < 1e-10);
    }
  }
  CHECK(wavelet::lowpass(wavelet::Family::db6).size() == 12);
}

TEST_CASE("haar on a pair") {
  const Transform t = Transform::wavelet({2}, wavelet::Family::haar, 1);
  const auto c = t.forward(Tensor::from({3, 1}));
  CHECK(c[0] == doctest::Approx(4 / std::numbers::sqrt2));
  CHECK(c[1] == doctest::Approx(2 / std::numbers::sqrt2));
  CHECK(t.radius()[0] == 0.0);
  CHECK(t.radius()[1] == 1.0);
}

TEST_CASE("fourier canonical layout on length 4") {
  const Transform t = Transform::fourier({4});
  const auto c = t.forward(Tensor::from({1, 0, -1, 0}));
  REQUIRE(c.size() == 4);
  CHECK(std::abs(c[0]) < 1e-15);
  CHECK(c[1] == doctest::Approx(std::numbers::sqrt2));
  CHECK(std::abs(c[2]) < 1e-15);
  CHECK(std::abs(c[3]) < 1e-15);
  const auto r = t.radius();
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 1.0);
  CHECK(r[2] == 1.0);
  CHECK(r[3] == 2.0);
}

TEST_CASE("round trips and energy for every transform") {
  for (Shape shape : {Shape{16}, Shape{8, 8}, Shape{4, 16}}) {
    const auto data = random_set(shape, 40, 2);
    std::vector<Transform> ts{Transform::fourier(shape), Transform::wavelet(shape, wavelet::Family::haar),
                              Transform::wavelet(shape, wavelet::Family::db6),
                              Transform::pca(pca_fit(data, shape_size(shape)), shape)};
    for (const Transform& t : ts) {
      CAPTURE(t.id());
      for (std::uint64_t s = 0; s < 5; ++s) {
        const Tensor x = random_tensor(shape, 77 + s);
        const auto c = t.forward(x);
        CHECK(relative_error(t.inverse(c).data(), x.data()) <= 1e-10);
        if (t.kind() != TransformKind::pca) CHECK(norm2(c) == doctest::Approx(norm2(x.data())).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("pca basis matches the sample covariance") {
  const auto data = random_set({3}, 50, 9);
  const PcaBasis b = pca_fit(data, 3);
  // Independent covariance with 1/(n-1).
  std::vector<double> mean(3, 0.0);
  for (const Tensor& x : data)
    for (std::size_t i = 0; i < 3; ++i) mean[i] += x[i] / 50.0;
  Tensor cov({3, 3});
  for (const Tensor& x : data)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) cov.at(i, j) += (x[i] - mean[i]) * (x[j] - mean[j]) / 49.0;
  for (std::size_t i = 0; i < 3; ++i) CHECK(b.mean[i] == doctest::Approx(mean[i]));
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 3; ++i) {
      double cv = 0;
      for (std::size_t j = 0; j < 3; ++j) cv += cov.at(i, j) * b.components.at(j, k);
      CHECK(cv == doctest::Approx(b.variances[k] * b.components.at(i, k)).epsilon(1e-8));
    }
  }
  CHECK(b.variances[0] >= b.variances[1]);
  CHECK(b.variances[1] >= b.variances[2]);
  CHECK_THROWS_AS(Transform::pca(pca_fit(data, 2), {3}), ValueError);
  CHECK_THROWS_AS(pca_fit(std::span<const Tensor>(data.data(), 1), 1), ValueError);
}

TEST_CASE("uniform radius partition on an 8x8 fourier grid") {
  const Transform t = Transform::fourier({8, 8});
  const ScalePartition p = make_partition(t, 3, PartitionStrategy::uniform_radius);
  CHECK(p.band_count() == 3);
  CHECK(p.size() == 64);
  std::size_t total = 0;
  for (std::size_t s = 0; s < 3; ++s) total += p.band_size(s);
  CHECK(total == 64);
  // Coefficients with larger radius never sit in a lower band.
  const auto r = t.radius();
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t j = 0; j < 64; ++j)
      if (r[i] < r[j]) CHECK(p.band_of(i) <= p.band_of(j));
  CHECK(p.band_of(0) == 0);
  const auto b = p.boundaries();
  CHECK(b[1] == doctest::Approx(1.0 / 3));
}

TEST_CASE("wavelet levels map to bands") {
  const Transform t = Transform::wavelet({16}, wavelet::Family::haar, 3);
  const ScalePartition p = make_partition(t, 4, PartitionStrategy::uniform_level);
  CHECK(p.band_size(0) == 2);
  CHECK(p.band_size(1) == 2);
  CHECK(p.band_size(2) == 4);
  CHECK(p.band_size(3) == 8);
  CHECK_THROWS_AS(make_partition(t, 5, PartitionStrategy::uniform_level), ValueError);
}

TEST_CASE("reversed partition") {
  const Transform t = Transform::fourier({16});
  const ScalePartition p = make_partition(t, 3, PartitionStrategy::uniform_radius);
  const ScalePartition q = p.reversed();
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(q.band_of(i) == 2 - p.band_of(i));
  for (std::size_t s = 0; s < 3; ++s) CHECK(q.width(s) == doctest::Approx(p.width(2 - s)));
  const ScalePartition back = q.reversed();
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(back.band_of(i) == p.band_of(i));
  for (std::size_t s = 0; s <= 3; ++s) CHECK(back.boundaries()[s] == doctest::Approx(p.boundaries()[s]));
}

TEST_CASE("energy partition allocates time by energy") {
  const Transform t = Transform::fourier({16});
  const auto data = random_set({16}, 20, 4);
  const ScalePartition p = make_partition(t, 2, PartitionStrategy::energy, data);
  CHECK(p.band_count() == 2);
  CHECK(p.boundaries()[1] > 0.0);
  CHECK(p.boundaries()[1] < 1.0);
  CHECK_THROWS_AS(make_partition(t, 2, PartitionStrategy::energy), ValueError);
}

TEST_CASE("partition validation") {
  CHECK_THROWS_AS(ScalePartition({0, 1}, {0.0, 1.0}), ValueError);
  CHECK_THROWS_AS(ScalePartition({0, 0}, {0.0, 0.5, 1.0}), ValueError);
  CHECK_THROWS_AS(ScalePartition({0, 1}, {0.0, 0.7, 0.5, 1.0}), ValueError);
  CHECK_THROWS_AS(ScalePartition({0, 1}, {0.1, 0.5, 1.0}), ValueError);
  CHECK_THROWS_AS(parse_strategy("spiral"), ValueError);
}

TEST_CASE("decomposition band projections sum to the signal") {
  const Transform t = Transform::wavelet({8, 8}, wavelet::Family::db6);
  const Decomposition d(t, make_partition(t, 2, PartitionStrategy::uniform_level));
  const Tensor x = random_tensor({8, 8}, 3);
  Tensor sum({8, 8});
  for (std::size_t s = 0; s < 2; ++s) {
    const Tensor part = d.band_project(x, s);
    for (std::size_t i = 0; i < 64; ++i) sum[i] += part[i];
  }
  CHECK(relative_error(sum.data(), x.data()) <= 1e-10);
  const auto repr = d.forward(x);
  CHECK(repr.complete());
  CHECK(relative_error(d.inverse(repr).data(), x.data()) <= 1e-10);
  auto partial = repr;
  partial.present = {true, false};
  CHECK_THROWS_AS(d.inverse(partial), ValueError);
  CHECK_THROWS_AS(d.band_project(x, 2), ValueError);
}

TEST_CASE("amplitude spectrum of white noise is flat per coefficient") {
  const Transform t = Transform::fourier({16, 16});
  const Decomposition d(t, make_partition(t, 3, PartitionStrategy::uniform_radius));
  const auto data = random_set({16, 16}, 200, 6);
  const BandSpectrum s = d.amplitude_spectrum(data);
  for (std::size_t b = 0; b < 3; ++b) CHECK(s.per_coefficient[b] == doctest::Approx(1.0).epsilon(0.1));
}
