#include <cmath>

#include "doctest.h"
#include "kflow/error.hpp"
#include "kflow/interpolant.hpp"
#include "kflow/random.hpp"

using namespace kflow;
using namespace kflow::interpolant;

namespace {

kamp::Decomposition fourier_decomp(std::size_t bands) {
  const auto t = kamp::Transform::fourier({16});
  return kamp::Decomposition(t, kamp::make_partition(t, bands, kamp::PartitionStrategy::uniform_radius));
}

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  SeededRng rng(seed, 8);
  return randn(rng, shape);
}

}  // namespace

TEST_CASE("bump values") {
  CHECK(bump_eval(BumpKind::cubic, 0.5).value == doctest::Approx(0.5));
  CHECK(bump_eval(BumpKind::cubic, 0.5).derivative == doctest::Approx(1.5));
  CHECK(bump_eval(BumpKind::quintic, 0.5).derivative == doctest::Approx(1.875));
  CHECK(bump_eval(BumpKind::linear, 0.3).derivative == 1.0);
  for (auto b : {BumpKind::cubic, BumpKind::quintic, BumpKind::linear}) {
    CHECK(bump_eval(b, 0).value == 0.0);
    CHECK(bump_eval(b, 1).value == 1.0);
    // Derivative against a central difference.
    const double h = 1e-6, t = 0.37;
    const double fd = (bump_eval(b, t + h).value - bump_eval(b, t - h).value) / (2 * h);
    CHECK(bump_eval(b, t).derivative == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("active band lookup is half open") {
  const kamp::ScalePartition p({0, 1, 2}, {0.0, 0.25, 0.5, 1.0});
  CHECK(active_band(p, 0.0).band == 0);
  CHECK(active_band(p, 0.25).band == 1);
  CHECK(active_band(p, 0.25).t == 0.0);
  CHECK(active_band(p, 0.75).t == doctest::Approx(0.5));
  CHECK(active_band(p, 1.0).band == 2);
  CHECK(active_band(p, 1.0).t == 1.0);
  const auto r = active_band(p, 0.1, Direction::high_to_low);
  CHECK(r.band == 2);
  CHECK(r.flow_index == 0);
  CHECK(r.width == doctest::Approx(0.5));
  CHECK_THROWS_AS(active_band(p, 1.5), ValueError);
}

TEST_CASE("interpolant endpoints and masking") {
  const auto d = fourier_decomp(3);
  const Tensor x = random_tensor({16}, 1), e = random_tensor({16}, 2);
  for (auto dir : {Direction::low_to_high, Direction::high_to_low}) {
    const auto s0 = interpolate(d, x, e, 0.0, BumpKind::cubic, dir);
    for (std::size_t i = 0; i < 16; ++i) CHECK(s0.coefficients[i] == e[i]);
    const auto s1 = interpolate(d, x, e, 1.0, BumpKind::cubic, dir);
    const auto fx = d.transform().forward(x);
    for (std::size_t i = 0; i < 16; ++i) CHECK(std::abs(s1.coefficients[i] - fx[i]) <= 1e-12);
  }
  const auto fx = d.transform().forward(x);
  const auto c = discrete_flow_coefficients(d, x, e, 1);
  for (std::size_t i = 0; i < 16; ++i) CHECK(c[i] == (d.partition().band_of(i) == 0 ? fx[i] : e[i]));
}

TEST_CASE("velocity is zero off the active band") {
  const auto d = fourier_decomp(3);
  const Tensor x = random_tensor({16}, 1), e = random_tensor({16}, 2);
  const Tensor v = conditional_velocity(d, x, e, 0.5);
  const auto coord = active_band(d.partition(), 0.5);
  for (std::size_t i = 0; i < 16; ++i)
    if (d.partition().band_of(i) != coord.band) CHECK(v[i] == 0.0);
  CHECK_THROWS_AS(conditional_velocity(d, x, e, 1.0 / 3.0, BumpKind::linear), ValueError);
}

TEST_CASE("path velocity matches a central difference of the state") {
  const auto d = fourier_decomp(2);
  const Path path(d.partition(), BumpKind::quintic, Direction::high_to_low);
  const auto x = random_tensor({16}, 4), e = random_tensor({16}, 5);
  std::vector<double> a(16), b(16), v(16);
  const double k = 0.3, h = 1e-5;
  path.state(x.data(), e.data(), k + h, a);
  path.state(x.data(), e.data(), k - h, b);
  path.velocity(x.data(), e.data(), k, v);
  for (std::size_t i = 0; i < 16; ++i) CHECK(v[i] == doctest::Approx((a[i] - b[i]) / (2 * h)).epsilon(1e-6));
}

TEST_CASE("noise draws are keyed by seed and stream") {
  const auto a = draw_noise(8, 3, 0), b = draw_noise(8, 3, 0), c = draw_noise(8, 3, 1);
  CHECK(a.coefficients == b.coefficients);
  CHECK_FALSE(a.coefficients == c.coefficients);
}

TEST_CASE("name parsing") {
  CHECK(parse_bump("quintic") == BumpKind::quintic);
  CHECK(parse_direction("high-to-low") == Direction::high_to_low);
  CHECK_THROWS_AS(parse_bump("sine"), ValueError);
  CHECK(bump_name(BumpKind::cubic) == "cubic");
}
