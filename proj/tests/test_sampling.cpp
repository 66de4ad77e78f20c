#include <cmath>

#include "doctest.h"
#include "kflow/data.hpp"
#include "kflow/error.hpp"
#include "kflow/sampling.hpp"

using namespace kflow;
using namespace kflow::sampling;

namespace {

const training::Checkpoint& toy_checkpoint() {
  static const training::Checkpoint ck = [] {
    data::DatasetSpec s;
    s.kind = data::DatasetKind::labeled_mixture;
    s.count = 256;
    s.seed = 2;
    const auto d = data::generate(s);
    training::TrainConfig c;
    c.model.hidden = 16;
    c.model.depth = 2;
    c.steps = 60;
    c.batch_size = 32;
    c.label_conditioning = true;
    c.seed = 1;
    return training::train(d.samples, d.labels, c);
  }();
  return ck;
}

}  // namespace

TEST_CASE("constant field is integrated exactly") {
  const VelocityField f = [](std::span<const double>, double, std::span<double> out) {
    out[0] = 0.5;
    out[1] = -2.0;
  };
  const std::vector<double> x0{1.0, 1.0};
  for (auto integ : {Integrator::euler, Integrator::heun}) {
    Trajectory traj;
    const auto x = integrate_field(f, x0, 37, integ, &traj);
    CHECK(std::abs(x[0] - 1.5) <= 1e-12);
    CHECK(std::abs(x[1] + 1.0) <= 1e-12);
    CHECK(traj.size() == 38);
  }
}

TEST_CASE("linear field matches the closed-form step products") {
  const VelocityField f = [](std::span<const double> x, double, std::span<double> out) { out[0] = x[0]; };
  const std::vector<double> x0{1.0};
  const std::size_t n = 16;
  const double h = 1.0 / n;
  CHECK(integrate_field(f, x0, n, Integrator::euler)[0] == doctest::Approx(std::pow(1 + h, n)).epsilon(1e-13));
  CHECK(integrate_field(f, x0, n, Integrator::heun)[0] ==
        doctest::Approx(std::pow(1 + h + h * h / 2, n)).epsilon(1e-13));
  const VelocityField bad = [](std::span<const double>, double, std::span<double> out) { out[0] = std::nan(""); };
  CHECK_THROWS_AS(integrate_field(bad, x0, 4, Integrator::euler), NumericError);
}

TEST_CASE("guidance endpoints and rho cut") {
  const auto& m = toy_checkpoint().model;
  const std::vector<double> psi{0.2, -0.4};
  const auto vn = m.eval(psi, 0.2);
  const auto vl = m.eval(psi, 0.2, 1);
  CHECK(guided_velocity(m, psi, 0.2, 1, 0.0, 1.0) == vn);
  CHECK(guided_velocity(m, psi, 0.2, 1, 1.0, 1.0) == vl);
  CHECK(guided_velocity(m, psi, 0.2, 1, 1.0, 0.1) == vn);
  const auto g = guided_velocity(m, psi, 0.2, 1, 2.0, 1.0);
  for (std::size_t i = 0; i < 2; ++i) CHECK(g[i] == doctest::Approx(vn[i] + 2.0 * (vl[i] - vn[i])));
}

TEST_CASE("sampling is deterministic and thread independent") {
  const auto& ck = toy_checkpoint();
  SamplerConfig c;
  c.steps = 20;
  c.seed = 9;
  const auto a = sample_batch(ck, 5, c, {}, 1);
  const auto b = sample_batch(ck, 5, c, {}, 3);
  REQUIRE(a.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a[i] == b[i]);
  CHECK(a[2] == integrate(ck, interpolant::draw_noise(2, 9, 2), c));
  std::vector<std::optional<std::size_t>> labels(5, std::size_t{1});
  const auto l = sample_batch(ck, 5, c, labels, 2);
  CHECK_FALSE(l[0] == a[0]);
  c.direction = interpolant::Direction::high_to_low;
  CHECK_THROWS_AS(sample_batch(ck, 1, c), ValueError);
}

TEST_CASE("band sets") {
  CHECK(parse_band_set("low", 3) == std::vector<std::size_t>{0, 1});
  CHECK(parse_band_set("high", 3) == std::vector<std::size_t>{2});
  CHECK(parse_band_set("all", 2) == std::vector<std::size_t>{0, 1});
  CHECK(parse_band_set("none", 2).empty());
  CHECK(parse_band_set("2,0", 3) == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(parse_band_set("5", 3), ValueError);
  CHECK_THROWS_AS(parse_band_set("mid", 3), ValueError);
  const EditSpec s = make_edit_spec({1}, 3, 4, 0);
  CHECK(s.resampled_bands == std::vector<std::size_t>{0, 2});
  EditSpec bad = s;
  bad.resampled_bands = {0, 1, 2};
  CHECK_THROWS_AS(bad.validate(3), ValueError);
}

TEST_CASE("edit groups share noise on the shared bands") {
  const kamp::ScalePartition p({0, 0, 1, 1, 2}, {0.0, 0.3, 0.6, 1.0});
  const EditSpec spec = make_edit_spec({2}, 3, 4, 5);
  const auto states = edit_initial_states(p, spec);
  REQUIRE(states.size() == 4);
  const auto shared = interpolant::draw_noise(5, 5, 0).coefficients;
  for (std::size_t j = 0; j < 4; ++j) {
    const auto own = interpolant::draw_noise(5, 5, j + 1).coefficients;
    for (std::size_t i = 0; i < 5; ++i) CHECK(states[j][i] == (p.band_of(i) == 2 ? shared[i] : own[i]));
  }
  const auto& ck = toy_checkpoint();
  SamplerConfig c;
  c.steps = 10;
  const auto out = edit_generate(ck, make_edit_spec({0}, 2, 6, 1), c, {}, 2);
  CHECK(out.size() == 6);
}

TEST_CASE("oracle integration reaches the data") {
  const auto t = kamp::Transform::fourier({16});
  const kamp::Decomposition d(t, kamp::make_partition(t, 4, kamp::PartitionStrategy::uniform_radius));
  SeededRng rng(1, 0);
  const Tensor x = randn(rng, {16}), e = randn(rng, {16});
  const Tensor lin = conditional_oracle_integrate(d, x, e, 64, interpolant::BumpKind::linear);
  CHECK(relative_error(lin.data(), x.data()) <= 1e-9);
  const Tensor cub = conditional_oracle_integrate(d, x, e, 1024);
  CHECK(relative_error(cub.data(), x.data()) <= 1e-2);
}

TEST_CASE("sampler config validation") {
  SamplerConfig c;
  c.steps = 0;
  CHECK_THROWS_AS(c.validate(), ValueError);
  c = {};
  c.rho = 1.5;
  CHECK_THROWS_AS(c.validate(), ValueError);
  CHECK(parse_integrator("euler") == Integrator::euler);
  CHECK_THROWS_AS(parse_integrator("rk4"), ValueError);
}
