#include <cmath>

#include "doctest.h"
#include "kflow/error.hpp"
#include "kflow/model.hpp"
#include "kflow/random.hpp"

using namespace kflow;
using namespace kflow::model;

namespace {

ModelConfig small_config(std::size_t vocab) {
  ModelConfig c;
  c.coeff_size = 3;
  c.hidden = 5;
  c.depth = 2;
  c.scale_embed_dim = 4;
  c.max_frequency = 10.0;
  c.label_vocab = vocab;
  c.label_embed_dim = 2;
  return c;
}

VectorFieldModel randomized(const ModelConfig& c, std::uint64_t seed) {
  VectorFieldModel m = VectorFieldModel::init(c, seed);
  SeededRng rng(seed, 42);
  for (double& p : m.parameters()) p = 0.5 * rng.normal();
  return m;
}

double act(Activation a, double x) { return a == Activation::silu ? x / (1 + std::exp(-x)) : std::tanh(x); }

// Straightforward forward pass written from the layer equations.
std::vector<double> reference_forward(const VectorFieldModel& m, std::span<const double> psi, double k,
                                      std::optional<std::size_t> label) {
  const ModelConfig& c = m.config();
  const Tensor e = embed_scale(k, c.scale_embed_dim, c.max_frequency);
  std::vector<double> h(psi.begin(), psi.end());
  h.insert(h.end(), e.values().begin(), e.values().end());
  if (c.label_vocab > 0) {
    const auto emb = m.parameter("label_embedding");
    const std::size_t row = label ? *label : c.label_vocab;
    for (std::size_t j = 0; j < c.label_embed_dim; ++j) h.push_back(emb[row * c.label_embed_dim + j]);
  }
  for (std::size_t l = 0; l < c.depth; ++l) {
    const std::string p = "layer" + std::to_string(l);
    const auto W = m.parameter(p + ".weight"), b = m.parameter(p + ".bias"), M = m.parameter(p + ".scale_mod");
    std::vector<double> next(c.hidden);
    for (std::size_t i = 0; i < c.hidden; ++i) {
      double z = b[i];
      for (std::size_t j = 0; j < h.size(); ++j) z += W[i * h.size() + j] * h[j];
      for (std::size_t j = 0; j < e.size(); ++j) z += M[i * e.size() + j] * e[j];
      next[i] = act(c.activation, z);
    }
    h = next;
  }
  const auto W = m.parameter("out.weight"), b = m.parameter("out.bias");
  std::vector<double> out(c.coeff_size);
  for (std::size_t i = 0; i < c.coeff_size; ++i) {
    out[i] = b[i];
    for (std::size_t j = 0; j < c.hidden; ++j) out[i] += W[i * c.hidden + j] * h[j];
  }
  return out;
}

TrainingBatch random_batch(const ModelConfig& c, std::size_t n, std::uint64_t seed) {
  SeededRng rng(seed, 3);
  TrainingBatch b;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c.coeff_size; ++j) {
      b.psi.push_back(rng.normal());
      b.target.push_back(rng.normal());
    }
    b.k.push_back(rng.uniform());
    if (c.label_vocab > 0) {
      if (i % 3 == 0)
        b.labels.emplace_back(std::nullopt);
      else
        b.labels.emplace_back(rng.below(c.label_vocab));
    }
  }
  return b;
}

}  // namespace

TEST_CASE("scale embedding") {
  const Tensor e0 = embed_scale(0.0, 4, 100.0);
  CHECK(e0[0] == 0.0);
  CHECK(e0[1] == 0.0);
  CHECK(e0[2] == 1.0);
  CHECK(e0[3] == 1.0);
  const Tensor e = embed_scale(0.5, 4, 100.0);
  CHECK(e[0] == doctest::Approx(std::sin(0.5)));
  CHECK(e[1] == doctest::Approx(std::sin(50.0)));
  CHECK(e[3] == doctest::Approx(std::cos(50.0)));
  CHECK_THROWS_AS(embed_scale(0.5, 3), ValueError);
  CHECK_THROWS_AS(embed_scale(0.5, 0), ValueError);
}

TEST_CASE("parameter layout and count") {
  const ModelConfig c = small_config(3);
  const VectorFieldModel m = VectorFieldModel::init(c, 1);
  const std::size_t in = 3 + 4 + 2;
  const std::size_t expect = (5 * in + 5 + 5 * 4) + (5 * 5 + 5 + 5 * 4) + (3 * 5 + 3) + 4 * 2;
  CHECK(m.parameter_count() == expect);
  CHECK(c.input_width() == in);
  CHECK(m.layout().front().name == "layer0.weight");
  CHECK(m.layout().back().name == "label_embedding");
  CHECK(m.parameter("label_embedding").size() == 8);
  CHECK_THROWS_AS(m.parameter("nope"), ValueError);
  for (double v : m.parameter("out.weight")) CHECK(v == 0.0);
  for (double v : m.parameter("layer1.bias")) CHECK(v == 0.0);
  CHECK(VectorFieldModel::init(c, 1) == m);
  CHECK_FALSE(VectorFieldModel::init(c, 2) == m);
}

TEST_CASE("fresh model outputs zero") {
  const VectorFieldModel m = VectorFieldModel::init(small_config(0), 4);
  const std::vector<double> psi{0.3, -1.0, 2.0};
  for (double v : m.eval(psi, 0.4)) CHECK(v == 0.0);
}

TEST_CASE("eval matches the reference forward pass") {
  for (auto a : {Activation::silu, Activation::tanh}) {
    ModelConfig c = small_config(3);
    c.activation = a;
    const VectorFieldModel m = randomized(c, 7);
    const std::vector<double> psi{0.3, -1.0, 2.0};
    for (std::optional<std::size_t> label : {std::optional<std::size_t>{}, std::optional<std::size_t>{2}}) {
      const auto got = m.eval(psi, 0.37, label);
      const auto ref = reference_forward(m, psi, 0.37, label);
      for (std::size_t i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
    // Batched evaluation agrees with one-at-a-time.
    const TrainingBatch b = random_batch(c, 4, 9);
    std::vector<double> out(12);
    m.eval(b.psi, b.k, b.labels, out);
    for (std::size_t s = 0; s < 4; ++s) {
      const auto one = m.eval(std::span<const double>(b.psi).subspan(3 * s, 3), b.k[s], b.labels[s]);
      for (std::size_t i = 0; i < 3; ++i) CHECK(out[3 * s + i] == one[i]);
    }
  }
}

TEST_CASE("label handling") {
  const VectorFieldModel u = randomized(small_config(0), 2);
  const std::vector<double> psi{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(u.eval(psi, 0.5, 0), ValueError);
  const VectorFieldModel c = randomized(small_config(3), 2);
  CHECK_THROWS_AS(c.eval(psi, 0.5, 3), ValueError);
  CHECK(c.null_label() == 3);
}

TEST_CASE("gradients match central differences") {
  for (std::size_t vocab : {0u, 3u}) {
    const ModelConfig c = small_config(vocab);
    VectorFieldModel m = randomized(c, 11);
    REQUIRE(m.parameter_count() <= 500);
    const TrainingBatch b = random_batch(c, 6, 12);
    const LossAndGradient lg = vf_grad(m, b);
    CHECK(lg.loss == doctest::Approx(vf_loss(m, b)).epsilon(1e-14));
    const double h = 1e-5;
    for (const ParamView& view : m.layout()) {
      CAPTURE(view.name);
      const auto g = lg.gradient.view(m, view.name);
      std::vector<double> fd(g.size());
      auto p = m.parameter(view.name);
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + h;
        const double up = vf_loss(m, b);
        p[i] = keep - h;
        const double down = vf_loss(m, b);
        p[i] = keep;
        fd[i] = (up - down) / (2 * h);
      }
      const double err = relative_error(g, fd);
      CHECK(err <= 1e-6);
    }
  }
}

TEST_CASE("loss is the batch mean of squared norms") {
  const ModelConfig c = small_config(0);
  const VectorFieldModel m = VectorFieldModel::init(c, 5);  // zero output
  const TrainingBatch b = random_batch(c, 4, 1);
  double expect = 0;
  for (double t : b.target) expect += t * t;
  CHECK(vf_loss(m, b) == doctest::Approx(expect / 4).epsilon(1e-14));
}

TEST_CASE("non-finite outputs are rejected") {
  VectorFieldModel m = randomized(small_config(0), 2);
  for (double& v : m.parameter("out.bias")) v = 1e308;
  for (double& v : m.parameter("out.weight")) v = 1e308;
  const std::vector<double> psi{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(m.eval(psi, 0.5), NumericError);
}

TEST_CASE("adam first step moves each parameter by about lr") {
  std::vector<double> p{1.0, -2.0, 0.5};
  GradientSet g{{0.3, -4.0, 0.0}};
  AdamState st(3);
  AdamConfig cfg;
  cfg.lr = 0.01;
  optimizer_step(st, p, g, cfg);
  CHECK(p[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
  CHECK(p[2] == 0.5);
  CHECK(st.step == 1);
  GradientSet bad{{1.0}};
  CHECK_THROWS_AS(optimizer_step(st, p, bad, cfg), ShapeError);
}

TEST_CASE("adam minimizes a quadratic") {
  std::vector<double> p{3.0, -2.0};
  AdamState st(2);
  AdamConfig cfg;
  cfg.lr = 0.05;
  for (int i = 0; i < 2000; ++i) {
    GradientSet g{{2 * p[0], 2 * p[1]}};
    optimizer_step(st, p, g, cfg);
  }
  CHECK(std::abs(p[0]) < 1e-2);
  CHECK(std::abs(p[1]) < 1e-2);
}
