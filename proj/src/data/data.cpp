#include <cmath>
#include <numbers>

#include "kflow/data.hpp"
#include "kflow/error.hpp"
#include "kflow/fft.hpp"

namespace kflow::data {

std::string_view dataset_name(DatasetKind kind) noexcept {
  switch (kind) {
    case DatasetKind::two_gaussians: return "two-gaussians";
    case DatasetKind::two_moons: return "two-moons";
    case DatasetKind::labeled_mixture: return "labeled-mixture";
    case DatasetKind::spectral_texture: return "spectral-texture";
  }
  return "?";
}

DatasetKind parse_dataset(std::string_view name) {
  for (auto k : {DatasetKind::two_gaussians, DatasetKind::two_moons, DatasetKind::labeled_mixture,
                 DatasetKind::spectral_texture})
    if (dataset_name(k) == name) return k;
  throw ValueError("unknown dataset kind '" + std::string(name) +
                   "' (expected two-gaussians, two-moons, labeled-mixture or spectral-texture)");
}

LabeledBatch gen_toy(const DatasetSpec& spec) {
  if (spec.count == 0) throw ValueError("dataset count must be at least 1");
  SeededRng rng(spec.seed, 0x746f79);
  LabeledBatch out;
  out.samples.reserve(spec.count);
  switch (spec.kind) {
    case DatasetKind::two_gaussians:
      for (std::size_t i = 0; i < spec.count; ++i) {
        const double cx = rng.uniform() < 0.5 ? -toy_radius : toy_radius;
        const double x = cx + toy_sigma * rng.normal();
        const double y = toy_sigma * rng.normal();
        out.samples.push_back(Tensor({2}, {x, y}));
      }
      break;
    case DatasetKind::two_moons:
      for (std::size_t i = 0; i < spec.count; ++i) {
        const bool lower = rng.uniform() < 0.5;
        const double a = std::numbers::pi * rng.uniform();
        double x = lower ? 1.0 - std::cos(a) : std::cos(a);
        double y = lower ? 0.5 - std::sin(a) : std::sin(a);
        x += 0.1 * rng.normal();
        y += 0.1 * rng.normal();
        out.samples.push_back(Tensor({2}, {x, y}));
        out.labels.push_back(lower ? 1 : 0);
      }
      break;
    case DatasetKind::labeled_mixture: {
      if (spec.classes < 1) throw ValueError("labeled mixture needs at least one class");
      for (std::size_t i = 0; i < spec.count; ++i) {
        const std::size_t c = rng.below(spec.classes);
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(spec.classes);
        const double x = toy_radius * std::cos(angle) + toy_sigma * rng.normal();
        const double y = toy_radius * std::sin(angle) + toy_sigma * rng.normal();
        out.samples.push_back(Tensor({2}, {x, y}));
        out.labels.push_back(c);
      }
      break;
    }
    case DatasetKind::spectral_texture:
      throw ValueError("spectral-texture is not a toy point dataset");
  }
  return out;
}

Tensor gen_spectral_texture(const Shape& shape, double beta, SeededRng& rng) {
  if (beta < 0) throw ValueError("spectral exponent must be nonnegative");
  if (shape.empty() || shape.size() > 2) throw ShapeError("textures are 1-D or 2-D, got " + shape_string(shape));
  for (std::size_t d : shape)
    if (!is_power_of_two(d)) throw ShapeError("texture side " + std::to_string(d) + " is not a power of two");
  const std::size_t rows = shape.size() == 2 ? shape[0] : 1;
  const std::size_t cols = shape.back();
  auto freq = [](std::size_t i, std::size_t n) {
    return i <= n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
  };

  ComplexTensor spec(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t g = r * cols + c;
      const std::size_t pr = (rows - r) % rows, pc = (cols - c) % cols;
      const std::size_t partner = pr * cols + pc;
      if (partner < g) {
        spec[g] = std::conj(spec[partner]);
        continue;
      }
      const double fr = shape.size() == 2 ? freq(r, rows) : 0.0;
      const double radius = std::hypot(fr, freq(c, cols));
      if (g == 0) continue;  // zero DC
      const double amp = std::pow(std::max(radius, 1.0), -beta);
      if (partner == g) {
        spec[g] = rng.uniform() < 0.5 ? -amp : amp;
      } else {
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        spec[g] = std::polar(amp, phase);
      }
    }
  }
  Tensor field = dft_inverse(spec);
  double mean = 0.0;
  for (double v : field.data()) mean += v;
  mean /= static_cast<double>(field.size());
  double var = 0.0;
  for (double v : field.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(field.size());
  const double scale = var > 0 ? 1.0 / std::sqrt(var) : 1.0;
  for (double& v : field.data()) v = (v - mean) * scale;
  return field;
}

LabeledBatch generate(const DatasetSpec& spec) {
  if (spec.kind != DatasetKind::spectral_texture) return gen_toy(spec);
  if (spec.count == 0) throw ValueError("dataset count must be at least 1");
  LabeledBatch out;
  out.samples.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    SeededRng rng(spec.seed, 0x7465780000ULL + i);
    out.samples.push_back(gen_spectral_texture({spec.size, spec.size}, spec.beta, rng));
  }
  return out;
}

Tensor stack(std::span<const Tensor> samples) {
  if (samples.empty()) throw ValueError("cannot stack an empty sample list");
  const Shape& s0 = samples.front().shape();
  Shape shape{samples.size()};
  shape.insert(shape.end(), s0.begin(), s0.end());
  std::vector<double> values;
  values.reserve(shape_size(shape));
  for (const Tensor& t : samples) {
    if (t.shape() != s0)
      throw ShapeError("cannot stack shape " + shape_string(t.shape()) + " with " + shape_string(s0));
    values.insert(values.end(), t.data().begin(), t.data().end());
  }
  return Tensor(std::move(shape), std::move(values));
}

std::vector<Tensor> unstack(const Tensor& stacked) {
  if (stacked.rank() < 2) throw ShapeError("stacked tensor needs a leading sample axis, got " + shape_string(stacked.shape()));
  const Shape inner(stacked.shape().begin() + 1, stacked.shape().end());
  const std::size_t n = shape_size(inner);
  std::vector<Tensor> out;
  out.reserve(stacked.shape()[0]);
  for (std::size_t i = 0; i < stacked.shape()[0]; ++i) {
    const auto first = stacked.values().begin() + static_cast<std::ptrdiff_t>(i * n);
    out.emplace_back(inner, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n)));
  }
  return out;
}

}  // namespace kflow::data
