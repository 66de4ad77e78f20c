#include "kflow/interpolant.hpp"

#include <algorithm>
#include <cmath>

#include "kflow/error.hpp"
#include "kflow/random.hpp"

namespace kflow::interpolant {

std::string_view bump_name(BumpKind b) noexcept {
  switch (b) {
    case BumpKind::cubic: return "cubic";
    case BumpKind::quintic: return "quintic";
    case BumpKind::linear: return "linear";
  }
  return "?";
}

BumpKind parse_bump(std::string_view name) {
  if (name == "cubic") return BumpKind::cubic;
  if (name == "quintic") return BumpKind::quintic;
  if (name == "linear") return BumpKind::linear;
  throw ValueError("unknown bump '" + std::string(name) + "' (expected cubic, quintic or linear)");
}

std::string_view direction_name(Direction d) noexcept {
  return d == Direction::low_to_high ? "low-to-high" : "high-to-low";
}

Direction parse_direction(std::string_view name) {
  if (name == "low-to-high") return Direction::low_to_high;
  if (name == "high-to-low") return Direction::high_to_low;
  throw ValueError("unknown direction '" + std::string(name) + "' (expected low-to-high or high-to-low)");
}

BumpValue bump_eval(BumpKind bump, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ValueError("bump parameter t=" + std::to_string(t) + " outside [0, 1]");
  switch (bump) {
    case BumpKind::cubic: return {t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t)};
    case BumpKind::quintic: {
      const double t2 = t * t, t3 = t2 * t;
      return {t3 * (t * (6.0 * t - 15.0) + 10.0), 30.0 * t2 * (1.0 - t) * (1.0 - t)};
    }
    case BumpKind::linear: return {t, 1.0};
  }
  return {0.0, 0.0};
}

namespace {

ScaleCoordinate locate(std::span<const double> edges, double k_norm) {
  if (!(k_norm >= 0.0 && k_norm <= 1.0))
    throw ValueError("scale time k=" + std::to_string(k_norm) + " outside [0, 1]");
  const std::size_t S = edges.size() - 1;
  ScaleCoordinate c;
  c.k_norm = k_norm;
  std::size_t s = 0;
  while (s + 1 < S && k_norm >= edges[s + 1]) ++s;
  c.flow_index = s;
  c.width = edges[s + 1] - edges[s];
  c.t = std::clamp((k_norm - edges[s]) / c.width, 0.0, 1.0);
  if (k_norm == 1.0) c.t = 1.0;
  return c;
}

}  // namespace

ScaleCoordinate active_band(const kamp::ScalePartition& partition, double k_norm, Direction direction) {
  if (direction == Direction::low_to_high) {
    ScaleCoordinate c = locate(partition.boundaries(), k_norm);
    c.band = c.flow_index;
    return c;
  }
  const kamp::ScalePartition flipped = partition.reversed();
  ScaleCoordinate c = locate(flipped.boundaries(), k_norm);
  c.band = partition.band_count() - 1 - c.flow_index;
  return c;
}

NoiseDraw draw_noise(std::size_t size, std::uint64_t seed, std::uint64_t stream) {
  SeededRng rng(seed, stream);
  return {randn(rng, {size}), seed, stream};
}

Path::Path(const kamp::ScalePartition& partition, BumpKind bump, Direction direction)
    : bump_(bump), direction_(direction) {
  const std::size_t S = partition.band_count();
  flow_band_.resize(partition.size());
  band_of_flow_.resize(S);
  for (std::size_t f = 0; f < S; ++f) band_of_flow_[f] = direction == Direction::low_to_high ? f : S - 1 - f;
  if (direction == Direction::low_to_high) {
    for (std::size_t i = 0; i < partition.size(); ++i) flow_band_[i] = partition.band_of(i);
    edges_.assign(partition.boundaries().begin(), partition.boundaries().end());
  } else {
    const kamp::ScalePartition flipped = partition.reversed();
    for (std::size_t i = 0; i < flipped.size(); ++i) flow_band_[i] = flipped.band_of(i);
    edges_.assign(flipped.boundaries().begin(), flipped.boundaries().end());
  }
}

ScaleCoordinate Path::coordinate(double k_norm) const {
  ScaleCoordinate c = locate(edges_, k_norm);
  c.band = band_of_flow_[c.flow_index];
  return c;
}

void Path::state(std::span<const double> data, std::span<const double> noise, double k_norm,
                 std::span<double> out) const {
  const std::size_t n = size();
  if (data.size() != n || noise.size() != n || out.size() != n)
    throw ShapeError("interpolant expects " + std::to_string(n) + " coefficients");
  const ScaleCoordinate c = coordinate(k_norm);
  const double mu = bump_eval(bump_, c.t).value;
  const auto active = static_cast<std::uint32_t>(c.flow_index);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t b = flow_band_[i];
    if (b < active)
      out[i] = data[i];
    else if (b > active)
      out[i] = noise[i];
    else
      out[i] = mu * data[i] + (1.0 - mu) * noise[i];
  }
}

void Path::velocity(std::span<const double> data, std::span<const double> noise, double k_norm,
                    std::span<double> out) const {
  const std::size_t n = size();
  if (data.size() != n || noise.size() != n || out.size() != n)
    throw ShapeError("interpolant expects " + std::to_string(n) + " coefficients");
  const ScaleCoordinate c = coordinate(k_norm);
  const double rate = bump_eval(bump_, c.t).derivative / c.width;
  const auto active = static_cast<std::uint32_t>(c.flow_index);
  for (std::size_t i = 0; i < n; ++i) out[i] = flow_band_[i] == active ? rate * (data[i] - noise[i]) : 0.0;
}

void Path::discrete(std::span<const double> data, std::span<const double> noise, std::size_t revealed,
                    std::span<double> out) const {
  const std::size_t n = size();
  if (revealed > band_count())
    throw ValueError("revealed band count " + std::to_string(revealed) + " outside [0, " +
                     std::to_string(band_count()) + "]");
  if (data.size() != n || noise.size() != n || out.size() != n)
    throw ShapeError("interpolant expects " + std::to_string(n) + " coefficients");
  for (std::size_t i = 0; i < n; ++i) out[i] = flow_band_[i] < revealed ? data[i] : noise[i];
}

namespace {

void check_noise(const kamp::Decomposition& d, const Tensor& noise) {
  if (noise.size() != d.size())
    throw ShapeError("noise has " + std::to_string(noise.size()) + " coefficients, transform has " +
                     std::to_string(d.size()));
}

}  // namespace

std::vector<double> discrete_flow_coefficients(const kamp::Decomposition& decomposition, const Tensor& signal,
                                               const Tensor& noise, std::size_t revealed, Direction direction) {
  check_noise(decomposition, noise);
  const Path path(decomposition.partition(), BumpKind::cubic, direction);
  const auto data = decomposition.transform().forward(signal);
  std::vector<double> out(data.size());
  path.discrete(data, noise.data(), revealed, out);
  return out;
}

Tensor discrete_flow(const kamp::Decomposition& decomposition, const Tensor& signal, const Tensor& noise,
                     std::size_t revealed, Direction direction) {
  if (revealed == decomposition.band_count()) return signal;
  return decomposition.inverse(discrete_flow_coefficients(decomposition, signal, noise, revealed, direction));
}

FlowState interpolate(const kamp::Decomposition& decomposition, const Tensor& signal, const Tensor& noise,
                      double k_norm, BumpKind bump, Direction direction) {
  check_noise(decomposition, noise);
  const Path path(decomposition.partition(), bump, direction);
  const auto data = decomposition.transform().forward(signal);
  FlowState st;
  st.coefficients = Tensor({data.size()});
  path.state(data, noise.data(), k_norm, st.coefficients.data());
  st.coordinate = path.coordinate(k_norm);
  st.direction = direction;
  return st;
}

Tensor conditional_velocity(const kamp::Decomposition& decomposition, const Tensor& signal, const Tensor& noise,
                            double k_norm, BumpKind bump, Direction direction) {
  check_noise(decomposition, noise);
  const Path path(decomposition.partition(), bump, direction);
  const ScaleCoordinate c = path.coordinate(k_norm);
  if (bump == BumpKind::linear && (c.t == 0.0 || c.t == 1.0))
    throw ValueError("the linear bump has no derivative at a band boundary (k=" + std::to_string(k_norm) +
                     "); evaluate the velocity at an interior k");
  const auto data = decomposition.transform().forward(signal);
  Tensor v({data.size()});
  path.velocity(data, noise.data(), k_norm, v.data());
  return v;
}

}  // namespace kflow::interpolant
