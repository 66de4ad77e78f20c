#include <algorithm>
#include <cmath>
#include <map>

#include "kflow/error.hpp"
#include "kflow/kamp.hpp"

namespace kflow::kamp {

namespace {

// Tolerance for comparing a normalized coordinate against a band boundary, so
// that e.g. sqrt(2) and 0.5 * sqrt(8) land on the same side.
constexpr double kBoundaryTolerance = 1e-12;

// `edges` holds all S + 1 boundaries; the last band is closed at 1.
std::uint32_t band_for(double coord, std::span<const double> edges) {
  std::uint32_t band = 0;
  for (std::size_t s = 1; s + 1 < edges.size(); ++s)
    if (coord + kBoundaryTolerance >= edges[s]) band = static_cast<std::uint32_t>(s);
  return band;
}

}  // namespace

std::string_view strategy_name(PartitionStrategy s) noexcept {
  switch (s) {
    case PartitionStrategy::uniform_radius: return "uniform-radius";
    case PartitionStrategy::uniform_level: return "uniform-level";
    case PartitionStrategy::energy: return "energy";
  }
  return "?";
}

PartitionStrategy parse_strategy(std::string_view name) {
  if (name == "uniform-radius") return PartitionStrategy::uniform_radius;
  if (name == "uniform-level") return PartitionStrategy::uniform_level;
  if (name == "energy" || name == "energy-proportional") return PartitionStrategy::energy;
  throw ValueError("unknown partition strategy '" + std::string(name) +
                   "' (expected uniform-radius, uniform-level or energy)");
}

ScalePartition::ScalePartition(std::vector<std::uint32_t> band_of, std::vector<double> boundaries)
    : band_of_(std::move(band_of)), boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2) throw ValueError("a partition needs at least one band");
  if (boundaries_.front() != 0.0 || boundaries_.back() != 1.0)
    throw ValueError("partition boundaries must start at 0 and end at 1");
  for (std::size_t s = 0; s + 1 < boundaries_.size(); ++s)
    if (!(boundaries_[s] < boundaries_[s + 1])) throw ValueError("partition boundaries must be strictly increasing");
  std::vector<std::size_t> counts(band_count(), 0);
  for (std::uint32_t b : band_of_) {
    if (b >= band_count()) throw ValueError("band id " + std::to_string(b) + " out of range");
    ++counts[b];
  }
  for (std::size_t s = 0; s < counts.size(); ++s)
    if (counts[s] == 0) throw ValueError("band " + std::to_string(s) + " of the partition is empty");
}

std::size_t ScalePartition::band_size(std::size_t band) const {
  if (band >= band_count()) throw ValueError("band id " + std::to_string(band) + " out of range");
  return static_cast<std::size_t>(std::count(band_of_.begin(), band_of_.end(), static_cast<std::uint32_t>(band)));
}

ScalePartition ScalePartition::reversed() const {
  const std::size_t S = band_count();
  std::vector<std::uint32_t> bands(band_of_.size());
  for (std::size_t i = 0; i < bands.size(); ++i) bands[i] = static_cast<std::uint32_t>(S - 1 - band_of_[i]);
  std::vector<double> bounds(S + 1);
  for (std::size_t s = 0; s <= S; ++s) bounds[s] = 1.0 - boundaries_[S - s];
  bounds.front() = 0.0;
  bounds.back() = 1.0;
  return ScalePartition(std::move(bands), std::move(bounds));
}

ScalePartition make_partition(const Transform& transform, std::size_t n_bands, PartitionStrategy strategy,
                              std::span<const Tensor> dataset) {
  const auto scales = transform.native_scales();
  if (n_bands == 0) throw ValueError("n_bands must be at least 1");
  if (n_bands > scales.size())
    throw ValueError("n_bands " + std::to_string(n_bands) + " exceeds the " + std::to_string(scales.size()) +
                     " native scales of transform " + transform.id());
  const auto radius = transform.radius();
  const std::size_t n = transform.size();
  std::vector<double> uniform_edges(n_bands + 1);
  for (std::size_t s = 0; s <= n_bands; ++s) uniform_edges[s] = static_cast<double>(s) / static_cast<double>(n_bands);

  if (strategy != PartitionStrategy::energy) {
    const double r_max = scales.back();
    std::vector<std::uint32_t> bands(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double coord = r_max > 0.0 ? radius[i] / r_max : 0.0;
      bands[i] = band_for(coord, uniform_edges);
    }
    return ScalePartition(std::move(bands), std::move(uniform_edges));
  }

  if (dataset.empty()) throw ValueError("the energy partition strategy needs a dataset");
  std::map<double, double> energy_by_scale;
  for (double r : scales) energy_by_scale[r] = 0.0;
  for (const Tensor& x : dataset) {
    const auto coeffs = transform.forward(x);
    for (std::size_t i = 0; i < n; ++i) energy_by_scale[radius[i]] += coeffs[i] * coeffs[i];
  }
  double total = 0.0;
  for (const auto& [r, e] : energy_by_scale) total += e;
  if (!(total > 0.0)) throw ValueError("the energy partition strategy needs a dataset with nonzero energy");
  std::map<double, double> below;  // energy fraction of strictly lower scales
  double running = 0.0;
  for (const auto& [r, e] : energy_by_scale) {
    below[r] = running / total;
    running += e;
  }
  std::vector<std::uint32_t> bands(n);
  for (std::size_t i = 0; i < n; ++i) bands[i] = band_for(below[radius[i]], uniform_edges);
  // Time boundaries: energy fraction where each band starts.
  std::vector<double> edges(n_bands + 1, 0.0);
  edges.back() = 1.0;
  std::vector<double> start(n_bands, 2.0);
  for (const auto& [r, frac] : below) {
    const auto b = band_for(frac, uniform_edges);
    start[b] = std::min(start[b], frac);
  }
  for (std::size_t s = 1; s < n_bands; ++s) {
    if (start[s] > 1.0)
      throw ValueError("energy partition leaves band " + std::to_string(s) +
                       " empty; a single scale dominates the dataset energy");
    edges[s] = start[s];
  }
  return ScalePartition(std::move(bands), std::move(edges));
}

}  // namespace kflow::kamp
