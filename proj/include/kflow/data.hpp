#pragma once

// Desk-scale datasets and the KFT1 tensor file format.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kflow/random.hpp"
#include "kflow/tensor.hpp"

namespace kflow::data {

enum class DatasetKind { two_gaussians, two_moons, labeled_mixture, spectral_texture };

std::string_view dataset_name(DatasetKind kind) noexcept;
DatasetKind parse_dataset(std::string_view name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::two_gaussians;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  std::size_t classes = 2;  ///< labeled-mixture components
  std::size_t size = 16;    ///< texture side length
  double beta = 1.0;        ///< texture spectral exponent
};

struct LabeledBatch {
  std::vector<Tensor> samples;
  std::vector<std::size_t> labels;  ///< empty when unlabeled

  bool labeled() const noexcept { return !labels.empty(); }
  std::size_t size() const noexcept { return samples.size(); }
};

/// Mixture centers sit on a circle of radius 2, spread 0.3.
inline constexpr double toy_radius = 2.0;
inline constexpr double toy_sigma = 0.3;

/// 2-D point clouds. two-gaussians: centers (+-2, 0); two-moons: the usual
/// interleaved half circles; labeled-mixture: C components, labelled by component.
LabeledBatch gen_toy(const DatasetSpec& spec);

/// Field with Fourier amplitude max(|f|, 1)^-beta and uniform random phases,
/// zero DC, scaled to unit variance. `shape` is 1-D or 2-D with power-of-two axes.
Tensor gen_spectral_texture(const Shape& shape, double beta, SeededRng& rng);

/// Any dataset kind; textures are size x size.
LabeledBatch generate(const DatasetSpec& spec);

/// Stack equally shaped samples along a new leading axis, and back.
Tensor stack(std::span<const Tensor> samples);
std::vector<Tensor> unstack(const Tensor& stacked);

/// KFT1: "KFT1", u32 LE header length, JSON header, little-endian f32 payload.
void tensor_write(const std::filesystem::path& path, const Shape& shape, std::span<const double> values);
void tensor_write(const std::filesystem::path& path, const Tensor& tensor);
Tensor tensor_read(const std::filesystem::path& path);

/// Label ids stored as a 1-D KFT1 tensor.
void labels_write(const std::filesystem::path& path, std::span<const std::size_t> labels);
std::vector<std::size_t> labels_read(const std::filesystem::path& path);

}  // namespace kflow::data
