#pragma once

// K-amplitude transforms: invertible linear maps from a signal to a flat
// coefficient vector whose entries are grouped into ordered scale bands.
//
// Canonical coefficient layouts:
//  * Fourier - the unitary DFT restricted to a non-redundant half spectrum.
//    Grid frequencies are visited in ascending row-major index; a
//    self-conjugate frequency (DC, Nyquist corners) contributes Re X, every
//    other frequency whose conjugate partner has not been visited contributes
//    (sqrt2 Re X, sqrt2 Im X). The layout is an orthonormal real basis, so
//    coefficient energy equals signal energy.
//  * Wavelet - approximation block first, then detail blocks from coarsest to
//    finest level; in 2-D each level contributes its LH, HL, HH blocks in
//    that order, each row-major.
//  * PCA - projections onto components ordered by descending variance.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kflow/tensor.hpp"
#include "kflow/wavelet.hpp"

namespace kflow::kamp {

enum class TransformKind { fourier, wavelet, pca };

std::string_view kind_name(TransformKind kind) noexcept;
TransformKind parse_kind(std::string_view name);

/// Mean, orthonormal components (column j = component j), and explained variances.
struct PcaBasis {
  Tensor mean;                  ///< [d]
  Tensor components;            ///< [d, m]
  std::vector<double> variances;

  std::size_t dimension() const { return mean.size(); }
  std::size_t count() const { return variances.size(); }
  /// Coefficients of x on the first `count()` components.
  std::vector<double> project(std::span<const double> x) const;
  /// mean + components * coeffs
  std::vector<double> reconstruct(std::span<const double> coeffs) const;
};

/// Fits a PCA basis with the 1/(n-1) covariance convention.
PcaBasis pca_fit(std::span<const Tensor> dataset, std::size_t n_components);

class Transform {
 public:
  static Transform fourier(Shape signal_shape);
  /// `levels == 0` picks max(1, max_levels - 1), leaving a 2-sample approximation per axis where possible.
  static Transform wavelet(Shape signal_shape, wavelet::Family family, std::size_t levels = 0);
  /// The basis must be complete (as many components as dimensions).
  static Transform pca(PcaBasis basis, Shape signal_shape);

  TransformKind kind() const noexcept;
  std::string id() const;
  const Shape& signal_shape() const noexcept;
  std::size_t size() const noexcept;

  void forward(std::span<const double> signal, std::span<double> coeffs) const;
  void inverse(std::span<const double> coeffs, std::span<double> signal) const;
  std::vector<double> forward(const Tensor& signal) const;
  Tensor inverse(std::span<const double> coeffs) const;

  /// Native scale coordinate of every coefficient: Fourier radius |f|,
  /// wavelet scale index (0 = approximation), PCA component rank.
  std::span<const double> radius() const noexcept;
  /// Distinct native radii in ascending order.
  std::vector<double> native_scales() const;

  wavelet::Family wavelet_family() const;
  std::size_t wavelet_levels() const;
  const PcaBasis* pca_basis() const noexcept;

 private:
  struct State;
  explicit Transform(std::shared_ptr<const State> state);
  std::shared_ptr<const State> state_;
};

enum class PartitionStrategy { uniform_radius, uniform_level, energy };

std::string_view strategy_name(PartitionStrategy s) noexcept;
PartitionStrategy parse_strategy(std::string_view name);

/// Assignment of every coefficient to one of `band_count()` ordered bands plus
/// the normalized scale-time boundaries 0 = b_0 < ... < b_S = 1.
class ScalePartition {
 public:
  ScalePartition(std::vector<std::uint32_t> band_of, std::vector<double> boundaries);

  std::size_t band_count() const noexcept { return boundaries_.size() - 1; }
  std::size_t size() const noexcept { return band_of_.size(); }
  std::uint32_t band_of(std::size_t coeff) const { return band_of_[coeff]; }
  std::span<const std::uint32_t> bands() const noexcept { return band_of_; }
  std::span<const double> boundaries() const noexcept { return boundaries_; }
  std::size_t band_size(std::size_t band) const;
  double width(std::size_t band) const { return boundaries_[band + 1] - boundaries_[band]; }

  /// Same coefficients with band order flipped: band s becomes S-1-s and the
  /// time boundaries are mirrored.
  ScalePartition reversed() const;

  friend bool operator==(const ScalePartition&, const ScalePartition&) = default;

 private:
  std::vector<std::uint32_t> band_of_;
  std::vector<double> boundaries_;
};

/// Groups coefficients into bands.
///
/// uniform-radius and uniform-level use the transform's native radius r: a
/// coefficient joins band s iff r / r_max lies in [s/S, (s+1)/S), the last band
/// closed. The energy strategy replaces r / r_max by the fraction of mean
/// dataset energy held by strictly lower native scales, and sets each band's
/// time boundary to the energy fraction where it starts, so flow time is
/// allocated in proportion to energy.
ScalePartition make_partition(const Transform& transform, std::size_t n_bands, PartitionStrategy strategy,
                              std::span<const Tensor> dataset = {});

struct KAmplitudeRepresentation {
  Tensor coefficients;
  std::shared_ptr<const ScalePartition> partition;
  std::string transform_id;
  /// Bands whose coefficients are present; empty means all.
  std::vector<bool> present;

  bool complete() const;
};

struct BandSpectrum {
  std::vector<double> band_norm;        ///< mean over samples of the band's L2 norm
  std::vector<double> per_coefficient;  ///< mean over samples of norm / sqrt(band size)
  std::vector<std::size_t> band_sizes;
};

/// A transform together with its band partition.
class Decomposition {
 public:
  Decomposition(Transform transform, ScalePartition partition);

  const Transform& transform() const noexcept { return transform_; }
  const ScalePartition& partition() const noexcept { return *partition_; }
  std::size_t size() const noexcept { return transform_.size(); }
  std::size_t band_count() const noexcept { return partition_->band_count(); }

  KAmplitudeRepresentation forward(const Tensor& signal) const;
  Tensor inverse(const KAmplitudeRepresentation& repr) const;
  Tensor inverse(std::span<const double> coeffs) const { return transform_.inverse(coeffs); }

  /// The part of `signal` carried by band `band`.
  Tensor band_project(const Tensor& signal, std::size_t band) const;

  BandSpectrum amplitude_spectrum(std::span<const Tensor> dataset) const;

 private:
  Transform transform_;
  std::shared_ptr<const ScalePartition> partition_;
};

}  // namespace kflow::kamp
