#pragma once

// The banded interpolant between a noise draw and data coefficients.
//
// Scale time k in [0, 1] is split by the partition boundaries. Inside band s
// (in flow order) with local time t = (k - b_s) / w_s, bands already passed
// carry data, bands still ahead carry noise, and band s carries
// mu(t) * data + (1 - mu(t)) * noise. The conditional velocity is the exact
// k-derivative of that path: (mu'(t) / w_s) * (data - noise) on band s and
// zero elsewhere.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "kflow/kamp.hpp"
#include "kflow/tensor.hpp"

namespace kflow::interpolant {

enum class BumpKind { cubic, quintic, linear };
enum class Direction { low_to_high, high_to_low };

std::string_view bump_name(BumpKind b) noexcept;
BumpKind parse_bump(std::string_view name);
std::string_view direction_name(Direction d) noexcept;
Direction parse_direction(std::string_view name);

struct BumpValue {
  double value;
  double derivative;
};

/// mu(t) and mu'(t): cubic 3t^2 - 2t^3, quintic 6t^5 - 15t^4 + 10t^3, linear t.
BumpValue bump_eval(BumpKind bump, double t);

struct ScaleCoordinate {
  double k_norm = 0.0;
  std::size_t band = 0;        ///< band id in the partition
  std::size_t flow_index = 0;  ///< position of that band in flow order
  double t = 0.0;
  double width = 1.0;
};

/// Half-open band lookup; k_norm = 1 clamps to the final band with t = 1.
ScaleCoordinate active_band(const kamp::ScalePartition& partition, double k_norm,
                            Direction direction = Direction::low_to_high);

struct NoiseDraw {
  Tensor coefficients;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

NoiseDraw draw_noise(std::size_t size, std::uint64_t seed, std::uint64_t stream);

struct FlowState {
  Tensor coefficients;
  ScaleCoordinate coordinate;
  Direction direction = Direction::low_to_high;
};

/// Precomputed flow-ordered view of a partition, used on hot paths.
class Path {
 public:
  Path(const kamp::ScalePartition& partition, BumpKind bump, Direction direction);

  std::size_t size() const noexcept { return flow_band_.size(); }
  std::size_t band_count() const noexcept { return edges_.size() - 1; }
  BumpKind bump() const noexcept { return bump_; }
  Direction direction() const noexcept { return direction_; }
  /// Flow-order index of a coefficient's band.
  std::uint32_t flow_band(std::size_t coeff) const { return flow_band_[coeff]; }
  std::span<const double> flow_edges() const noexcept { return edges_; }

  ScaleCoordinate coordinate(double k_norm) const;

  void state(std::span<const double> data, std::span<const double> noise, double k_norm,
             std::span<double> out) const;
  /// Velocity on the active band; other entries are set to +0.0. Uses the
  /// right-derivative at band starts, so it is defined for every k.
  void velocity(std::span<const double> data, std::span<const double> noise, double k_norm,
                std::span<double> out) const;
  /// Data on the first `revealed` bands in flow order, noise elsewhere.
  void discrete(std::span<const double> data, std::span<const double> noise, std::size_t revealed,
                std::span<double> out) const;

 private:
  std::vector<std::uint32_t> flow_band_;
  std::vector<double> edges_;
  std::vector<std::size_t> band_of_flow_;
  BumpKind bump_;
  Direction direction_;
};

/// Signal reconstructed from data on the first `revealed` bands and noise elsewhere.
Tensor discrete_flow(const kamp::Decomposition& decomposition, const Tensor& signal, const Tensor& noise,
                     std::size_t revealed, Direction direction = Direction::low_to_high);

/// Coefficients of the interpolant before inversion, for the same masking.
std::vector<double> discrete_flow_coefficients(const kamp::Decomposition& decomposition, const Tensor& signal,
                                               const Tensor& noise, std::size_t revealed,
                                               Direction direction = Direction::low_to_high);

FlowState interpolate(const kamp::Decomposition& decomposition, const Tensor& signal, const Tensor& noise,
                      double k_norm, BumpKind bump = BumpKind::cubic, Direction direction = Direction::low_to_high);

/// Coefficient-space conditional velocity. Rejects an exact band boundary when
/// the bump is linear, since the path has a kink there.
Tensor conditional_velocity(const kamp::Decomposition& decomposition, const Tensor& signal, const Tensor& noise,
                            double k_norm, BumpKind bump = BumpKind::cubic,
                            Direction direction = Direction::low_to_high);

}  // namespace kflow::interpolant
