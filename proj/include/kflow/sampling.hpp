#pragma once

// ODE sampling of a trained field, guidance, editing, and the conditional-path oracle.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kflow/interpolant.hpp"
#include "kflow/training.hpp"

namespace kflow::sampling {

enum class Integrator { euler, heun };

std::string_view integrator_name(Integrator i) noexcept;
Integrator parse_integrator(std::string_view name);

struct SamplerConfig {
  std::size_t steps = 250;
  Integrator integrator = Integrator::heun;
  interpolant::Direction direction = interpolant::Direction::low_to_high;
  double guidance = 1.0;  ///< classifier-free guidance scale
  double rho = 1.0;       ///< labels are dropped for k > rho
  std::uint64_t seed = 0;

  void validate() const;
};

/// v(psi, k) written into `out`.
using VelocityField = std::function<void(std::span<const double> psi, double k, std::span<double> out)>;
using Trajectory = std::vector<std::vector<double>>;

/// Fixed-step integration from k = 0 to k = 1 on the nodes k_i = i / steps.
/// When `trajectory` is given it receives the state at every node.
std::vector<double> integrate_field(const VelocityField& field, std::span<const double> x0, std::size_t steps,
                                    Integrator integrator, Trajectory* trajectory = nullptr);

/// For k > rho the null-label velocity; otherwise (1 - s) v_null + s v_label,
/// which is v_null at s = 0 and v_label at s = 1 exactly.
std::vector<double> guided_velocity(const model::VectorFieldModel& model, std::span<const double> psi, double k,
                                    std::size_t label, double guidance, double rho);

/// The velocity field a sampler follows: plain null-label evaluation without a
/// label, guided evaluation with one.
VelocityField model_field(const model::VectorFieldModel& model, std::optional<std::size_t> label, double guidance,
                          double rho);

/// Integrates from the noise draw and returns coefficients. The sampler
/// direction must match the direction the checkpoint was trained with.
std::vector<double> integrate_coefficients(const training::Checkpoint& checkpoint, std::span<const double> noise,
                                           const SamplerConfig& config, std::optional<std::size_t> label = {},
                                           Trajectory* trajectory = nullptr);

Tensor integrate(const training::Checkpoint& checkpoint, const interpolant::NoiseDraw& noise,
                 const SamplerConfig& config, std::optional<std::size_t> label = {});

/// Sample i starts from draw_noise(n, config.seed, i). `labels` is empty or one per sample.
std::vector<Tensor> sample_batch(const training::Checkpoint& checkpoint, std::size_t count,
                                 const SamplerConfig& config, std::span<const std::optional<std::size_t>> labels = {},
                                 std::size_t threads = 1);

struct EditSpec {
  std::vector<std::size_t> shared_bands;
  std::vector<std::size_t> resampled_bands;
  std::size_t count = 1;
  std::uint64_t seed = 0;

  /// Throws unless the two sets are disjoint and together cover all bands.
  void validate(std::size_t band_count) const;
};

/// "low" (first ceil(S/2) bands), "high" (the rest), "all", "none", or a comma list of ids.
std::vector<std::size_t> parse_band_set(std::string_view text, std::size_t band_count);

/// Shared set as given, resampled set = its complement.
EditSpec make_edit_spec(std::vector<std::size_t> shared_bands, std::size_t band_count, std::size_t count,
                        std::uint64_t seed);

/// Initial coefficient states of an edit group: draw_noise(n, seed, 0) on the
/// shared bands, draw_noise(n, seed, j + 1) on the resampled bands of sample j.
std::vector<std::vector<double>> edit_initial_states(const kamp::ScalePartition& partition, const EditSpec& spec);

std::vector<Tensor> edit_generate(const training::Checkpoint& checkpoint, const EditSpec& spec,
                                  const SamplerConfig& config, std::optional<std::size_t> label = {},
                                  std::size_t threads = 1);

/// Euler integration of the analytic conditional velocity starting from the
/// noise coefficients; the result approaches the data coefficients as steps grow.
std::vector<double> conditional_oracle_coefficients(const interpolant::Path& path, std::span<const double> data,
                                                    std::span<const double> noise, std::size_t steps,
                                                    Trajectory* trajectory = nullptr);

Tensor conditional_oracle_integrate(const kamp::Decomposition& decomposition, const Tensor& signal,
                                    const Tensor& noise, std::size_t steps,
                                    interpolant::BumpKind bump = interpolant::BumpKind::cubic,
                                    interpolant::Direction direction = interpolant::Direction::low_to_high);

}  // namespace kflow::sampling
