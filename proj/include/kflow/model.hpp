#pragma once

// Velocity network v(psi, k, label) over K-amplitude coefficients.
//
// A multilayer perceptron whose input is the coefficient vector concatenated
// with a sinusoidal embedding of the scale time k and, for conditional models,
// a learned label embedding. Every hidden layer also receives an additive
// projection of the scale embedding:
//
//   h_0 = [psi, e(k), l(c)]
//   h_i = act(W_i h_{i-1} + b_i + M_i e(k))     i = 1..depth
//   v   = W_out h_depth + b_out
//
// Label id `label_vocab` is the null label used for unconditional evaluation
// and for classifier-free guidance.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kflow/tensor.hpp"

namespace kflow::model {

enum class Activation { silu, tanh };

std::string_view activation_name(Activation a) noexcept;
Activation parse_activation(std::string_view name);

struct ModelConfig {
  std::size_t coeff_size = 0;
  std::size_t hidden = 256;
  std::size_t depth = 3;
  std::size_t scale_embed_dim = 16;
  double max_frequency = 100.0;
  std::size_t label_vocab = 0;  ///< 0 for an unconditional model
  std::size_t label_embed_dim = 8;
  Activation activation = Activation::silu;

  std::size_t input_width() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// [sin(w_j k)..., cos(w_j k)...] with w_j geometric from 1 to max_frequency.
Tensor embed_scale(double k_norm, std::size_t dim, double max_frequency = 100.0);

struct ParamView {
  std::string name;
  std::size_t offset;
  Shape shape;
  friend bool operator==(const ParamView&, const ParamView&) = default;
};

/// Labels in a batch: one id per sample, nullopt for the null label.
using LabelSpan = std::span<const std::optional<std::size_t>>;

struct TrainingBatch;
struct LossAndGradient;

class VectorFieldModel {
 public:
  /// Hidden weights ~ N(0, 1/fan_in), biases and the output head zero.
  static VectorFieldModel init(const ModelConfig& config, std::uint64_t seed);
  VectorFieldModel(ModelConfig config, std::vector<double> parameters);

  const ModelConfig& config() const noexcept { return config_; }
  bool conditional() const noexcept { return config_.label_vocab > 0; }
  std::size_t null_label() const noexcept { return config_.label_vocab; }

  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> parameters() noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  const std::vector<ParamView>& layout() const noexcept { return layout_; }
  std::span<double> parameter(std::string_view name);
  std::span<const double> parameter(std::string_view name) const;

  /// Batched evaluation. `psi` and `out` are [batch, coeff_size] row-major;
  /// `labels` is empty (all null) or one entry per sample.
  void eval(std::span<const double> psi, std::span<const double> k, LabelSpan labels, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> psi, double k, std::optional<std::size_t> label = {}) const;

  friend bool operator==(const VectorFieldModel&, const VectorFieldModel&) = default;

 private:
  friend LossAndGradient vf_grad(const VectorFieldModel&, const TrainingBatch&);
  friend double vf_loss(const VectorFieldModel&, const TrainingBatch&);
  /// Mean squared error over the batch; accumulates gradients when `grad` is nonempty.
  double backprop(const TrainingBatch& batch, std::span<double> grad) const;
  void build_layout();
  std::size_t label_row(std::optional<std::size_t> label) const;

  ModelConfig config_;
  std::vector<double> params_;
  std::vector<ParamView> layout_;
};

/// One gradient tensor per parameter tensor, stored flat in the model's layout.
struct GradientSet {
  std::vector<double> values;
  std::span<const double> view(const VectorFieldModel& model, std::string_view name) const;
};

struct TrainingBatch {
  std::vector<double> psi;     ///< [batch, n]
  std::vector<double> k;       ///< [batch]
  std::vector<std::optional<std::size_t>> labels;  ///< empty or [batch]
  std::vector<double> target;  ///< [batch, n]

  std::size_t batch_size() const noexcept { return k.size(); }
};

struct LossAndGradient {
  double loss;
  GradientSet gradient;
};

/// loss = mean over the batch of ||v(psi_i, k_i, c_i) - target_i||^2 with exact reverse-mode gradients.
LossAndGradient vf_grad(const VectorFieldModel& model, const TrainingBatch& batch);
/// Loss only.
double vf_loss(const VectorFieldModel& model, const TrainingBatch& batch);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// Bias-corrected adaptive-moment update of `params` in place.
void optimizer_step(AdamState& state, std::span<double> params, const GradientSet& grads, const AdamConfig& config);

}  // namespace kflow::model
