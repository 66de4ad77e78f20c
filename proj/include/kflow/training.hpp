#pragma once

// Conditional flow-matching training over scale time, and checkpoints.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "kflow/interpolant.hpp"
#include "kflow/kamp.hpp"
#include "kflow/model.hpp"
#include "kflow/random.hpp"

namespace kflow::training {

struct TrainConfig {
  kamp::TransformKind transform = kamp::TransformKind::pca;
  wavelet::Family wavelet_family = wavelet::Family::db6;
  std::size_t wavelet_levels = 0;
  kamp::PartitionStrategy strategy = kamp::PartitionStrategy::uniform_radius;
  std::size_t bands = 2;

  interpolant::BumpKind bump = interpolant::BumpKind::cubic;
  interpolant::Direction direction = interpolant::Direction::low_to_high;

  model::ModelConfig model;  ///< coeff_size and label_vocab are filled in by train()
  std::size_t batch_size = 64;
  std::size_t steps = 1000;
  model::AdamConfig adam;
  std::uint64_t seed = 0;
  bool label_conditioning = false;
  double label_drop = 0.1;
  std::size_t checkpoint_every = 0;  ///< 0 disables intermediate checkpoints
  std::size_t log_every = 100;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct LossRecord {
  std::size_t step;
  double loss;     ///< mean batch loss since the previous record
  double wall_ms;  ///< elapsed time; not stored in checkpoints
};

struct Checkpoint {
  model::VectorFieldModel model;
  kamp::Decomposition decomposition;
  TrainConfig config;
  std::size_t step = 0;
  std::vector<LossRecord> log;  ///< tail of the loss log
};

/// Fits the configured transform (PCA needs the dataset) and its partition.
kamp::Decomposition fit_decomposition(const TrainConfig& config, std::span<const Tensor> dataset);

/// Raw scale-time draw, uniform on [0, 1).
double sample_scale_time(SeededRng& rng);

/// Builds one CFM batch: per sample a scale time k whose local band time lies in
/// (0.01, 0.99) (redrawn otherwise), a standard normal noise vector, the
/// interpolant state as input and the conditional velocity as target.
model::TrainingBatch build_cfm_batch(const interpolant::Path& path, std::span<const std::vector<double>> data_coeffs,
                                     std::span<const std::optional<std::size_t>> labels, SeededRng& rng);

model::LossAndGradient cfm_loss_batch(const model::VectorFieldModel& model, const interpolant::Path& path,
                                      std::span<const std::vector<double>> data_coeffs,
                                      std::span<const std::optional<std::size_t>> labels, SeededRng& rng);

struct TrainHooks {
  std::function<void(const LossRecord&)> on_log;
  std::function<void(const Checkpoint&)> on_checkpoint;
};

/// Runs the loop. Labels are used when `config.label_conditioning` is set;
/// each is replaced by the null label with probability `label_drop`.
/// Throws NumericError if the loss becomes non-finite.
Checkpoint train(std::span<const Tensor> dataset, std::span<const std::size_t> labels, const TrainConfig& config,
                 const TrainHooks& hooks = {});
/// Continues from an already fitted decomposition.
Checkpoint train(std::span<const Tensor> dataset, std::span<const std::size_t> labels, const TrainConfig& config,
                 kamp::Decomposition decomposition, const TrainHooks& hooks = {});

/// Model parameters and PCA bases are stored as f64, so round trips are exact.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// A fitted decomposition on its own (fit-transform output).
void save_decomposition(const kamp::Decomposition& decomposition, const std::filesystem::path& path);
kamp::Decomposition load_decomposition(const std::filesystem::path& path);

}  // namespace kflow::training
