#pragma once

// Experiment configuration read from TOML.
//
//   seed = 7
//   [data]      kind, count, classes, size, beta
//   [transform] kind, wavelet, levels, bands, strategy
//   [model]     hidden, depth, scale_embed_dim, max_frequency, label_embed_dim, activation
//   [train]     steps, batch_size, lr, beta1, beta2, eps, bump, direction,
//               label_conditioning, label_drop, checkpoint_every, log_every
//   [sample]    steps, integrator, guidance, rho
//   [metrics]   feature, feature_dim, knn
//
// Unknown tables or keys are rejected.

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "kflow/data.hpp"
#include "kflow/metrics.hpp"
#include "kflow/sampling.hpp"
#include "kflow/training.hpp"

namespace kflow::cli {

struct MetricsConfig {
  metrics::FeatureKind feature = metrics::FeatureKind::identity;
  std::size_t feature_dim = 8;
  std::size_t knn = 3;
};

struct ExperimentConfig {
  std::optional<std::uint64_t> seed;
  data::DatasetSpec data;
  training::TrainConfig train;
  sampling::SamplerConfig sample;
  MetricsConfig metrics;
};

/// The defaults used when no file is given; the model is smaller than the
/// library default so toy runs finish quickly.
ExperimentConfig default_config();

/// Overlays the values present in a TOML file onto `config`.
void load_config(const std::filesystem::path& path, ExperimentConfig& config);
void apply_toml(std::string_view text, ExperimentConfig& config, const std::string& source = "<string>");

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace kflow::cli
