#include "kflow/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "kflow/error.hpp"

namespace kflow::training {

void TrainConfig::validate() const {
  if (bands < 1) throw ValueError("band count must be at least 1");
  if (batch_size < 1) throw ValueError("batch size must be at least 1");
  if (!(label_drop >= 0.0 && label_drop <= 1.0)) throw ValueError("label drop probability must lie in [0, 1]");
  if (!(adam.lr > 0.0)) throw ValueError("learning rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ValueError("Adam moment decay rates must lie in [0, 1)");
  if (!(adam.eps > 0.0)) throw ValueError("Adam epsilon must be positive");
  if (model.hidden < 1 || model.depth < 1) throw ValueError("model width and depth must be positive");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {
      {"transform", kamp::kind_name(c.transform)},
      {"wavelet", wavelet::family_name(c.wavelet_family)},
      {"wavelet_levels", c.wavelet_levels},
      {"strategy", kamp::strategy_name(c.strategy)},
      {"bands", c.bands},
      {"bump", interpolant::bump_name(c.bump)},
      {"direction", interpolant::direction_name(c.direction)},
      {"model",
       {{"coeff_size", c.model.coeff_size},
        {"hidden", c.model.hidden},
        {"depth", c.model.depth},
        {"scale_embed_dim", c.model.scale_embed_dim},
        {"max_frequency", c.model.max_frequency},
        {"label_vocab", c.model.label_vocab},
        {"label_embed_dim", c.model.label_embed_dim},
        {"activation", model::activation_name(c.model.activation)}}},
      {"batch_size", c.batch_size},
      {"steps", c.steps},
      {"lr", c.adam.lr},
      {"beta1", c.adam.beta1},
      {"beta2", c.adam.beta2},
      {"eps", c.adam.eps},
      {"seed", c.seed},
      {"label_conditioning", c.label_conditioning},
      {"label_drop", c.label_drop},
      {"checkpoint_every", c.checkpoint_every},
      {"log_every", c.log_every},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.transform = kamp::parse_kind(j.at("transform").get<std::string>());
    c.wavelet_family = wavelet::parse_family(j.at("wavelet").get<std::string>());
    c.wavelet_levels = j.at("wavelet_levels").get<std::size_t>();
    c.strategy = kamp::parse_strategy(j.at("strategy").get<std::string>());
    c.bands = j.at("bands").get<std::size_t>();
    c.bump = interpolant::parse_bump(j.at("bump").get<std::string>());
    c.direction = interpolant::parse_direction(j.at("direction").get<std::string>());
    const auto& m = j.at("model");
    c.model.coeff_size = m.at("coeff_size").get<std::size_t>();
    c.model.hidden = m.at("hidden").get<std::size_t>();
    c.model.depth = m.at("depth").get<std::size_t>();
    c.model.scale_embed_dim = m.at("scale_embed_dim").get<std::size_t>();
    c.model.max_frequency = m.at("max_frequency").get<double>();
    c.model.label_vocab = m.at("label_vocab").get<std::size_t>();
    c.model.label_embed_dim = m.at("label_embed_dim").get<std::size_t>();
    c.model.activation = model::parse_activation(m.at("activation").get<std::string>());
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.steps = j.at("steps").get<std::size_t>();
    c.adam.lr = j.at("lr").get<double>();
    c.adam.beta1 = j.at("beta1").get<double>();
    c.adam.beta2 = j.at("beta2").get<double>();
    c.adam.eps = j.at("eps").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.label_conditioning = j.at("label_conditioning").get<bool>();
    c.label_drop = j.at("label_drop").get<double>();
    c.checkpoint_every = j.at("checkpoint_every").get<std::size_t>();
    c.log_every = j.at("log_every").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed training config: ") + e.what());
  }
  return c;
}

kamp::Decomposition fit_decomposition(const TrainConfig& config, std::span<const Tensor> dataset) {
  if (dataset.empty()) throw ValueError("cannot fit a transform on an empty dataset");
  const Shape& shape = dataset.front().shape();
  for (const Tensor& t : dataset)
    if (t.shape() != shape)
      throw ShapeError("dataset mixes shapes " + shape_string(shape) + " and " + shape_string(t.shape()));
  auto make = [&]() {
    switch (config.transform) {
      case kamp::TransformKind::fourier: return kamp::Transform::fourier(shape);
      case kamp::TransformKind::wavelet:
        return kamp::Transform::wavelet(shape, config.wavelet_family, config.wavelet_levels);
      case kamp::TransformKind::pca: break;
    }
    return kamp::Transform::pca(kamp::pca_fit(dataset, shape_size(shape)), shape);
  };
  kamp::Transform transform = make();
  kamp::ScalePartition partition = kamp::make_partition(transform, config.bands, config.strategy, dataset);
  return kamp::Decomposition(std::move(transform), std::move(partition));
}

double sample_scale_time(SeededRng& rng) { return rng.uniform(); }

model::TrainingBatch build_cfm_batch(const interpolant::Path& path, std::span<const std::vector<double>> data_coeffs,
                                     std::span<const std::optional<std::size_t>> labels, SeededRng& rng) {
  if (data_coeffs.empty()) throw ValueError("empty training batch");
  if (!labels.empty() && labels.size() != data_coeffs.size())
    throw ShapeError("label count does not match batch size");
  const std::size_t n = path.size(), B = data_coeffs.size();
  model::TrainingBatch batch;
  batch.psi.resize(B * n);
  batch.target.resize(B * n);
  batch.k.resize(B);
  batch.labels.assign(labels.begin(), labels.end());
  std::vector<double> noise(n);
  for (std::size_t s = 0; s < B; ++s) {
    if (data_coeffs[s].size() != n)
      throw ShapeError("sample has " + std::to_string(data_coeffs[s].size()) + " coefficients, transform has " +
                       std::to_string(n));
    double k = sample_scale_time(rng);
    for (double t = path.coordinate(k).t; !(t > 0.01 && t < 0.99); t = path.coordinate(k).t)
      k = sample_scale_time(rng);
    for (double& e : noise) e = rng.normal();
    batch.k[s] = k;
    path.state(data_coeffs[s], noise, k, std::span(batch.psi).subspan(s * n, n));
    path.velocity(data_coeffs[s], noise, k, std::span(batch.target).subspan(s * n, n));
  }
  return batch;
}

model::LossAndGradient cfm_loss_batch(const model::VectorFieldModel& model, const interpolant::Path& path,
                                      std::span<const std::vector<double>> data_coeffs,
                                      std::span<const std::optional<std::size_t>> labels, SeededRng& rng) {
  return model::vf_grad(model, build_cfm_batch(path, data_coeffs, labels, rng));
}

Checkpoint train(std::span<const Tensor> dataset, std::span<const std::size_t> labels, const TrainConfig& config,
                 const TrainHooks& hooks) {
  config.validate();
  return train(dataset, labels, config, fit_decomposition(config, dataset), hooks);
}

Checkpoint train(std::span<const Tensor> dataset, std::span<const std::size_t> labels, const TrainConfig& config,
                 kamp::Decomposition decomposition, const TrainHooks& hooks) {
  config.validate();
  if (dataset.empty()) throw ValueError("training dataset is empty");
  if (config.label_conditioning && labels.size() != dataset.size())
    throw ShapeError("label conditioning needs one label per sample (" + std::to_string(dataset.size()) +
                     " samples, " + std::to_string(labels.size()) + " labels)");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<std::vector<double>> coeffs;
  coeffs.reserve(dataset.size());
  for (const Tensor& x : dataset) {
    if (x.shape() != decomposition.transform().signal_shape())
      throw ShapeError("sample shape " + shape_string(x.shape()) + " does not match the transform's " +
                       shape_string(decomposition.transform().signal_shape()));
    coeffs.push_back(decomposition.transform().forward(x));
  }

  TrainConfig cfg = config;
  cfg.model.coeff_size = decomposition.size();
  cfg.model.label_vocab = 0;
  if (cfg.label_conditioning) cfg.model.label_vocab = *std::max_element(labels.begin(), labels.end()) + 1;

  Checkpoint ck{model::VectorFieldModel::init(cfg.model, cfg.seed), std::move(decomposition), cfg, 0, {}};
  const interpolant::Path path(ck.decomposition.partition(), cfg.bump, cfg.direction);
  SeededRng rng(cfg.seed, 1);
  model::AdamState adam(ck.model.parameter_count());

  std::vector<std::vector<double>> batch(cfg.batch_size);
  std::vector<std::optional<std::size_t>> batch_labels(cfg.label_conditioning ? cfg.batch_size : 0);
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const std::size_t i = rng.below(coeffs.size());
      batch[b] = coeffs[i];
      if (cfg.label_conditioning)
        batch_labels[b] = rng.uniform() < cfg.label_drop ? std::nullopt : std::optional<std::size_t>(labels[i]);
    }
    const model::LossAndGradient lg = cfm_loss_batch(ck.model, path, batch, batch_labels, rng);
    if (!std::isfinite(lg.loss))
      throw NumericError("training diverged at step " + std::to_string(step) + ": loss is " +
                         std::to_string(lg.loss) + " (learning rate " + std::to_string(cfg.adam.lr) + ")");
    model::optimizer_step(adam, ck.model.parameters(), lg.gradient, cfg.adam);
    ck.step = step;
    loss_sum += lg.loss;
    ++loss_count;
    if ((cfg.log_every > 0 && step % cfg.log_every == 0) || step == cfg.steps) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      const LossRecord rec{step, loss_sum / static_cast<double>(loss_count), ms};
      ck.log.push_back(rec);
      if (hooks.on_log) hooks.on_log(rec);
      loss_sum = 0.0;
      loss_count = 0;
    }
    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0 && hooks.on_checkpoint) hooks.on_checkpoint(ck);
  }
  return ck;
}

}  // namespace kflow::training
