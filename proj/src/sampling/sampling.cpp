#include "kflow/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "kflow/error.hpp"

namespace kflow::sampling {

std::string_view integrator_name(Integrator i) noexcept { return i == Integrator::euler ? "euler" : "heun"; }

Integrator parse_integrator(std::string_view name) {
  if (name == "euler") return Integrator::euler;
  if (name == "heun") return Integrator::heun;
  throw ValueError("unknown integrator '" + std::string(name) + "' (expected euler or heun)");
}

void SamplerConfig::validate() const {
  if (steps < 1) throw ValueError("sampler needs at least one step");
  if (!(guidance >= 0.0)) throw ValueError("guidance scale must be nonnegative");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ValueError("condition-keep fraction rho must lie in [0, 1]");
}

namespace {

void check_finite(std::span<const double> x, std::size_t step) {
  for (double v : x)
    if (!std::isfinite(v)) throw NumericError("sampler state became non-finite at step " + std::to_string(step));
}

// Runs fn(i) for i in [0, count) on up to `threads` workers; rethrows the first failure.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<double> integrate_field(const VelocityField& field, std::span<const double> x0, std::size_t steps,
                                    Integrator integrator, Trajectory* trajectory) {
  if (steps < 1) throw ValueError("sampler needs at least one step");
  const std::size_t n = x0.size();
  std::vector<double> x(x0.begin(), x0.end()), v1(n), v2(n), trial(n);
  const double h = 1.0 / static_cast<double>(steps);
  if (trajectory) {
    trajectory->clear();
    trajectory->push_back(x);
  }
  for (std::size_t i = 0; i < steps; ++i) {
    const double k0 = static_cast<double>(i) / static_cast<double>(steps);
    const double k1 = static_cast<double>(i + 1) / static_cast<double>(steps);
    field(x, k0, v1);
    if (integrator == Integrator::euler) {
      for (std::size_t j = 0; j < n; ++j) x[j] += h * v1[j];
    } else {
      for (std::size_t j = 0; j < n; ++j) trial[j] = x[j] + h * v1[j];
      field(trial, k1, v2);
      for (std::size_t j = 0; j < n; ++j) x[j] += 0.5 * h * (v1[j] + v2[j]);
    }
    check_finite(x, i);
    if (trajectory) trajectory->push_back(x);
  }
  return x;
}

std::vector<double> guided_velocity(const model::VectorFieldModel& model, std::span<const double> psi, double k,
                                    std::size_t label, double guidance, double rho) {
  if (!model.conditional()) throw ValueError("guided sampling needs a label-conditioned model");
  std::vector<double> v_null = model.eval(psi, k, std::nullopt);
  if (k > rho) return v_null;
  const std::vector<double> v_label = model.eval(psi, k, label);
  for (std::size_t i = 0; i < v_null.size(); ++i) v_null[i] = (1.0 - guidance) * v_null[i] + guidance * v_label[i];
  return v_null;
}

VelocityField model_field(const model::VectorFieldModel& model, std::optional<std::size_t> label, double guidance,
                          double rho) {
  if (label && !model.conditional()) throw ValueError("label given to an unconditional model");
  if (!label)
    return [&model](std::span<const double> psi, double k, std::span<double> out) {
      const double ks[1] = {k};
      model.eval(psi, ks, {}, out);
    };
  return [&model, l = *label, guidance, rho](std::span<const double> psi, double k, std::span<double> out) {
    const auto v = guided_velocity(model, psi, k, l, guidance, rho);
    std::copy(v.begin(), v.end(), out.begin());
  };
}

std::vector<double> integrate_coefficients(const training::Checkpoint& checkpoint, std::span<const double> noise,
                                           const SamplerConfig& config, std::optional<std::size_t> label,
                                           Trajectory* trajectory) {
  config.validate();
  if (config.direction != checkpoint.config.direction)
    throw ValueError(std::string("sampler direction ") + std::string(interpolant::direction_name(config.direction)) +
                     " does not match the checkpoint, which was trained " +
                     std::string(interpolant::direction_name(checkpoint.config.direction)));
  if (noise.size() != checkpoint.decomposition.size())
    throw ShapeError("noise has " + std::to_string(noise.size()) + " coefficients, model expects " +
                     std::to_string(checkpoint.decomposition.size()));
  return integrate_field(model_field(checkpoint.model, label, config.guidance, config.rho), noise, config.steps,
                         config.integrator, trajectory);
}

Tensor integrate(const training::Checkpoint& checkpoint, const interpolant::NoiseDraw& noise,
                 const SamplerConfig& config, std::optional<std::size_t> label) {
  return checkpoint.decomposition.inverse(integrate_coefficients(checkpoint, noise.coefficients.data(), config, label));
}

std::vector<Tensor> sample_batch(const training::Checkpoint& checkpoint, std::size_t count,
                                 const SamplerConfig& config, std::span<const std::optional<std::size_t>> labels,
                                 std::size_t threads) {
  if (!labels.empty() && labels.size() != count) throw ShapeError("need one label per sample");
  config.validate();
  std::vector<Tensor> out(count);
  const std::size_t n = checkpoint.decomposition.size();
  parallel_for(count, threads, [&](std::size_t i) {
    const auto noise = interpolant::draw_noise(n, config.seed, i);
    out[i] = integrate(checkpoint, noise, config, labels.empty() ? std::nullopt : labels[i]);
  });
  return out;
}

void EditSpec::validate(std::size_t band_count) const {
  if (count < 1) throw ValueError("edit group needs at least one sample");
  std::vector<int> seen(band_count, 0);
  auto mark = [&](const std::vector<std::size_t>& set) {
    for (std::size_t b : set) {
      if (b >= band_count)
        throw ValueError("band " + std::to_string(b) + " does not exist (" + std::to_string(band_count) + " bands)");
      if (seen[b]++) throw ValueError("band " + std::to_string(b) + " is both shared and resampled");
    }
  };
  mark(shared_bands);
  mark(resampled_bands);
  for (std::size_t b = 0; b < band_count; ++b)
    if (!seen[b]) throw ValueError("band " + std::to_string(b) + " is neither shared nor resampled");
}

std::vector<std::size_t> parse_band_set(std::string_view text, std::size_t band_count) {
  const std::size_t low = (band_count + 1) / 2;
  std::vector<std::size_t> out;
  if (text == "none") return out;
  if (text == "all" || text == "low" || text == "high") {
    const std::size_t first = text == "high" ? low : 0;
    const std::size_t last = text == "low" ? low : band_count;
    for (std::size_t b = first; b < last; ++b) out.push_back(b);
    return out;
  }
  while (!text.empty()) {
    const std::size_t comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    std::size_t b = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), b);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty())
      throw ValueError("band set '" + std::string(text) + "' is not low, high, all, none or a comma list of ids");
    if (b >= band_count)
      throw ValueError("band " + std::to_string(b) + " does not exist (" + std::to_string(band_count) + " bands)");
    if (std::find(out.begin(), out.end(), b) == out.end()) out.push_back(b);
    text = comma == std::string_view::npos ? std::string_view() : text.substr(comma + 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

EditSpec make_edit_spec(std::vector<std::size_t> shared_bands, std::size_t band_count, std::size_t count,
                        std::uint64_t seed) {
  EditSpec spec;
  spec.count = count;
  spec.seed = seed;
  for (std::size_t b = 0; b < band_count; ++b)
    if (std::find(shared_bands.begin(), shared_bands.end(), b) == shared_bands.end())
      spec.resampled_bands.push_back(b);
  spec.shared_bands = std::move(shared_bands);
  spec.validate(band_count);
  return spec;
}

std::vector<std::vector<double>> edit_initial_states(const kamp::ScalePartition& partition, const EditSpec& spec) {
  spec.validate(partition.band_count());
  const std::size_t n = partition.size();
  std::vector<bool> shared(partition.band_count(), false);
  for (std::size_t b : spec.shared_bands) shared[b] = true;
  const auto common = interpolant::draw_noise(n, spec.seed, 0);
  std::vector<std::vector<double>> states;
  for (std::size_t j = 0; j < spec.count; ++j) {
    const auto own = interpolant::draw_noise(n, spec.seed, j + 1);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = shared[partition.band_of(i)] ? common.coefficients[i] : own.coefficients[i];
    states.push_back(std::move(x));
  }
  return states;
}

std::vector<Tensor> edit_generate(const training::Checkpoint& checkpoint, const EditSpec& spec,
                                  const SamplerConfig& config, std::optional<std::size_t> label, std::size_t threads) {
  const auto starts = edit_initial_states(checkpoint.decomposition.partition(), spec);
  std::vector<Tensor> out(starts.size());
  parallel_for(starts.size(), threads, [&](std::size_t j) {
    out[j] = checkpoint.decomposition.inverse(integrate_coefficients(checkpoint, starts[j], config, label));
  });
  return out;
}

std::vector<double> conditional_oracle_coefficients(const interpolant::Path& path, std::span<const double> data,
                                                    std::span<const double> noise, std::size_t steps,
                                                    Trajectory* trajectory) {
  if (data.size() != path.size() || noise.size() != path.size())
    throw ShapeError("oracle expects " + std::to_string(path.size()) + " coefficients");
  const VelocityField field = [&](std::span<const double>, double k, std::span<double> out) {
    path.velocity(data, noise, k, out);
  };
  return integrate_field(field, noise, steps, Integrator::euler, trajectory);
}

Tensor conditional_oracle_integrate(const kamp::Decomposition& decomposition, const Tensor& signal,
                                    const Tensor& noise, std::size_t steps, interpolant::BumpKind bump,
                                    interpolant::Direction direction) {
  const interpolant::Path path(decomposition.partition(), bump, direction);
  const auto data = decomposition.transform().forward(signal);
  return decomposition.inverse(conditional_oracle_coefficients(path, data, noise.data(), steps));
}

}  // namespace kflow::sampling
