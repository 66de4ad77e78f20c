#include <cmath>

#include "kflow/error.hpp"
#include "kflow/kamp.hpp"

namespace kflow::kamp {

bool KAmplitudeRepresentation::complete() const {
  if (!partition || coefficients.size() != partition->size()) return false;
  for (bool p : present)
    if (!p) return false;
  return true;
}

Decomposition::Decomposition(Transform transform, ScalePartition partition)
    : transform_(std::move(transform)), partition_(std::make_shared<const ScalePartition>(std::move(partition))) {
  if (partition_->size() != transform_.size())
    throw ShapeError("partition covers " + std::to_string(partition_->size()) + " coefficients but transform " +
                     transform_.id() + " has " + std::to_string(transform_.size()));
}

KAmplitudeRepresentation Decomposition::forward(const Tensor& signal) const {
  auto coeffs = transform_.forward(signal);
  const std::size_t n = coeffs.size();
  return {Tensor({n}, std::move(coeffs)), partition_, transform_.id(), {}};
}

Tensor Decomposition::inverse(const KAmplitudeRepresentation& repr) const {
  if (repr.coefficients.size() != transform_.size())
    throw ShapeError("representation has " + std::to_string(repr.coefficients.size()) +
                     " coefficients, transform expects " + std::to_string(transform_.size()));
  if (!repr.complete())
    throw ValueError("cannot invert a partial representation; mask bands through the interpolant instead");
  if (repr.transform_id != transform_.id())
    throw ValueError("representation was produced by transform " + repr.transform_id + ", not " + transform_.id());
  return transform_.inverse(repr.coefficients.data());
}

Tensor Decomposition::band_project(const Tensor& signal, std::size_t band) const {
  if (band >= band_count())
    throw ValueError("band id " + std::to_string(band) + " out of range [0, " + std::to_string(band_count()) + ")");
  auto coeffs = transform_.forward(signal);
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (partition_->band_of(i) != band) coeffs[i] = 0.0;
  Tensor out = transform_.inverse(coeffs);
  // The PCA mean is attributed to band 0 so that the projections sum to the signal.
  if (const PcaBasis* basis = transform_.pca_basis(); basis && band != 0)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= basis->mean[i];
  return out;
}

BandSpectrum Decomposition::amplitude_spectrum(std::span<const Tensor> dataset) const {
  if (dataset.empty()) throw ValueError("amplitude_spectrum needs a nonempty dataset");
  const std::size_t S = band_count();
  BandSpectrum out;
  out.band_norm.assign(S, 0.0);
  out.per_coefficient.assign(S, 0.0);
  out.band_sizes.assign(S, 0);
  for (std::size_t i = 0; i < partition_->size(); ++i) ++out.band_sizes[partition_->band_of(i)];
  std::vector<double> energy(S);
  for (const Tensor& x : dataset) {
    const auto coeffs = transform_.forward(x);
    std::fill(energy.begin(), energy.end(), 0.0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) energy[partition_->band_of(i)] += coeffs[i] * coeffs[i];
    for (std::size_t s = 0; s < S; ++s) out.band_norm[s] += std::sqrt(energy[s]);
  }
  for (std::size_t s = 0; s < S; ++s) {
    out.band_norm[s] /= static_cast<double>(dataset.size());
    out.per_coefficient[s] = out.band_norm[s] / std::sqrt(static_cast<double>(out.band_sizes[s]));
  }
  return out;
}

}  // namespace kflow::kamp
