#include "kflow/error.hpp"
#include "kflow/kamp.hpp"
#include "kflow/linalg.hpp"
#include "kflow/simd/kernels.hpp"

namespace kflow::kamp {

std::vector<double> PcaBasis::project(std::span<const double> x) const {
  const std::size_t d = dimension(), m = count();
  if (x.size() != d) throw ShapeError("PCA projection expects " + std::to_string(d) + " values");
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double c = x[i] - mean[i];
    for (std::size_t j = 0; j < m; ++j) out[j] += components.at(i, j) * c;
  }
  return out;
}

std::vector<double> PcaBasis::reconstruct(std::span<const double> coeffs) const {
  const std::size_t d = dimension(), m = count();
  if (coeffs.size() != m) throw ShapeError("PCA reconstruction expects " + std::to_string(m) + " coefficients");
  std::vector<double> out(mean.data().begin(), mean.data().end());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i] += components.at(i, j) * coeffs[j];
  return out;
}

PcaBasis pca_fit(std::span<const Tensor> dataset, std::size_t n_components) {
  if (dataset.size() < 2) throw ValueError("pca_fit needs at least 2 samples, got " + std::to_string(dataset.size()));
  const std::size_t d = dataset.front().size();
  if (n_components == 0 || n_components > d)
    throw ValueError("pca_fit: n_components " + std::to_string(n_components) + " outside [1, " + std::to_string(d) + "]");
  std::vector<double> mean(d, 0.0);
  for (const Tensor& x : dataset) {
    if (x.size() != d) throw ShapeError("pca_fit: samples have different sizes");
    simd::axpy(1.0, x.data().data(), mean.data(), d);
  }
  for (double& m : mean) m /= static_cast<double>(dataset.size());

  Tensor cov({d, d});
  std::vector<double> centered(d);
  for (const Tensor& x : dataset) {
    for (std::size_t i = 0; i < d; ++i) centered[i] = x[i] - mean[i];
    for (std::size_t i = 0; i < d; ++i) simd::axpy(centered[i], centered.data(), &cov.values()[i * d], d);
  }
  const double norm = 1.0 / static_cast<double>(dataset.size() - 1);
  for (double& v : cov.values()) v *= norm;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) cov.at(j, i) = cov.at(i, j);

  SymmetricEigen eig = eigh_symmetric(cov);
  PcaBasis basis;
  basis.mean = Tensor({d}, std::move(mean));
  basis.components = Tensor({d, n_components});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < n_components; ++j) basis.components.at(i, j) = eig.vectors.at(i, j);
  basis.variances.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(n_components));
  return basis;
}

}  // namespace kflow::kamp
