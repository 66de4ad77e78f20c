#pragma once

// Sample-quality and trajectory metrics.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kflow/kamp.hpp"
#include "kflow/sampling.hpp"
#include "kflow/tensor.hpp"

namespace kflow::metrics {

enum class FeatureKind { identity, pca, random_projection };

std::string_view feature_name(FeatureKind kind) noexcept;
FeatureKind parse_feature(std::string_view name);

/// Deterministic map from samples to feature vectors (stand-in for Inception features).
class FeatureMap {
 public:
  static FeatureMap identity();
  /// Projection onto the leading `dim` principal components of `real`.
  static FeatureMap pca(std::span<const Tensor> real, std::size_t dim);
  /// Gaussian random projection to `dim` features, entries N(0, 1/dim).
  static FeatureMap random_projection(std::size_t input_dim, std::size_t dim, std::uint64_t seed);

  FeatureKind kind() const noexcept { return kind_; }
  std::string id() const;
  std::vector<double> apply(const Tensor& sample) const;
  std::vector<std::vector<double>> apply(std::span<const Tensor> samples) const;

 private:
  FeatureKind kind_ = FeatureKind::identity;
  std::size_t in_ = 0, out_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> mean_;    // subtracted before projecting (pca only)
  std::vector<double> matrix_;  // [out, in]
};

struct FidStats {
  std::vector<double> mean;
  Tensor covariance;  ///< 1/(n-1)
};

FidStats fid_stats(const std::vector<std::vector<double>>& features);

/// Frechet distance between two Gaussians. Matrix square roots use the
/// symmetric eigendecomposition with negative eigenvalues clamped to zero;
/// clamps beyond rounding level are appended to `warnings`.
double frechet_distance(const FidStats& a, const FidStats& b, std::vector<std::string>* warnings = nullptr);

/// Needs at least feature_dim + 1 samples on each side.
double fid(std::span<const Tensor> real, std::span<const Tensor> gen, const FeatureMap& features,
           std::vector<std::string>* warnings = nullptr);

using ClassSamples = std::map<std::size_t, std::vector<Tensor>>;

/// Unweighted mean of per-class FID over `classes` (all real classes when empty).
double class_conditional_fid(const ClassSamples& real, const ClassSamples& gen, const FeatureMap& features,
                             std::span<const std::size_t> classes = {},
                             std::vector<std::string>* warnings = nullptr);

/// `count` distinct classes drawn uniformly from `available`, sorted.
std::vector<std::size_t> choose_classes(std::span<const std::size_t> available, std::size_t count,
                                        std::uint64_t seed);

struct CdrResult {
  double value = 0.0;
  std::map<std::size_t, double> fid_before;
  std::map<std::size_t, double> fid_after;
  std::vector<std::string> notes;
};

/// Class-dropping ratio: mean over classes of FID(rho = 1) / FID(rho). Both
/// runs share noise seeds; a class whose FID(rho) is zero is skipped with a note.
CdrResult cdr(const training::Checkpoint& checkpoint, std::span<const std::size_t> classes, double rho,
              const sampling::SamplerConfig& config, const FeatureMap& features, const ClassSamples& real,
              std::size_t samples_per_class, std::size_t threads = 1);

/// Fraction of real samples inside some generated sample's k-NN ball (the
/// distance to its k-th nearest generated neighbour). Zero-radius balls are empty.
double recall(std::span<const Tensor> real, std::span<const Tensor> gen, const FeatureMap& features,
              std::size_t k_nn = 3);

struct ProjectionPoint {
  double k;
  double ratio;
  bool zero_norm;  ///< ratio set to 1 by convention
};

/// 1 - ||x - x~|| / ||x|| per state, x~ the 2-component PCA reconstruction fitted on the states themselves.
std::vector<ProjectionPoint> trajectory_projection_ratio(const sampling::Trajectory& states,
                                                         std::span<const double> ks);

/// 2 E|X - Y| - E|X - X'| - E|Y - Y'| over all pairs (V-statistic).
double energy_distance(std::span<const Tensor> x, std::span<const Tensor> y);

/// Named scalars with per-class breakdowns and provenance.
struct MetricReport {
  std::map<std::string, double> scalars;
  std::map<std::string, std::map<std::string, double>> per_class;
  nlohmann::json provenance = nlohmann::json::object();
  std::vector<std::string> notes;

  /// Throws NumericError for a non-finite value.
  void set(const std::string& name, double value);
  nlohmann::json to_json() const;
};

/// Numbers formatted with '.' decimals regardless of locale, LF line endings.
std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);
std::string format_number(double value);

}  // namespace kflow::metrics
