#include "kflow/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "kflow/error.hpp"
#include "kflow/linalg.hpp"
#include "kflow/random.hpp"
#include "kflow/simd/kernels.hpp"

namespace kflow::metrics {

std::string_view feature_name(FeatureKind kind) noexcept {
  switch (kind) {
    case FeatureKind::identity: return "identity";
    case FeatureKind::pca: return "pca";
    case FeatureKind::random_projection: return "random-projection";
  }
  return "?";
}

FeatureKind parse_feature(std::string_view name) {
  for (auto k : {FeatureKind::identity, FeatureKind::pca, FeatureKind::random_projection})
    if (feature_name(k) == name) return k;
  throw ValueError("unknown feature map '" + std::string(name) + "' (expected identity, pca or random-projection)");
}

FeatureMap FeatureMap::identity() { return FeatureMap(); }

FeatureMap FeatureMap::pca(std::span<const Tensor> real, std::size_t dim) {
  if (real.empty()) throw ValueError("PCA feature map needs real samples to fit on");
  const std::size_t d = real.front().size();
  if (dim < 1 || dim > d) throw ValueError("PCA feature dimension must lie in [1, " + std::to_string(d) + "]");
  const kamp::PcaBasis basis = kamp::pca_fit(real, dim);
  FeatureMap f;
  f.kind_ = FeatureKind::pca;
  f.in_ = d;
  f.out_ = dim;
  f.mean_.assign(basis.mean.data().begin(), basis.mean.data().end());
  f.matrix_.resize(dim * d);
  for (std::size_t j = 0; j < dim; ++j)
    for (std::size_t i = 0; i < d; ++i) f.matrix_[j * d + i] = basis.components.at(i, j);
  return f;
}

FeatureMap FeatureMap::random_projection(std::size_t input_dim, std::size_t dim, std::uint64_t seed) {
  if (input_dim < 1 || dim < 1) throw ValueError("random projection dimensions must be positive");
  FeatureMap f;
  f.kind_ = FeatureKind::random_projection;
  f.in_ = input_dim;
  f.out_ = dim;
  f.seed_ = seed;
  SeededRng rng(seed, 0x66656174);
  f.matrix_.resize(dim * input_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (double& w : f.matrix_) w = scale * rng.normal();
  return f;
}

std::string FeatureMap::id() const {
  switch (kind_) {
    case FeatureKind::identity: return "identity";
    case FeatureKind::pca: return "pca-" + std::to_string(out_);
    case FeatureKind::random_projection: return "random-projection-" + std::to_string(out_) + "-seed" + std::to_string(seed_);
  }
  return "?";
}

std::vector<double> FeatureMap::apply(const Tensor& sample) const {
  if (kind_ == FeatureKind::identity) return sample.values();
  if (sample.size() != in_)
    throw ShapeError("feature map expects " + std::to_string(in_) + " inputs, got " + std::to_string(sample.size()));
  std::vector<double> x = sample.values();
  if (!mean_.empty())
    for (std::size_t i = 0; i < in_; ++i) x[i] -= mean_[i];
  std::vector<double> out(out_);
  for (std::size_t j = 0; j < out_; ++j) out[j] = simd::dot(matrix_.data() + j * in_, x.data(), in_);
  return out;
}

std::vector<std::vector<double>> FeatureMap::apply(std::span<const Tensor> samples) const {
  std::vector<std::vector<double>> out;
  out.reserve(samples.size());
  for (const Tensor& s : samples) out.push_back(apply(s));
  return out;
}

FidStats fid_stats(const std::vector<std::vector<double>>& features) {
  if (features.size() < 2) throw ValueError("FID statistics need at least two samples");
  const std::size_t d = features.front().size(), n = features.size();
  FidStats st{std::vector<double>(d, 0.0), Tensor({d, d})};
  for (const auto& f : features) {
    if (f.size() != d) throw ShapeError("feature vectors differ in length");
    for (std::size_t i = 0; i < d; ++i) st.mean[i] += f[i];
  }
  for (double& m : st.mean) m /= static_cast<double>(n);
  std::vector<double> c(d);
  for (const auto& f : features) {
    for (std::size_t i = 0; i < d; ++i) c[i] = f[i] - st.mean[i];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) st.covariance.at(i, j) += c[i] * c[j];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      const double v = st.covariance.at(i, j) / static_cast<double>(n - 1);
      st.covariance.at(i, j) = v;
      st.covariance.at(j, i) = v;
    }
  return st;
}

namespace {

// Symmetric square root and trace helpers; negative eigenvalues are clamped.
Tensor sqrt_psd(const Tensor& a, const char* what, std::vector<std::string>* warnings) {
  const SymmetricEigen e = eigh_symmetric(a, 1e-6);
  const std::size_t d = e.values.size();
  const double top = std::max(1.0, std::abs(e.values.front()));
  Tensor out({d, d});
  for (std::size_t k = 0; k < d; ++k) {
    double lam = e.values[k];
    if (lam < 0) {
      if (lam < -1e-8 * top && warnings)
        warnings->push_back(std::string(what) + " has eigenvalue " + std::to_string(lam) + " clamped to 0");
      lam = 0;
    }
    const double s = std::sqrt(lam);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) out.at(i, j) += s * e.vectors.at(i, k) * e.vectors.at(j, k);
  }
  return out;
}

Tensor symmetrized(Tensor a) {
  const std::size_t d = a.shape()[0];
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double v = 0.5 * (a.at(i, j) + a.at(j, i));
      a.at(i, j) = v;
      a.at(j, i) = v;
    }
  return a;
}

double trace(const Tensor& a) {
  double t = 0.0;
  for (std::size_t i = 0; i < a.shape()[0]; ++i) t += a.at(i, i);
  return t;
}

}  // namespace

double frechet_distance(const FidStats& a, const FidStats& b, std::vector<std::string>* warnings) {
  if (a.mean.size() != b.mean.size()) throw ShapeError("FID statistics differ in dimension");
  double mean_term = 0.0;
  for (std::size_t i = 0; i < a.mean.size(); ++i) mean_term += (a.mean[i] - b.mean[i]) * (a.mean[i] - b.mean[i]);
  const Tensor sa = sqrt_psd(a.covariance, "real covariance", warnings);
  const Tensor inner = symmetrized(matmul(matmul(sa, b.covariance), sa));
  const Tensor cross = sqrt_psd(inner, "covariance product", warnings);
  const double value = mean_term + trace(a.covariance) + trace(b.covariance) - 2.0 * trace(cross);
  return std::max(value, 0.0);
}

double fid(std::span<const Tensor> real, std::span<const Tensor> gen, const FeatureMap& features,
           std::vector<std::string>* warnings) {
  const auto fr = features.apply(real);
  const auto fg = features.apply(gen);
  if (fr.empty() || fg.empty()) throw ValueError("FID needs samples on both sides");
  const std::size_t d = fr.front().size();
  if (fr.size() < d + 1 || fg.size() < d + 1)
    throw ValueError("FID with " + std::to_string(d) + " features needs at least " + std::to_string(d + 1) +
                     " samples per side (got " + std::to_string(fr.size()) + " real, " + std::to_string(fg.size()) +
                     " generated)");
  return frechet_distance(fid_stats(fr), fid_stats(fg), warnings);
}

double class_conditional_fid(const ClassSamples& real, const ClassSamples& gen, const FeatureMap& features,
                             std::span<const std::size_t> classes, std::vector<std::string>* warnings) {
  std::vector<std::size_t> use(classes.begin(), classes.end());
  if (use.empty())
    for (const auto& [c, _] : real) use.push_back(c);
  if (use.empty()) throw ValueError("class-conditional FID needs at least one class");
  double total = 0.0;
  for (std::size_t c : use) {
    const auto r = real.find(c);
    const auto g = gen.find(c);
    if (r == real.end() || g == gen.end())
      throw ValueError("class " + std::to_string(c) + " is missing from the " +
                       (r == real.end() ? "real" : "generated") + " samples");
    total += fid(r->second, g->second, features, warnings);
  }
  return total / static_cast<double>(use.size());
}

std::vector<std::size_t> choose_classes(std::span<const std::size_t> available, std::size_t count,
                                        std::uint64_t seed) {
  if (count > available.size())
    throw ValueError("cannot choose " + std::to_string(count) + " of " + std::to_string(available.size()) + " classes");
  std::vector<std::size_t> pool(available.begin(), available.end());
  SeededRng rng(seed, 0x636c73);
  for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

CdrResult cdr(const training::Checkpoint& checkpoint, std::span<const std::size_t> classes, double rho,
              const sampling::SamplerConfig& config, const FeatureMap& features, const ClassSamples& real,
              std::size_t samples_per_class, std::size_t threads) {
  if (!checkpoint.model.conditional()) throw ValueError("CDR needs a label-conditioned checkpoint");
  if (classes.empty()) throw ValueError("CDR needs at least one class");
  CdrResult res;
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t c : classes) {
    const auto r = real.find(c);
    if (r == real.end()) throw ValueError("class " + std::to_string(c) + " has no real samples");
    sampling::SamplerConfig before = config, after = config;
    before.rho = 1.0;
    after.rho = rho;
    before.seed = after.seed = config.seed + c;
    const std::vector<std::optional<std::size_t>> labels(samples_per_class, c);
    const auto gen_before = sampling::sample_batch(checkpoint, samples_per_class, before, labels, threads);
    const auto gen_after = sampling::sample_batch(checkpoint, samples_per_class, after, labels, threads);
    const double fb = fid(r->second, gen_before, features, &res.notes);
    const double fa = fid(r->second, gen_after, features, &res.notes);
    res.fid_before[c] = fb;
    res.fid_after[c] = fa;
    if (fa == 0.0) {
      res.notes.push_back("class " + std::to_string(c) + " skipped: FID after dropping is zero");
      continue;
    }
    total += fb / fa;
    ++used;
  }
  if (used == 0) throw NumericError("CDR undefined: every class had zero FID after dropping");
  res.value = total / static_cast<double>(used);
  return res;
}

double recall(std::span<const Tensor> real, std::span<const Tensor> gen, const FeatureMap& features,
              std::size_t k_nn) {
  if (k_nn < 1) throw ValueError("k_nn must be at least 1");
  if (real.size() < k_nn + 1 || gen.size() < k_nn + 1)
    throw ValueError("recall with k_nn=" + std::to_string(k_nn) + " needs at least " + std::to_string(k_nn + 1) +
                     " samples per side");
  const auto fr = features.apply(real);
  const auto fg = features.apply(gen);
  const std::size_t d = fg.front().size();
  std::vector<double> radius2(fg.size());
  std::vector<double> dist(fg.size() - 1);
  for (std::size_t i = 0; i < fg.size(); ++i) {
    std::size_t m = 0;
    for (std::size_t j = 0; j < fg.size(); ++j)
      if (j != i) dist[m++] = simd::squared_distance(fg[i].data(), fg[j].data(), d);
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_nn - 1), dist.end());
    radius2[i] = dist[k_nn - 1];
  }
  std::size_t covered = 0;
  for (const auto& x : fr) {
    if (x.size() != d) throw ShapeError("real and generated features differ in length");
    for (std::size_t j = 0; j < fg.size(); ++j) {
      if (radius2[j] > 0.0 && simd::squared_distance(x.data(), fg[j].data(), d) <= radius2[j]) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(fr.size());
}

std::vector<ProjectionPoint> trajectory_projection_ratio(const sampling::Trajectory& states,
                                                         std::span<const double> ks) {
  if (states.size() < 3) throw ValueError("projection ratio needs at least 3 trajectory states");
  if (ks.size() != states.size()) throw ShapeError("need one scale time per trajectory state");
  const std::size_t d = states.front().size();
  std::vector<Tensor> data;
  data.reserve(states.size());
  for (const auto& s : states) data.emplace_back(Shape{d}, s);
  const kamp::PcaBasis basis = kamp::pca_fit(data, std::min<std::size_t>(2, d));
  std::vector<ProjectionPoint> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double norm = norm2(states[i]);
    if (norm == 0.0) {
      out.push_back({ks[i], 1.0, true});
      continue;
    }
    const auto recon = basis.reconstruct(basis.project(states[i]));
    out.push_back({ks[i], 1.0 - std::sqrt(simd::squared_distance(states[i].data(), recon.data(), d)) / norm, false});
  }
  return out;
}

double energy_distance(std::span<const Tensor> x, std::span<const Tensor> y) {
  if (x.empty() || y.empty()) throw ValueError("energy distance needs samples on both sides");
  const std::size_t d = x.front().size();
  auto mean_dist = [d](std::span<const Tensor> a, std::span<const Tensor> b) {
    double total = 0.0;
    for (const Tensor& p : a) {
      if (p.size() != d) throw ShapeError("energy distance samples differ in size");
      for (const Tensor& q : b) total += std::sqrt(simd::squared_distance(p.data().data(), q.data().data(), d));
    }
    return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  };
  return 2.0 * mean_dist(x, y) - mean_dist(x, x) - mean_dist(y, y);
}

void MetricReport::set(const std::string& name, double value) {
  if (!std::isfinite(value)) throw NumericError("metric '" + name + "' is not finite");
  scalars[name] = value;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["metrics"] = scalars;
  j["per_class"] = per_class;
  j["provenance"] = provenance;
  j["notes"] = notes;
  return j;
}

std::string format_number(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf, end);
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw ShapeError("CSV row width does not match the header");
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
    out += '\n';
  }
  return out;
}

}  // namespace kflow::metrics
