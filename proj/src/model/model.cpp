#include "kflow/model.hpp"

#include <cmath>

#include "kflow/error.hpp"
#include "kflow/random.hpp"
#include "kflow/simd/kernels.hpp"

namespace kflow::model {

namespace {

struct Offsets {
  std::vector<std::size_t> w, b, m;  // per hidden layer
  std::size_t w_out = 0, b_out = 0, labels = 0;
};

Offsets offsets_of(const std::vector<ParamView>& layout, std::size_t depth, bool conditional) {
  Offsets o;
  std::size_t i = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    o.w.push_back(layout[i++].offset);
    o.b.push_back(layout[i++].offset);
    o.m.push_back(layout[i++].offset);
  }
  o.w_out = layout[i++].offset;
  o.b_out = layout[i++].offset;
  if (conditional) o.labels = layout[i].offset;
  return o;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double activate(Activation a, double x) {
  return a == Activation::silu ? x * sigmoid(x) : std::tanh(x);
}

inline double activate_grad(Activation a, double x) {
  if (a == Activation::silu) {
    const double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
  }
  const double t = std::tanh(x);
  return 1.0 - t * t;
}

// Per-sample activations kept for the backward pass.
struct Trace {
  std::vector<double> input;                 // h_0
  std::vector<double> embed;                 // e(k)
  std::vector<std::vector<double>> pre;      // a_i
  std::vector<std::vector<double>> post;     // h_i
  std::vector<double> out;
};

}  // namespace

std::string_view activation_name(Activation a) noexcept { return a == Activation::silu ? "silu" : "tanh"; }

Activation parse_activation(std::string_view name) {
  if (name == "silu") return Activation::silu;
  if (name == "tanh") return Activation::tanh;
  throw ValueError("unknown activation '" + std::string(name) + "' (expected silu or tanh)");
}

std::size_t ModelConfig::input_width() const {
  return coeff_size + scale_embed_dim + (label_vocab > 0 ? label_embed_dim : 0);
}

Tensor embed_scale(double k_norm, std::size_t dim, double max_frequency) {
  if (dim == 0 || dim % 2 != 0) throw ValueError("scale embedding dimension must be even and positive, got " + std::to_string(dim));
  const std::size_t half = dim / 2;
  Tensor e({dim});
  for (std::size_t j = 0; j < half; ++j) {
    const double w = half == 1 ? 1.0 : std::pow(max_frequency, static_cast<double>(j) / static_cast<double>(half - 1));
    e[j] = std::sin(w * k_norm);
    e[half + j] = std::cos(w * k_norm);
  }
  return e;
}

void VectorFieldModel::build_layout() {
  const ModelConfig& c = config_;
  if (c.coeff_size == 0 || c.hidden == 0 || c.depth == 0)
    throw ValueError("model widths and depth must be positive");
  if (c.scale_embed_dim == 0 || c.scale_embed_dim % 2 != 0)
    throw ValueError("scale embedding dimension must be even and positive");
  if (c.label_vocab > 0 && c.label_embed_dim == 0) throw ValueError("label embedding dimension must be positive");
  layout_.clear();
  std::size_t offset = 0;
  auto add = [&](std::string name, Shape shape) {
    const std::size_t n = shape_size(shape);
    layout_.push_back({std::move(name), offset, std::move(shape)});
    offset += n;
  };
  std::size_t in = c.input_width();
  for (std::size_t l = 0; l < c.depth; ++l) {
    const std::string p = "layer" + std::to_string(l);
    add(p + ".weight", {c.hidden, in});
    add(p + ".bias", {c.hidden});
    add(p + ".scale_mod", {c.hidden, c.scale_embed_dim});
    in = c.hidden;
  }
  add("out.weight", {c.coeff_size, c.hidden});
  add("out.bias", {c.coeff_size});
  if (c.label_vocab > 0) add("label_embedding", {c.label_vocab + 1, c.label_embed_dim});
  if (!params_.empty() && params_.size() != offset)
    throw ShapeError("model expects " + std::to_string(offset) + " parameters, got " + std::to_string(params_.size()));
  params_.resize(offset, 0.0);
}

VectorFieldModel::VectorFieldModel(ModelConfig config, std::vector<double> parameters)
    : config_(config), params_(std::move(parameters)) {
  build_layout();
}

VectorFieldModel VectorFieldModel::init(const ModelConfig& config, std::uint64_t seed) {
  VectorFieldModel m(config, {});
  SeededRng rng(seed, 0x6d6f64656cULL);
  for (const ParamView& p : m.layout_) {
    double scale = 0.0;
    if (p.name.ends_with(".weight") && !p.name.starts_with("out"))
      scale = 1.0 / std::sqrt(static_cast<double>(p.shape[1]));
    else if (p.name.ends_with(".scale_mod"))
      scale = 1.0 / std::sqrt(static_cast<double>(p.shape[1]));
    else if (p.name == "label_embedding")
      scale = 1.0;
    if (scale == 0.0) continue;
    for (std::size_t i = 0; i < shape_size(p.shape); ++i) m.params_[p.offset + i] = scale * rng.normal();
  }
  return m;
}

std::span<double> VectorFieldModel::parameter(std::string_view name) {
  for (const ParamView& p : layout_)
    if (p.name == name) return {params_.data() + p.offset, shape_size(p.shape)};
  throw ValueError("model has no parameter '" + std::string(name) + "'");
}

std::span<const double> VectorFieldModel::parameter(std::string_view name) const {
  for (const ParamView& p : layout_)
    if (p.name == name) return {params_.data() + p.offset, shape_size(p.shape)};
  throw ValueError("model has no parameter '" + std::string(name) + "'");
}

std::size_t VectorFieldModel::label_row(std::optional<std::size_t> label) const {
  if (!label) return null_label();
  if (!conditional()) throw ValueError("label given to an unconditional model");
  if (*label >= config_.label_vocab)
    throw ValueError("unknown label id " + std::to_string(*label) + " (vocabulary " +
                     std::to_string(config_.label_vocab) + ")");
  return *label;
}

namespace {

void forward_one(const ModelConfig& c, const Offsets& o, const double* params, const double* psi, double k,
                 std::size_t label_row, Trace& tr) {
  const std::size_t n = c.coeff_size, de = c.scale_embed_dim, h = c.hidden;
  const Tensor e = embed_scale(k, de, c.max_frequency);
  tr.embed.assign(e.data().begin(), e.data().end());
  tr.input.resize(c.input_width());
  std::copy(psi, psi + n, tr.input.begin());
  std::copy(tr.embed.begin(), tr.embed.end(), tr.input.begin() + static_cast<std::ptrdiff_t>(n));
  if (c.label_vocab > 0) {
    const double* row = params + o.labels + label_row * c.label_embed_dim;
    std::copy(row, row + c.label_embed_dim, tr.input.begin() + static_cast<std::ptrdiff_t>(n + de));
  }
  tr.pre.resize(c.depth);
  tr.post.resize(c.depth);
  const double* x = tr.input.data();
  std::size_t in = tr.input.size();
  for (std::size_t l = 0; l < c.depth; ++l) {
    auto& a = tr.pre[l];
    auto& z = tr.post[l];
    a.resize(h);
    z.resize(h);
    const double* W = params + o.w[l];
    const double* M = params + o.m[l];
    const double* b = params + o.b[l];
    for (std::size_t j = 0; j < h; ++j) {
      a[j] = b[j] + simd::dot(W + j * in, x, in) + simd::dot(M + j * de, tr.embed.data(), de);
      z[j] = activate(c.activation, a[j]);
    }
    x = z.data();
    in = h;
  }
  tr.out.resize(n);
  const double* Wo = params + o.w_out;
  const double* bo = params + o.b_out;
  for (std::size_t i = 0; i < n; ++i) tr.out[i] = bo[i] + simd::dot(Wo + i * h, x, h);
}

}  // namespace

void VectorFieldModel::eval(std::span<const double> psi, std::span<const double> k, LabelSpan labels,
                            std::span<double> out) const {
  const std::size_t n = config_.coeff_size, B = k.size();
  if (psi.size() != B * n || out.size() != B * n)
    throw ShapeError("model expects " + std::to_string(n) + " coefficients per sample");
  if (!labels.empty() && labels.size() != B) throw ShapeError("label count does not match batch size");
  const Offsets o = offsets_of(layout_, config_.depth, conditional());
  Trace tr;
  for (std::size_t s = 0; s < B; ++s) {
    const std::size_t row = label_row(labels.empty() ? std::nullopt : labels[s]);
    forward_one(config_, o, params_.data(), psi.data() + s * n, k[s], row, tr);
    for (double v : tr.out)
      if (!std::isfinite(v)) throw NumericError("model produced a non-finite velocity");
    std::copy(tr.out.begin(), tr.out.end(), out.begin() + static_cast<std::ptrdiff_t>(s * n));
  }
}

std::vector<double> VectorFieldModel::eval(std::span<const double> psi, double k,
                                           std::optional<std::size_t> label) const {
  std::vector<double> out(config_.coeff_size);
  const std::optional<std::size_t> labels[1] = {label};
  const double ks[1] = {k};
  eval(psi, ks, LabelSpan(labels, 1), out);
  return out;
}

double VectorFieldModel::backprop(const TrainingBatch& batch, std::span<double> grad) const {
  const ModelConfig& c = config_;
  const std::size_t n = c.coeff_size, B = batch.batch_size(), h = c.hidden, de = c.scale_embed_dim;
  if (B == 0) throw ValueError("empty training batch");
  if (batch.psi.size() != B * n || batch.target.size() != B * n)
    throw ShapeError("training batch rows must hold " + std::to_string(n) + " coefficients");
  if (!batch.labels.empty() && batch.labels.size() != B) throw ShapeError("label count does not match batch size");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != params_.size()) throw ShapeError("gradient buffer has the wrong size");
  const Offsets o = offsets_of(layout_, c.depth, conditional());
  const double inv_b = 1.0 / static_cast<double>(B);

  Trace tr;
  std::vector<double> d_out(n), d_h(h), d_a(h), d_x;
  double loss = 0.0;
  for (std::size_t s = 0; s < B; ++s) {
    const std::size_t row = label_row(batch.labels.empty() ? std::nullopt : batch.labels[s]);
    forward_one(c, o, params_.data(), batch.psi.data() + s * n, batch.k[s], row, tr);
    const double* target = batch.target.data() + s * n;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = tr.out[i] - target[i];
      loss += r * r;
      d_out[i] = 2.0 * r * inv_b;
    }
    if (!want_grad) continue;

    // Output head.
    const double* last = tr.post.back().data();
    std::fill(d_h.begin(), d_h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      grad[o.b_out + i] += d_out[i];
      simd::axpy(d_out[i], last, grad.data() + o.w_out + i * h, h);
      simd::axpy(d_out[i], params_.data() + o.w_out + i * h, d_h.data(), h);
    }
    // Hidden layers, last to first.
    for (std::size_t l = c.depth; l-- > 0;) {
      const std::size_t in = l == 0 ? tr.input.size() : h;
      const double* x = l == 0 ? tr.input.data() : tr.post[l - 1].data();
      for (std::size_t j = 0; j < h; ++j) d_a[j] = d_h[j] * activate_grad(c.activation, tr.pre[l][j]);
      d_x.assign(in, 0.0);
      const double* W = params_.data() + o.w[l];
      for (std::size_t j = 0; j < h; ++j) {
        const double g = d_a[j];
        if (g == 0.0) continue;
        grad[o.b[l] + j] += g;
        simd::axpy(g, x, grad.data() + o.w[l] + j * in, in);
        simd::axpy(g, tr.embed.data(), grad.data() + o.m[l] + j * de, de);
        simd::axpy(g, W + j * in, d_x.data(), in);
      }
      if (l > 0) {
        std::copy(d_x.begin(), d_x.end(), d_h.begin());
      } else if (conditional()) {
        double* row_grad = grad.data() + o.labels + row * c.label_embed_dim;
        for (std::size_t q = 0; q < c.label_embed_dim; ++q) row_grad[q] += d_x[n + de + q];
      }
    }
  }
  return loss * inv_b;
}

std::span<const double> GradientSet::view(const VectorFieldModel& model, std::string_view name) const {
  for (const ParamView& p : model.layout())
    if (p.name == name) return {values.data() + p.offset, shape_size(p.shape)};
  throw ValueError("model has no parameter '" + std::string(name) + "'");
}

LossAndGradient vf_grad(const VectorFieldModel& model, const TrainingBatch& batch) {
  LossAndGradient out{0.0, GradientSet{std::vector<double>(model.parameter_count(), 0.0)}};
  out.loss = model.backprop(batch, out.gradient.values);
  return out;
}

double vf_loss(const VectorFieldModel& model, const TrainingBatch& batch) { return model.backprop(batch, {}); }

}  // namespace kflow::model
