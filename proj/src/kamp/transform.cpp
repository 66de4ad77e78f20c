#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>

#include "kflow/error.hpp"
#include "kflow/fft.hpp"
#include "kflow/kamp.hpp"
#include "kflow/linalg.hpp"
#include "kflow/simd/kernels.hpp"

namespace kflow::kamp {

namespace {

enum class Part : std::uint8_t { self, re, im };

struct FourierPlan {
  std::vector<std::uint32_t> grid;  // full-grid index of each canonical coefficient
  std::vector<Part> part;
  std::vector<std::uint32_t> partner;  // conjugate grid index
};

struct WaveletPlan {
  wavelet::Family family;
  std::size_t levels;
  std::vector<std::uint32_t> gather;  // canonical position -> Mallat-layout index
};

struct PcaPlan {
  PcaBasis basis;
  std::vector<double> rows;  // [m, d] transpose of the components
};

long signed_frequency(std::size_t i, std::size_t n) {
  return i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
}

void check_fft_shape(const Shape& shape) {
  if (shape.empty() || shape.size() > 2)
    throw ShapeError("Fourier transform supports 1-D and 2-D signals, got " + shape_string(shape));
  for (std::size_t d : shape)
    if (!is_power_of_two(d)) throw ShapeError("Fourier axis length " + std::to_string(d) + " is not a power of two");
}

}  // namespace

struct Transform::State {
  TransformKind kind;
  Shape shape;
  std::size_t n;
  std::vector<double> radius;
  std::variant<FourierPlan, WaveletPlan, PcaPlan> plan;
};

std::string_view kind_name(TransformKind kind) noexcept {
  switch (kind) {
    case TransformKind::fourier: return "fourier";
    case TransformKind::wavelet: return "wavelet";
    case TransformKind::pca: return "pca";
  }
  return "?";
}

TransformKind parse_kind(std::string_view name) {
  if (name == "fourier") return TransformKind::fourier;
  if (name == "wavelet") return TransformKind::wavelet;
  if (name == "pca") return TransformKind::pca;
  throw ValueError("unknown transform '" + std::string(name) + "' (expected fourier, wavelet or pca)");
}

Transform::Transform(std::shared_ptr<const State> state) : state_(std::move(state)) {}

Transform Transform::fourier(Shape signal_shape) {
  check_fft_shape(signal_shape);
  auto st = std::make_shared<State>();
  st->kind = TransformKind::fourier;
  st->shape = signal_shape;
  st->n = shape_size(signal_shape);
  const std::size_t rows = signal_shape.size() == 2 ? signal_shape[0] : 1;
  const std::size_t cols = signal_shape.back();
  FourierPlan plan;
  for (std::size_t idx = 0; idx < st->n; ++idx) {
    const std::size_t r = idx / cols, c = idx % cols;
    const std::size_t pr = (rows - r) % rows, pc = (cols - c) % cols;
    const std::size_t partner = pr * cols + pc;
    if (partner < idx) continue;
    const double fr = static_cast<double>(signed_frequency(r, rows));
    const double fc = static_cast<double>(signed_frequency(c, cols));
    const double rad = std::sqrt(fr * fr + fc * fc);
    if (partner == idx) {
      plan.grid.push_back(static_cast<std::uint32_t>(idx));
      plan.part.push_back(Part::self);
      plan.partner.push_back(static_cast<std::uint32_t>(idx));
      st->radius.push_back(rad);
    } else {
      for (Part p : {Part::re, Part::im}) {
        plan.grid.push_back(static_cast<std::uint32_t>(idx));
        plan.part.push_back(p);
        plan.partner.push_back(static_cast<std::uint32_t>(partner));
        st->radius.push_back(rad);
      }
    }
  }
  st->plan = std::move(plan);
  return Transform(std::move(st));
}

Transform Transform::wavelet(Shape signal_shape, wavelet::Family family, std::size_t levels) {
  if (signal_shape.empty() || signal_shape.size() > 2)
    throw ShapeError("wavelet transform supports 1-D and 2-D signals, got " + shape_string(signal_shape));
  for (std::size_t d : signal_shape)
    if (!is_power_of_two(d)) throw ShapeError("wavelet axis length " + std::to_string(d) + " is not a power of two");
  const std::size_t max_l = wavelet::max_levels(signal_shape);
  if (max_l == 0) throw ShapeError("wavelet transform needs every axis length >= 2");
  if (levels == 0) levels = std::max<std::size_t>(1, max_l - 1);
  if (levels > max_l)
    throw ValueError("wavelet level count " + std::to_string(levels) + " exceeds maximum " + std::to_string(max_l));

  auto st = std::make_shared<State>();
  st->kind = TransformKind::wavelet;
  st->shape = signal_shape;
  st->n = shape_size(signal_shape);
  WaveletPlan plan{family, levels, {}};
  plan.gather.reserve(st->n);
  st->radius.reserve(st->n);
  if (signal_shape.size() == 1) {
    const std::size_t n = signal_shape[0];
    for (std::size_t i = 0; i < (n >> levels); ++i) {
      plan.gather.push_back(static_cast<std::uint32_t>(i));
      st->radius.push_back(0.0);
    }
    for (std::size_t l = levels; l >= 1; --l) {
      const double scale = static_cast<double>(levels - l + 1);
      for (std::size_t i = n >> l; i < (n >> (l - 1)); ++i) {
        plan.gather.push_back(static_cast<std::uint32_t>(i));
        st->radius.push_back(scale);
      }
    }
  } else {
    const std::size_t R = signal_shape[0], C = signal_shape[1];
    auto block = [&](std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1, double scale) {
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t c = c0; c < c1; ++c) {
          plan.gather.push_back(static_cast<std::uint32_t>(r * C + c));
          st->radius.push_back(scale);
        }
    };
    block(0, R >> levels, 0, C >> levels, 0.0);
    for (std::size_t l = levels; l >= 1; --l) {
      const std::size_t hr = R >> l, hc = C >> l, fr = R >> (l - 1), fc = C >> (l - 1);
      const double scale = static_cast<double>(levels - l + 1);
      block(0, hr, hc, fc, scale);
      block(hr, fr, 0, hc, scale);
      block(hr, fr, hc, fc, scale);
    }
  }
  st->plan = std::move(plan);
  return Transform(std::move(st));
}

Transform Transform::pca(PcaBasis basis, Shape signal_shape) {
  const std::size_t d = shape_size(signal_shape);
  if (basis.dimension() != d)
    throw ShapeError("PCA basis dimension " + std::to_string(basis.dimension()) + " does not match signal shape " +
                     shape_string(signal_shape));
  if (basis.count() != d)
    throw ValueError("a PCA K-amplitude transform needs a complete basis (" + std::to_string(d) +
                     " components), got " + std::to_string(basis.count()));
  auto st = std::make_shared<State>();
  st->kind = TransformKind::pca;
  st->shape = signal_shape;
  st->n = d;
  for (std::size_t j = 0; j < d; ++j) st->radius.push_back(static_cast<double>(j));
  PcaPlan plan{std::move(basis), {}};
  plan.rows = transpose(plan.basis.components).values();
  st->plan = std::move(plan);
  return Transform(std::move(st));
}

TransformKind Transform::kind() const noexcept { return state_->kind; }

std::string Transform::id() const {
  switch (state_->kind) {
    case TransformKind::fourier: return "fourier";
    case TransformKind::wavelet: {
      const auto& p = std::get<WaveletPlan>(state_->plan);
      return "wavelet-" + std::string(wavelet::family_name(p.family)) + "-L" + std::to_string(p.levels);
    }
    case TransformKind::pca: return "pca";
  }
  return "?";
}

const Shape& Transform::signal_shape() const noexcept { return state_->shape; }
std::size_t Transform::size() const noexcept { return state_->n; }
std::span<const double> Transform::radius() const noexcept { return state_->radius; }

std::vector<double> Transform::native_scales() const {
  std::vector<double> s = state_->radius;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

wavelet::Family Transform::wavelet_family() const {
  if (state_->kind != TransformKind::wavelet) throw ValueError("not a wavelet transform");
  return std::get<WaveletPlan>(state_->plan).family;
}

std::size_t Transform::wavelet_levels() const {
  if (state_->kind != TransformKind::wavelet) throw ValueError("not a wavelet transform");
  return std::get<WaveletPlan>(state_->plan).levels;
}

const PcaBasis* Transform::pca_basis() const noexcept {
  if (state_->kind != TransformKind::pca) return nullptr;
  return &std::get<PcaPlan>(state_->plan).basis;
}

void Transform::forward(std::span<const double> signal, std::span<double> coeffs) const {
  const State& st = *state_;
  if (signal.size() != st.n || coeffs.size() != st.n)
    throw ShapeError("transform " + id() + " expects " + std::to_string(st.n) + " values, got " +
                     std::to_string(signal.size()));
  switch (st.kind) {
    case TransformKind::fourier: {
      const auto& plan = std::get<FourierPlan>(st.plan);
      ComplexTensor x(st.shape);
      for (std::size_t i = 0; i < st.n; ++i) x[i] = signal[i];
      dft_inplace(x, false);
      for (std::size_t i = 0; i < st.n; ++i) {
        const auto& v = x[plan.grid[i]];
        switch (plan.part[i]) {
          case Part::self: coeffs[i] = v.real(); break;
          case Part::re: coeffs[i] = std::numbers::sqrt2 * v.real(); break;
          case Part::im: coeffs[i] = std::numbers::sqrt2 * v.imag(); break;
        }
      }
      return;
    }
    case TransformKind::wavelet: {
      const auto& plan = std::get<WaveletPlan>(st.plan);
      std::vector<double> work(signal.begin(), signal.end());
      wavelet::forward_inplace(work, st.shape, plan.family, plan.levels);
      for (std::size_t i = 0; i < st.n; ++i) coeffs[i] = work[plan.gather[i]];
      return;
    }
    case TransformKind::pca: {
      const auto& plan = std::get<PcaPlan>(st.plan);
      std::vector<double> centered(st.n);
      for (std::size_t i = 0; i < st.n; ++i) centered[i] = signal[i] - plan.basis.mean[i];
      for (std::size_t j = 0; j < st.n; ++j) coeffs[j] = simd::dot(&plan.rows[j * st.n], centered.data(), st.n);
      return;
    }
  }
}

void Transform::inverse(std::span<const double> coeffs, std::span<double> signal) const {
  const State& st = *state_;
  if (signal.size() != st.n || coeffs.size() != st.n)
    throw ShapeError("transform " + id() + " expects " + std::to_string(st.n) + " coefficients, got " +
                     std::to_string(coeffs.size()));
  switch (st.kind) {
    case TransformKind::fourier: {
      const auto& plan = std::get<FourierPlan>(st.plan);
      ComplexTensor x(st.shape);
      for (std::size_t i = 0; i < st.n; ++i) {
        switch (plan.part[i]) {
          case Part::self: x[plan.grid[i]] = coeffs[i]; break;
          case Part::re: {
            const double re = coeffs[i] / std::numbers::sqrt2, im = coeffs[i + 1] / std::numbers::sqrt2;
            x[plan.grid[i]] = {re, im};
            x[plan.partner[i]] = {re, -im};
            break;
          }
          case Part::im: break;
        }
      }
      dft_inplace(x, true);
      for (std::size_t i = 0; i < st.n; ++i) signal[i] = x[i].real();
      return;
    }
    case TransformKind::wavelet: {
      const auto& plan = std::get<WaveletPlan>(st.plan);
      for (std::size_t i = 0; i < st.n; ++i) signal[plan.gather[i]] = coeffs[i];
      wavelet::inverse_inplace(signal, st.shape, plan.family, plan.levels);
      return;
    }
    case TransformKind::pca: {
      const auto& plan = std::get<PcaPlan>(st.plan);
      std::copy(plan.basis.mean.data().begin(), plan.basis.mean.data().end(), signal.begin());
      for (std::size_t j = 0; j < st.n; ++j) simd::axpy(coeffs[j], &plan.rows[j * st.n], signal.data(), st.n);
      return;
    }
  }
}

std::vector<double> Transform::forward(const Tensor& signal) const {
  if (signal.shape() != state_->shape && signal.size() != state_->n)
    throw ShapeError("signal shape " + shape_string(signal.shape()) + " does not match transform shape " +
                     shape_string(state_->shape));
  if (state_->kind != TransformKind::pca && signal.shape() != state_->shape)
    throw ShapeError("signal shape " + shape_string(signal.shape()) + " does not match transform shape " +
                     shape_string(state_->shape));
  std::vector<double> out(state_->n);
  forward(signal.data(), out);
  return out;
}

Tensor Transform::inverse(std::span<const double> coeffs) const {
  Tensor out(state_->shape);
  inverse(coeffs, out.data());
  return out;
}

}  // namespace kflow::kamp
