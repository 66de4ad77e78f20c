#include "kflow/fft.hpp"

#include <cmath>
#include <numbers>

#include "kflow/error.hpp"

namespace kflow {

namespace {

using cd = std::complex<double>;

void check_axes(const Shape& shape) {
  if (shape.empty() || shape.size() > 2)
    throw ShapeError("DFT supports 1-D and 2-D tensors, got shape " + shape_string(shape));
  for (std::size_t d : shape)
    if (!is_power_of_two(d)) throw ShapeError("DFT axis length " + std::to_string(d) + " is not a power of two");
}

// Radix-2 iterative transform of n elements spaced by `stride`.
void fft_strided(cd* base, std::size_t n, std::size_t stride, bool inverse) {
  if (n == 1) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(base[i * stride], base[j * stride]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      const cd w(std::cos(angle * static_cast<double>(k)), std::sin(angle * static_cast<double>(k)));
      for (std::size_t start = 0; start < n; start += len) {
        cd& a = base[(start + k) * stride];
        cd& b = base[(start + k + half) * stride];
        const cd t = w * b;
        b = a - t;
        a += t;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) base[i * stride] *= scale;
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

void dft_inplace(ComplexTensor& x, bool inverse) {
  const Shape& shape = x.shape();
  check_axes(shape);
  cd* data = x.data().data();
  if (shape.size() == 1) {
    fft_strided(data, shape[0], 1, inverse);
    return;
  }
  const std::size_t rows = shape[0], cols = shape[1];
  for (std::size_t r = 0; r < rows; ++r) fft_strided(data + r * cols, cols, 1, inverse);
  for (std::size_t c = 0; c < cols; ++c) fft_strided(data + c, rows, cols, inverse);
}

ComplexTensor dft_forward(const Tensor& x) {
  check_axes(x.shape());
  std::vector<cd> values(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) values[i] = x[i];
  ComplexTensor out(x.shape(), std::move(values));
  dft_inplace(out, false);
  return out;
}

Tensor dft_inverse(const ComplexTensor& spectrum, double tolerance) {
  check_axes(spectrum.shape());
  ComplexTensor work = spectrum;
  dft_inplace(work, true);
  double peak = 0.0, residual = 0.0;
  for (const cd& v : spectrum.data()) peak = std::max(peak, std::abs(v));
  std::vector<double> real(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    real[i] = work[i].real();
    residual = std::max(residual, std::abs(work[i].imag()));
  }
  if (residual > tolerance * std::max(peak, 1e-300) && residual > 0.0)
    throw ValueError("spectrum is not Hermitian-symmetric: imaginary residual " + std::to_string(residual) +
                     " exceeds tolerance");
  return Tensor(spectrum.shape(), std::move(real));
}

}  // namespace kflow
