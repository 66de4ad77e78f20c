#include "kflow/wavelet.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "kflow/error.hpp"
#include "kflow/fft.hpp"

namespace kflow::wavelet {

namespace {

const std::array<double, 2> kHaar{std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0};

// Daubechies wavelet with 6 vanishing moments (12 taps).
const std::array<double, 12> kDb6{
    0.11154074335010947,   0.49462389039845306,   0.7511339080210954,    0.31525035170919763,
    -0.22626469396543983,  -0.12976686756726194,  0.09750160558732304,   0.027522865530305727,
    -0.03158203931748603,  0.0005538422011614961, 0.004777257510945511,  -0.0010773010853084796};

// One analysis step on n strided samples: out[0:n/2] approximation, out[n/2:n] detail.
void analyze(double* x, std::size_t n, std::size_t stride, std::span<const double> h, std::vector<double>& buf) {
  const std::size_t half = n / 2, len = h.size();
  buf.assign(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    double a = 0.0, d = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const double v = x[((2 * i + k) % n) * stride];
      const double g = (k % 2 == 0 ? 1.0 : -1.0) * h[len - 1 - k];
      a += h[k] * v;
      d += g * v;
    }
    buf[i] = a;
    buf[half + i] = d;
  }
  for (std::size_t i = 0; i < n; ++i) x[i * stride] = buf[i];
}

void synthesize(double* x, std::size_t n, std::size_t stride, std::span<const double> h, std::vector<double>& buf) {
  const std::size_t half = n / 2, len = h.size();
  buf.assign(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    const double a = x[i * stride], d = x[(half + i) * stride];
    for (std::size_t k = 0; k < len; ++k) {
      const double g = (k % 2 == 0 ? 1.0 : -1.0) * h[len - 1 - k];
      buf[(2 * i + k) % n] += h[k] * a + g * d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) x[i * stride] = buf[i];
}

void check(std::span<double> data, const Shape& shape, std::size_t levels) {
  if (shape.empty() || shape.size() > 2)
    throw ShapeError("wavelet transform supports 1-D and 2-D signals, got " + shape_string(shape));
  for (std::size_t d : shape)
    if (!is_power_of_two(d)) throw ShapeError("wavelet axis length " + std::to_string(d) + " is not a power of two");
  if (shape_size(shape) != data.size()) throw ShapeError("wavelet data length does not match shape");
  if (levels == 0 || levels > max_levels(shape))
    throw ValueError("wavelet level count " + std::to_string(levels) + " outside [1, " +
                     std::to_string(max_levels(shape)) + "] for shape " + shape_string(shape));
}

}  // namespace

std::string_view family_name(Family f) noexcept { return f == Family::haar ? "haar" : "db6"; }

Family parse_family(std::string_view name) {
  if (name == "haar") return Family::haar;
  if (name == "db6") return Family::db6;
  throw ValueError("unknown wavelet family '" + std::string(name) + "' (expected haar or db6)");
}

std::span<const double> lowpass(Family f) noexcept {
  if (f == Family::haar) return kHaar;
  return kDb6;
}

std::size_t max_levels(const Shape& shape) {
  std::size_t smallest = shape.at(0);
  for (std::size_t d : shape) smallest = std::min(smallest, d);
  std::size_t levels = 0;
  while ((smallest >> levels) > 1) ++levels;
  return levels;
}

void forward_inplace(std::span<double> data, const Shape& shape, Family f, std::size_t levels) {
  check(data, shape, levels);
  const auto h = lowpass(f);
  std::vector<double> buf;
  if (shape.size() == 1) {
    for (std::size_t l = 0, n = shape[0]; l < levels; ++l, n /= 2) analyze(data.data(), n, 1, h, buf);
    return;
  }
  const std::size_t cols = shape[1];
  std::size_t r = shape[0], c = shape[1];
  for (std::size_t l = 0; l < levels; ++l, r /= 2, c /= 2) {
    for (std::size_t i = 0; i < r; ++i) analyze(data.data() + i * cols, c, 1, h, buf);
    for (std::size_t j = 0; j < c; ++j) analyze(data.data() + j, r, cols, h, buf);
  }
}

void inverse_inplace(std::span<double> data, const Shape& shape, Family f, std::size_t levels) {
  check(data, shape, levels);
  const auto h = lowpass(f);
  std::vector<double> buf;
  if (shape.size() == 1) {
    for (std::size_t l = levels; l-- > 0;) synthesize(data.data(), shape[0] >> l, 1, h, buf);
    return;
  }
  const std::size_t cols = shape[1];
  for (std::size_t l = levels; l-- > 0;) {
    const std::size_t r = shape[0] >> l, c = shape[1] >> l;
    for (std::size_t j = 0; j < c; ++j) synthesize(data.data() + j, r, cols, h, buf);
    for (std::size_t i = 0; i < r; ++i) synthesize(data.data() + i * cols, c, 1, h, buf);
  }
}

}  // namespace kflow::wavelet
