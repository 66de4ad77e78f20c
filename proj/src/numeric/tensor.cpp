#include "kflow/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "kflow/error.hpp"
#include "kflow/simd/kernels.hpp"

namespace kflow {

std::size_t shape_size(const Shape& shape) {
  if (shape.empty()) throw ShapeError("empty shape");
  std::size_t n = 1;
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("shape " + shape_string(shape) + " has a zero dimension");
    n *= d;
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size())
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  if (!all_finite()) throw NumericError("tensor contains non-finite entries");
}

Tensor Tensor::from(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size())
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

bool Tensor::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

ComplexTensor::ComplexTensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_)) {}

ComplexTensor::ComplexTensor(Shape shape, std::vector<value_type> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size())
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  for (const auto& v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericError("complex tensor contains non-finite entries");
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  return simd::dot(a.data(), b.data(), a.size());
}

double norm2(std::span<const double> x) { return std::sqrt(simd::dot(x.data(), x.data(), x.size())); }

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("relative_error: length mismatch");
  const double diff = std::sqrt(simd::squared_distance(a.data(), b.data(), a.size()));
  const double ref = norm2(b);
  return diff / std::max(ref, 1e-300);
}

}  // namespace kflow
