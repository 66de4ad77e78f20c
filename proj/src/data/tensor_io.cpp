#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "json.hpp"
#include "kflow/container.hpp"
#include "kflow/data.hpp"
#include "kflow/error.hpp"

namespace kflow::data {

namespace {

constexpr char magic[4] = {'K', 'F', 'T', '1'};

}  // namespace

void tensor_write(const std::filesystem::path& path, const Shape& shape, std::span<const double> values) {
  if (shape.empty()) throw ShapeError("cannot write a tensor with an empty shape");
  for (std::size_t d : shape)
    if (d == 0) throw ShapeError("cannot write tensor of shape " + shape_string(shape) + ": empty dimension");
  if (values.size() != shape_size(shape))
    throw ShapeError("tensor of shape " + shape_string(shape) + " needs " + std::to_string(shape_size(shape)) +
                     " values, got " + std::to_string(values.size()));
  const nlohmann::json header = {{"dtype", "f32"}, {"shape", shape}, {"order", "row-major"}};
  const std::string h = header.dump();
  std::string out(magic, 4);
  const auto len = static_cast<std::uint32_t>(h.size());
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  out.append(reinterpret_cast<const char*>(&len), 4);
  out += h;
  out.reserve(out.size() + 4 * values.size());
  for (double v : values) {
    if (!std::isfinite(v) || std::abs(v) > std::numeric_limits<float>::max())
      throw ValueError("value " + std::to_string(v) + " is not representable as f32");
    const auto f = static_cast<float>(v);
    out.append(reinterpret_cast<const char*>(&f), 4);
  }
  io::write_file_atomic(path, out);
}

void tensor_write(const std::filesystem::path& path, const Tensor& tensor) {
  tensor_write(path, tensor.shape(), tensor.data());
}

Tensor tensor_read(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  const std::string where = "tensor file '" + path.string() + "'";
  if (bytes.size() < 8 || std::memcmp(bytes.data(), magic, 4) != 0)
    throw FormatError(where + " does not start with the KFT1 magic");
  std::uint32_t len;
  std::memcpy(&len, bytes.data() + 4, 4);
  if (bytes.size() < 8 + std::size_t{len}) throw FormatError(where + " is truncated inside its header");
  Shape shape;
  try {
    const auto header = nlohmann::json::parse(bytes.begin() + 8, bytes.begin() + 8 + len);
    if (header.at("dtype").get<std::string>() != "f32") throw FormatError(where + ": only dtype f32 is supported");
    if (header.value("order", std::string("row-major")) != "row-major")
      throw FormatError(where + ": only row-major order is supported");
    shape = header.at("shape").get<Shape>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(where + " has a malformed header: " + e.what());
  }
  if (shape.empty()) throw FormatError(where + " has an empty shape");
  for (std::size_t d : shape)
    if (d == 0) throw FormatError(where + " has a zero-length dimension");
  const std::size_t n = shape_size(shape);
  if (bytes.size() != 8 + std::size_t{len} + 4 * n)
    throw FormatError(where + " payload holds " + std::to_string(bytes.size() - 8 - len) + " bytes, expected " +
                      std::to_string(4 * n));
  std::vector<double> values(n);
  const char* p = bytes.data() + 8 + len;
  for (std::size_t i = 0; i < n; ++i) {
    float f;
    std::memcpy(&f, p + 4 * i, 4);
    values[i] = f;
  }
  return Tensor(std::move(shape), std::move(values));
}

void labels_write(const std::filesystem::path& path, std::span<const std::size_t> labels) {
  std::vector<double> v(labels.begin(), labels.end());
  for (std::size_t l : labels)
    if (l > (1u << 24)) throw ValueError("label id " + std::to_string(l) + " does not fit exactly in f32");
  tensor_write(path, {labels.size()}, v);
}

std::vector<std::size_t> labels_read(const std::filesystem::path& path) {
  const Tensor t = tensor_read(path);
  if (t.rank() != 1) throw FormatError("label file '" + path.string() + "' must hold a 1-D tensor");
  std::vector<std::size_t> out;
  out.reserve(t.size());
  for (double v : t.data()) {
    if (v < 0 || v != std::floor(v)) throw FormatError("label file '" + path.string() + "' holds a non-integer id");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace kflow::data
