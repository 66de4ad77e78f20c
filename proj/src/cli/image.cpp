#include "kflow/image.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kflow/container.hpp"
#include "kflow/error.hpp"

namespace kflow::image {

std::vector<std::uint8_t> quantize(const Tensor& tensor) {
  const auto [lo, hi] = std::minmax_element(tensor.data().begin(), tensor.data().end());
  const double min = *lo, range = *hi - *lo;
  std::vector<std::uint8_t> out(tensor.size());
  for (std::size_t i = 0; i < tensor.size(); ++i)
    out[i] = range > 0 ? static_cast<std::uint8_t>(std::lround((tensor[i] - min) / range * 255.0)) : 128;
  return out;
}

void render_image(const Tensor& tensor, const std::filesystem::path& path) {
  const Shape& s = tensor.shape();
  const bool gray = s.size() == 2;
  const bool color = s.size() == 3 && s[2] == 3;
  if (!gray && !color)
    throw ShapeError("images need a 2-D or [H, W, 3] tensor, got " + shape_string(s));
  const auto pixels = quantize(tensor);
  std::string out = (gray ? "P5\n" : "P6\n") + std::to_string(s[1]) + " " + std::to_string(s[0]) + "\n255\n";
  out.append(pixels.begin(), pixels.end());
  io::write_file_atomic(path, out);
}

PnmImage read_pnm(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  std::istringstream in(bytes);
  std::string magic;
  PnmImage img;
  int maxval = 0;
  in >> magic >> img.width >> img.height >> maxval;
  if (!in || (magic != "P5" && magic != "P6") || maxval != 255)
    throw FormatError("'" + path.string() + "' is not an 8-bit binary PGM/PPM image");
  img.channels = magic == "P5" ? 1 : 3;
  const auto start = static_cast<std::size_t>(in.tellg()) + 1;
  const std::size_t n = img.width * img.height * img.channels;
  if (bytes.size() != start + n) throw FormatError("'" + path.string() + "' has a truncated pixel block");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end());
  return img;
}

}  // namespace kflow::image
