#pragma once

// Binary PGM (P5) / PPM (P6) output for 2-D and [H, W, 3] tensors.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "kflow/tensor.hpp"

namespace kflow::image {

/// Min-max scaling to 0..255; a constant tensor maps to 128 everywhere.
std::vector<std::uint8_t> quantize(const Tensor& tensor);

void render_image(const Tensor& tensor, const std::filesystem::path& path);

struct PnmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;  ///< row-major, interleaved channels
};

PnmImage read_pnm(const std::filesystem::path& path);

}  // namespace kflow::image
