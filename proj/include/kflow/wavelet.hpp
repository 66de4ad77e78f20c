#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "kflow/tensor.hpp"

namespace kflow::wavelet {

enum class Family { haar, db6 };

std::string_view family_name(Family f) noexcept;
Family parse_family(std::string_view name);

/// Orthonormal scaling (low-pass) filter taps; sum = sqrt(2), sum of squares = 1.
std::span<const double> lowpass(Family f) noexcept;

/// Largest level count an axis set supports (every axis stays >= 1 after halving).
std::size_t max_levels(const Shape& shape);

/// Multilevel periodized DWT of a 1-D or 2-D array, in place, in Mallat layout:
/// after the call the coarsest approximation occupies the leading block.
void forward_inplace(std::span<double> data, const Shape& shape, Family f, std::size_t levels);
void inverse_inplace(std::span<double> data, const Shape& shape, Family f, std::size_t levels);

}  // namespace kflow::wavelet
