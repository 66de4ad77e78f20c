#pragma once

#include "kflow/tensor.hpp"

namespace kflow {

bool is_power_of_two(std::size_t n) noexcept;

/// Unitary DFT (1/sqrt(N) per axis) of a 1-D or 2-D real tensor.
/// Every axis length must be a power of two.
ComplexTensor dft_forward(const Tensor& x);

/// In-place unitary complex DFT of a 1-D or 2-D array; `inverse` flips the sign of the exponent.
void dft_inplace(ComplexTensor& x, bool inverse);

/// Inverse unitary DFT of a Hermitian-symmetric spectrum back to a real tensor.
/// Rejects spectra whose inverse has an imaginary residual above `tolerance`
/// relative to the largest magnitude.
Tensor dft_inverse(const ComplexTensor& spectrum, double tolerance = 1e-9);

}  // namespace kflow
