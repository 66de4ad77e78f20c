#pragma once

#include <vector>

#include "kflow/tensor.hpp"

namespace kflow {

struct SymmetricEigen {
  std::vector<double> values;  ///< descending
  Tensor vectors;              ///< n x n, column i is the eigenvector of values[i]
};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are sorted in descending order; ties keep the order in which the
/// sweep leaves them, so the basis of a degenerate eigenspace is whatever the
/// rotations produced. Each eigenvector is signed so that its largest-magnitude
/// entry (first one on ties) is positive.
SymmetricEigen eigh_symmetric(const Tensor& a, double symmetry_tolerance = 1e-9);

/// C = A * B for row-major 2-D tensors.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

}  // namespace kflow
