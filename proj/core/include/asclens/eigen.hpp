#pragma once

#include <cstddef>
#include <vector>

#include "asclens/matrix.hpp"

namespace asclens {

struct EigenPairs {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
};

/// Full eigendecomposition of a small symmetric matrix by cyclic Jacobi
/// rotations; stops when the off-diagonal Frobenius norm falls below
/// tolerance * ||A||_F.
EigenPairs jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-12,
                        std::size_t max_sweeps = 100);

/// Largest (algebraic) `count` eigenpairs of a symmetric matrix by subspace
/// iteration with Rayleigh-Ritz projection. Converged when the retained
/// eigenvalues drift by less than tolerance * max(1, |lambda_1|) between
/// iterations. Falls back to a Gershgorin shift when negative eigenvalues
/// dominate in magnitude.
EigenPairs top_eigenpairs(const Matrix& symmetric, std::size_t count,
                          double tolerance = 1e-10, std::size_t max_iterations = 20000);

}  // namespace asclens
