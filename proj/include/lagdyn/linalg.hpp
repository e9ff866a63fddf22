#pragma once

#include <cstddef>

#include "lagdyn/tensor.hpp"

namespace lagdyn::linalg {

// Shared dense kernels. Both the plain evaluation paths and the autodiff
// graph call these, so values agree bitwise between the two. Reductions keep
// a fixed summation order; training reproducibility depends on it.

/// out[r x c] += or = A[r x k] * B[k x c]
void matmul(const double* a, const double* b, double* out, int r, int k, int c,
            bool accumulate = false);

/// out[r] += or = A[r x k] * x[k]
void matvec(const double* a, const double* x, double* out, int r, int k,
            bool accumulate = false);

/// out[k] += or = A^T[k x r] * x[r] with A stored r x k
void matvec_t(const double* a, const double* x, double* out, int r, int k,
              bool accumulate = false);

double dot(const double* a, const double* b, int n);

/// In-place lower Cholesky factor of a symmetric positive definite matrix.
/// Throws NumericalError (including the matrix entries) when a pivot is not
/// strictly positive.
void cholesky_factor(Tensor& a);

/// Solve L L^T x = b given the lower factor from cholesky_factor.
void cholesky_solve_factored(const Tensor& l, const double* b, double* x);

/// Factor-and-solve convenience for SPD `a`.
Tensor cholesky_solve(const Tensor& a, const Tensor& b);

} // namespace lagdyn::linalg
