#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qnn/matrix.hpp"

namespace qnn {

/// Complete QR factorization m = q * Inc * r.
///
/// For an n x c input, q is n x n orthogonal and r is k x c upper trapezoidal with
/// k = min(n, c); Inc is the n x k coordinate inclusion. Entries of r below the
/// diagonal are stored as exact zeros and the diagonal of r is non-negative.
struct CompleteQR {
  Matrix q;
  Matrix r;
};

/// Householder factorization, deterministic. Throws NonFiniteInput.
CompleteQR complete_qr(const Matrix& m);

/// Thin SVD m = u * diag(s) * v^T with singular values in descending order.
struct Svd {
  Matrix u;  // rows x p
  Vector s;  // p = min(rows, cols)
  Matrix v;  // cols x p
};

/// One-sided Jacobi SVD. Throws NonFiniteInput.
Svd svd(const Matrix& m);

/// max(rows, cols) * eps * sigma_max.
double default_rank_tolerance(const Matrix& m);

/// Number of singular values strictly above `tol` (default_rank_tolerance when absent).
std::size_t numerical_rank(const Matrix& m, std::optional<double> tol = std::nullopt);

/// Column permutation whose first k columns are linearly independent.
///
/// Greedy column-pivoted Gram-Schmidt: the column with the largest remaining residual
/// norm is taken next (ties go to the lowest index). The k pivots come first in pivot
/// order, the remaining columns follow in ascending order. Entry j of the result is
/// the original column placed at position j. Throws RankMismatch when the selected
/// columns do not have rank k at the given tolerance.
std::vector<std::size_t> pivot_permutation(const Matrix& m, std::size_t k,
                                           std::optional<double> tol = std::nullopt);

/// Moore-Penrose left inverse (b^T b)^{-1} b^T of a full-column-rank n x k matrix,
/// computed through the QR factorization. Throws RankDeficient.
Matrix left_inverse(const Matrix& b);

}  // namespace qnn
