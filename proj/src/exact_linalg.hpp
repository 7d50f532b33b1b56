#pragma once

// Small dense exact linear algebra used by the polytope routines.

#include "paulimag/rational.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace paulimag::detail {

using Matrix = std::vector<RationalVector>;

/// Reduced row echelon form in place. Columns are scanned in `column_order`
/// (all columns left to right when empty). Returns the pivot column of each
/// nonzero row; rows beyond the rank are zero afterwards.
std::vector<std::size_t> rref(Matrix& rows, const std::vector<std::size_t>& column_order = {});

std::size_t rank(Matrix rows);

/// Unique solution of rows · x = rhs, or nullopt when singular/inconsistent.
std::optional<RationalVector> solve_unique(Matrix rows, RationalVector rhs);

/// Any solution of rows · x = rhs (free variables set to zero), or nullopt.
std::optional<RationalVector> solve_any(Matrix rows, RationalVector rhs);

/// Dimension of the affine hull of the points.
std::size_t affine_rank(const std::vector<RationalVector>& points);

/// Determinant by Gaussian elimination.
Rational determinant(Matrix rows);

}  // namespace paulimag::detail
