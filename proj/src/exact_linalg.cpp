#include "exact_linalg.hpp"

#include <numeric>
#include <utility>

namespace paulimag::detail {

std::vector<std::size_t> rref(Matrix& rows, const std::vector<std::size_t>& column_order) {
  std::vector<std::size_t> pivots;
  if (rows.empty()) return pivots;
  const std::size_t cols = rows.front().size();
  std::vector<std::size_t> order = column_order;
  if (order.empty()) {
    order.resize(cols);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  std::size_t r = 0;
  for (std::size_t c : order) {
    if (r == rows.size()) break;
    std::size_t pivot = r;
    while (pivot < rows.size() && rows[pivot][c].is_zero()) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[r], rows[pivot]);
    Rational inv = 1 / rows[r][c];
    for (auto& v : rows[r]) v *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c].is_zero()) continue;
      Rational factor = rows[i][c];
      for (std::size_t j = 0; j < cols; ++j) {
        if (!rows[r][j].is_zero()) rows[i][j] -= factor * rows[r][j];
      }
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

std::size_t rank(Matrix rows) { return rref(rows).size(); }

namespace {

std::optional<RationalVector> solve_impl(Matrix rows, const RationalVector& rhs, bool require_unique) {
  if (rows.empty()) {
    return require_unique ? std::nullopt : std::optional<RationalVector>(RationalVector{});
  }
  const std::size_t cols = rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].push_back(rhs[i]);
  std::vector<std::size_t> order(cols);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto pivots = rref(rows, order);
  for (std::size_t i = pivots.size(); i < rows.size(); ++i) {
    if (!rows[i][cols].is_zero()) return std::nullopt;
  }
  if (require_unique && pivots.size() != cols) return std::nullopt;
  RationalVector x(cols, Rational(0));
  for (std::size_t i = 0; i < pivots.size(); ++i) x[pivots[i]] = rows[i][cols];
  return x;
}

}  // namespace

std::optional<RationalVector> solve_unique(Matrix rows, RationalVector rhs) {
  return solve_impl(std::move(rows), rhs, true);
}

std::optional<RationalVector> solve_any(Matrix rows, RationalVector rhs) {
  return solve_impl(std::move(rows), rhs, false);
}

std::size_t affine_rank(const std::vector<RationalVector>& points) {
  if (points.size() < 2) return 0;
  Matrix diffs;
  diffs.reserve(points.size() - 1);
  for (std::size_t i = 1; i < points.size(); ++i) {
    RationalVector d(points[i].size());
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = points[i][j] - points[0][j];
    diffs.push_back(std::move(d));
  }
  return rank(std::move(diffs));
}

Rational determinant(Matrix rows) {
  const std::size_t n = rows.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && rows[pivot][c].is_zero()) ++pivot;
    if (pivot == n) return 0;
    if (pivot != c) {
      std::swap(rows[pivot], rows[c]);
      det = -det;
    }
    det *= rows[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      if (rows[i][c].is_zero()) continue;
      Rational factor = rows[i][c] / rows[c][c];
      for (std::size_t j = c; j < n; ++j) rows[i][j] -= factor * rows[c][j];
    }
  }
  return det;
}

}  // namespace paulimag::detail
