#pragma once

// Simplex on the dual of  max c·x  s.t.  A x <= b,  E x = f,  x free.
//
// The dual  min b·y + f·(z+ - z-)  s.t.  A^T y + E^T (z+ - z-) = c,  y, z± >= 0
// has one tableau row per primal variable, which keeps pivots cheap when the
// primal has many rows and few variables (the usual shape here). Bland's rule
// is used throughout, so runs are deterministic and terminate.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace paulimag::detail {

template <class T>
struct ExactArithmetic {
  static bool is_zero(const T& v) { return v == 0; }
  static bool positive(const T& v) { return v > 0; }
  static bool negative(const T& v) { return v < 0; }
};

struct FloatArithmetic {
  static constexpr double eps = 1e-10;
  static bool is_zero(double v) { return std::fabs(v) <= eps; }
  static bool positive(double v) { return v > eps; }
  static bool negative(double v) { return v < -eps; }
};

enum class SimplexStatus { Optimal, PrimalInfeasible, PrimalUnbounded };

template <class T>
struct SimplexOutcome {
  SimplexStatus status = SimplexStatus::PrimalInfeasible;
  T value{};
  std::vector<T> x;
  std::vector<T> y;  // one per inequality row
  std::vector<T> z;  // one per equality row
  /// Inequality rows whose dual column ended in the basis.
  std::vector<std::size_t> basic_inequalities;
};

template <class T, class Arith = ExactArithmetic<T>>
class DualSimplex {
 public:
  using Matrix = std::vector<std::vector<T>>;

  DualSimplex(const Matrix& a, const std::vector<T>& b, const Matrix& e, const std::vector<T>& f,
              std::size_t dimension)
      : a_(a), b_(b), e_(e), f_(f), n_(dimension) {}

  SimplexOutcome<T> maximize(const std::vector<T>& c) const {
    SimplexOutcome<T> out;
    auto run = solve(c);
    if (run.status == RunStatus::DualInfeasible) {
      // Primal is either infeasible or unbounded; decide with a zero objective.
      auto probe = solve(std::vector<T>(n_, T(0)));
      out.status = probe.status == RunStatus::DualUnbounded ? SimplexStatus::PrimalInfeasible
                                                            : SimplexStatus::PrimalUnbounded;
      return out;
    }
    if (run.status == RunStatus::DualUnbounded) {
      out.status = SimplexStatus::PrimalInfeasible;
      return out;
    }
    out.status = SimplexStatus::Optimal;
    out.x = std::move(run.x);
    out.y = std::move(run.y);
    out.z = std::move(run.z);
    out.basic_inequalities = std::move(run.basic_inequalities);
    T value(0);
    for (std::size_t j = 0; j < b_.size(); ++j) {
      if (!Arith::is_zero(out.y[j])) value += out.y[j] * b_[j];
    }
    for (std::size_t k = 0; k < f_.size(); ++k) {
      if (!Arith::is_zero(out.z[k])) value += out.z[k] * f_[k];
    }
    out.value = value;
    return out;
  }

 private:
  enum class RunStatus { Optimal, DualInfeasible, DualUnbounded };

  struct Run {
    RunStatus status = RunStatus::Optimal;
    std::vector<T> x, y, z;
    std::vector<std::size_t> basic_inequalities;
  };

  Run solve(const std::vector<T>& c) const {
    const std::size_t m = a_.size();
    const std::size_t q = e_.size();
    const std::size_t real_cols = m + 2 * q;
    const std::size_t cols = real_cols + n_;
    const std::size_t rhs = cols;

    std::vector<int> sign(n_, 1);
    Matrix t(n_ + 1, std::vector<T>(cols + 1, T(0)));
    for (std::size_t i = 0; i < n_; ++i) {
      sign[i] = Arith::negative(c[i]) ? -1 : 1;
      const T s(sign[i]);
      for (std::size_t j = 0; j < m; ++j) t[i][j] = s * a_[j][i];
      for (std::size_t k = 0; k < q; ++k) {
        t[i][m + k] = s * e_[k][i];
        t[i][m + q + k] = -(s * e_[k][i]);
      }
      t[i][real_cols + i] = T(1);
      t[i][rhs] = s * c[i];
    }
    std::vector<std::size_t> basis(n_);
    for (std::size_t i = 0; i < n_; ++i) basis[i] = real_cols + i;

    auto is_artificial = [&](std::size_t col) { return col >= real_cols; };

    // Phase 1: minimize the artificial sum.
    auto& obj = t[n_];
    for (std::size_t j = 0; j <= cols; ++j) obj[j] = T(0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < real_cols; ++j) obj[j] -= t[i][j];
      obj[rhs] -= t[i][rhs];
    }
    if (!iterate(t, basis, real_cols)) {
      // Phase 1 is bounded below by zero; cannot happen.
      return Run{RunStatus::DualInfeasible, {}, {}, {}, {}};
    }
    if (Arith::negative(t[n_][rhs])) return Run{RunStatus::DualInfeasible, {}, {}, {}, {}};

    // Drive remaining artificials out of the basis where a real column allows.
    for (std::size_t i = 0; i < n_; ++i) {
      if (!is_artificial(basis[i])) continue;
      for (std::size_t j = 0; j < real_cols; ++j) {
        if (!Arith::is_zero(t[i][j])) {
          pivot(t, basis, i, j);
          break;
        }
      }
    }

    // Phase 2.
    std::vector<T> cost(cols, T(0));
    for (std::size_t j = 0; j < m; ++j) cost[j] = b_[j];
    for (std::size_t k = 0; k < q; ++k) {
      cost[m + k] = f_[k];
      cost[m + q + k] = -f_[k];
    }
    for (std::size_t j = 0; j <= cols; ++j) obj[j] = j < cols ? cost[j] : T(0);
    for (std::size_t i = 0; i < n_; ++i) {
      const T& cb = cost[basis[i]];
      if (Arith::is_zero(cb)) continue;
      for (std::size_t j = 0; j <= cols; ++j) {
        if (!Arith::is_zero(t[i][j])) obj[j] -= cb * t[i][j];
      }
    }
    if (!iterate(t, basis, real_cols)) return Run{RunStatus::DualUnbounded, {}, {}, {}, {}};

    Run run;
    run.status = RunStatus::Optimal;
    run.y.assign(m, T(0));
    run.z.assign(q, T(0));
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t col = basis[i];
      if (col < m) {
        run.y[col] = t[i][rhs];
        run.basic_inequalities.push_back(col);
      } else if (col < m + q) {
        run.z[col - m] += t[i][rhs];
      } else if (col < real_cols) {
        run.z[col - m - q] -= t[i][rhs];
      }
    }
    run.x.assign(n_, T(0));
    for (std::size_t k = 0; k < n_; ++k) {
      T acc(0);
      for (std::size_t i = 0; i < n_; ++i) {
        const T& cb = cost[basis[i]];
        const T& inv = t[i][real_cols + k];
        if (!Arith::is_zero(cb) && !Arith::is_zero(inv)) acc += cb * inv;
      }
      run.x[k] = sign[k] < 0 ? T(-acc) : acc;
    }
    return run;
  }

  /// Runs Bland pivots on the objective row. Artificial columns never enter.
  /// Returns false when an entering column has no positive entry (unbounded).
  bool iterate(Matrix& t, std::vector<std::size_t>& basis, std::size_t real_cols) const {
    const std::size_t rhs = t[0].size() - 1;
    const std::size_t max_pivots = 50000;
    for (std::size_t count = 0; count < max_pivots; ++count) {
      const auto& obj = t[n_];
      std::size_t entering = real_cols;
      for (std::size_t j = 0; j < real_cols; ++j) {
        if (Arith::negative(obj[j])) {
          entering = j;
          break;
        }
      }
      if (entering == real_cols) return true;
      std::optional<std::size_t> leaving;
      T best_ratio{};
      for (std::size_t i = 0; i < n_; ++i) {
        if (!Arith::positive(t[i][entering])) continue;
        T ratio = t[i][rhs] / t[i][entering];
        bool take = !leaving;
        if (!take) {
          const T diff = ratio - best_ratio;
          take = Arith::negative(diff) || (Arith::is_zero(diff) && basis[i] < basis[*leaving]);
        }
        if (take) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (!leaving) return false;
      pivot(t, basis, *leaving, entering);
    }
    return true;
  }

  static void pivot(Matrix& t, std::vector<std::size_t>& basis, std::size_t row, std::size_t col) {
    const std::size_t width = t[row].size();
    const T inv = T(1) / t[row][col];
    for (std::size_t j = 0; j < width; ++j) {
      if (!Arith::is_zero(t[row][j])) t[row][j] *= inv;
    }
    t[row][col] = T(1);
    std::vector<std::size_t> nonzero;
    for (std::size_t j = 0; j < width; ++j) {
      if (!Arith::is_zero(t[row][j])) nonzero.push_back(j);
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == row || Arith::is_zero(t[i][col])) continue;
      const T factor = t[i][col];
      for (std::size_t j : nonzero) t[i][j] -= factor * t[row][j];
      t[i][col] = T(0);
    }
    basis[row] = col;
  }

  const Matrix& a_;
  const std::vector<T>& b_;
  const Matrix& e_;
  const std::vector<T>& f_;
  std::size_t n_;
};

}  // namespace paulimag::detail
