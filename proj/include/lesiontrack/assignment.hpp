#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "lesiontrack/error.hpp"

namespace lesiontrack {

namespace detail {

template <typename Scalar>
Scalar finite_cap(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& c) {
  Scalar total = 0;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    if (std::isfinite(c.data()[k])) total += std::abs(c.data()[k]);
  }
  return Scalar(1e3) * (total + Scalar(1));
}

// Shortest-augmenting-path Hungarian method with row/column potentials.
// Returns the column of each row and leaves potentials in u, v.
template <typename Scalar>
std::vector<int> hungarian_core(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& c,
                                std::vector<Scalar>& u, std::vector<Scalar>& v) {
  const int n = static_cast<int>(c.rows());
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  u.assign(n + 1, 0);
  v.assign(n + 1, 0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);  // p[col] = row, 1-based with 0 as sentinel
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<Scalar> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace detail

/// Exact minimum-cost perfect assignment of a square cost matrix. Among all
/// optimal assignments the lexicographically smallest row->column vector is
/// returned. Non-finite entries are treated as prohibitively expensive.
template <typename Derived>
std::vector<int> solve_hungarian(const Eigen::MatrixBase<Derived>& cost) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (cost.rows() != cost.cols()) fail(ErrorKind::InvalidConfig, "hungarian needs a square matrix");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  Mat c = cost;
  const Scalar cap = detail::finite_cap(c);
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    if (!std::isfinite(c.data()[k])) c.data()[k] = cap;
  }

  std::vector<Scalar> u, v;
  std::vector<int> row_to_col = detail::hungarian_core(c, u, v);

  // Every optimal assignment lives on the tight edges of the final duals, so
  // the lexicographically smallest one is a lexicographically smallest perfect
  // matching of that subgraph.
  const Scalar scale = c.cwiseAbs().maxCoeff() + Scalar(1);
  const Scalar eps = std::numeric_limits<Scalar>::epsilon() * Scalar(64) * scale * Scalar(n);
  auto tight = [&](int i, int j) { return std::abs(c(i, j) - u[i + 1] - v[j + 1]) <= eps; };

  std::vector<int> col_to_row(n);
  for (int i = 0; i < n; ++i) col_to_row[row_to_col[i]] = i;
  std::vector<char> row_fixed(n, 0), col_fixed(n, 0);
  std::vector<int> seen_col(n, -1);
  int stamp = 0;

  // Reroutes `row` onto any free-able column ending at `goal`; true on success.
  std::function<bool(int, int, int)> reroute;
  reroute = [&](int row, int goal, int banned) -> bool {
    for (int j = 0; j < n; ++j) {
      if (j == banned || col_fixed[j] || seen_col[j] == stamp || !tight(row, j)) continue;
      seen_col[j] = stamp;
      if (j == goal || reroute(col_to_row[j], goal, banned)) {
        row_to_col[row] = j;
        col_to_row[j] = row;
        return true;
      }
    }
    return false;
  };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (col_fixed[j] || !tight(i, j)) continue;
      if (row_to_col[i] == j) break;
      const int displaced = col_to_row[j];
      const int freed = row_to_col[i];
      ++stamp;
      if (reroute(displaced, freed, j)) {
        row_to_col[i] = j;
        col_to_row[j] = i;
        break;
      }
    }
    row_fixed[i] = 1;
    col_fixed[row_to_col[i]] = 1;
  }
  return row_to_col;
}

template <typename Derived>
typename Derived::Scalar assignment_cost(const Eigen::MatrixBase<Derived>& cost, const std::vector<int>& row_to_col) {
  typename Derived::Scalar total = 0;
  for (std::size_t i = 0; i < row_to_col.size(); ++i) total += cost(static_cast<Eigen::Index>(i), row_to_col[i]);
  return total;
}

/// Source->target assignment where either side may go to a dummy node.
/// `target[i]` is a real target index or `kDummy`; real targets are used at
/// most once, the dummy any number of times.
struct Assignment {
  static constexpr int kDummy = -1;
  std::vector<int> target;
  int num_targets = 0;

  std::vector<int> appearing() const {
    std::vector<char> hit(num_targets, 0);
    for (const int t : target) {
      if (t >= 0) hit[t] = 1;
    }
    std::vector<int> out;
    for (int j = 0; j < num_targets; ++j) {
      if (!hit[j]) out.push_back(j);
    }
    return out;
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Throws InfeasibleAssignment unless every real target is used at most once.
void check_feasible(const Assignment& a, int num_sources, int num_targets);

/// Linear assignment over a dummy-extended cost matrix ((n+1) x (m+1), dummy
/// last). The matrix is padded to (n+m) x (m+n) by replicating the dummy row
/// and column so the dummy can absorb any number of lesions on both sides.
template <typename Derived>
Assignment solve_with_dummies(const Eigen::MatrixBase<Derived>& extended) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(extended.rows()) - 1;
  const int m = static_cast<int>(extended.cols()) - 1;
  if (n < 0 || m < 0) fail(ErrorKind::InvalidConfig, "extended cost matrix needs a dummy row and column");
  const int size = n + m;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> padded(size, size);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const int er = r < n ? r : n;
      const int ec = c < m ? c : m;
      padded(r, c) = extended(er, ec);
    }
  }
  const auto cols = solve_hungarian(padded);
  Assignment a{std::vector<int>(n, Assignment::kDummy), m};
  for (int i = 0; i < n; ++i) a.target[i] = cols[i] < m ? cols[i] : Assignment::kDummy;
  return a;
}

/// Calls `visit` for every feasible dummy-extended assignment of n sources to
/// m targets. Exponential; intended for n, m <= 7.
template <typename Visitor>
void enumerate_assignments(int n, int m, Visitor&& visit) {
  Assignment a{std::vector<int>(n, Assignment::kDummy), m};
  std::vector<char> used(m, 0);
  auto rec = [&](auto&& self, int i) -> void {
    if (i == n) {
      visit(static_cast<const Assignment&>(a));
      return;
    }
    a.target[i] = Assignment::kDummy;
    self(self, i + 1);
    for (int j = 0; j < m; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      a.target[i] = j;
      self(self, i + 1);
      used[j] = 0;
    }
    a.target[i] = Assignment::kDummy;
  };
  rec(rec, 0);
}

}  // namespace lesiontrack
