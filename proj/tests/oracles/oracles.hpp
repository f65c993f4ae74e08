#pragma once

// Deliberately naive reference implementations. None of these call into the
// library code they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace oracle {

/// Linear-scan nearest row; ties to the lowest index. `l1` selects the metric.
template <typename Points, typename Query>
std::pair<int, double> nearest_row(const Points& pts, const Query& q, bool l1) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    double d = 0;
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      const double diff = pts(i, k) - q(k);
      d += l1 ? std::abs(diff) : diff * diff;
    }
    if (!l1) d = std::sqrt(d);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return {best, best_d};
}

/// Minimum permutation cost by enumerating all n! permutations.
inline double min_permutation_cost(const Eigen::MatrixXd& c) {
  std::vector<int> p(c.rows());
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += c(static_cast<Eigen::Index>(i), p[i]);
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return p.empty() ? 0.0 : best;
}

/// Source -> target map with -1 for the dummy.
using Map = std::vector<int>;

/// Loss of `map` over dummy-extended matrices, re-summed from scratch. Unary:
/// every source lesion's cell plus the dummy-row cell of every unmatched
/// target. Binary: every ordered pair of distinct source lesions, halved.
inline double straight_loss(const Map& map, const Eigen::MatrixXd& u, const Eigen::MatrixXd& ds,
                            const Eigen::MatrixXd& dt, double alpha, double* unary_out = nullptr,
                            double* binary_out = nullptr) {
  const int n = static_cast<int>(u.rows()) - 1, m = static_cast<int>(u.cols()) - 1;
  std::vector<bool> hit(m, false);
  std::vector<int> col(n);
  double unary = 0, binary = 0;
  for (int i = 0; i < n; ++i) {
    col[i] = map[i] < 0 ? m : map[i];
    if (map[i] >= 0) hit[map[i]] = true;
    unary += u(i, col[i]);
  }
  for (int j = 0; j < m; ++j) {
    if (!hit[j]) unary += u(n, j);
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (i != k) binary += std::abs(ds(i, k) - dt(col[i], col[k]));
    }
  }
  binary *= 0.5;
  if (unary_out) *unary_out = unary;
  if (binary_out) *binary_out = binary;
  return alpha * unary + (1 - alpha) * binary;
}

/// Every injective partial map from n sources into m targets.
inline void all_maps(int n, int m, std::vector<Map>& out) {
  Map cur(n, -1);
  std::vector<bool> used(m, false);
  auto rec = [&](auto&& self, int i) -> void {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    cur[i] = -1;
    self(self, i + 1);
    for (int j = 0; j < m; ++j) {
      if (used[j]) continue;
      used[j] = true;
      cur[i] = j;
      self(self, i + 1);
      used[j] = false;
    }
    cur[i] = -1;
  };
  rec(rec, 0);
}

struct QapOptimum {
  double loss = std::numeric_limits<double>::infinity();
  int num_optimal = 0;
  Map map;
};

inline QapOptimum brute_force_qap(const Eigen::MatrixXd& u, const Eigen::MatrixXd& ds, const Eigen::MatrixXd& dt,
                                  double alpha) {
  std::vector<Map> maps;
  all_maps(static_cast<int>(u.rows()) - 1, static_cast<int>(u.cols()) - 1, maps);
  QapOptimum best;
  for (const auto& mp : maps) {
    const double l = straight_loss(mp, u, ds, dt, alpha);
    if (l < best.loss - 1e-12) {
      best = {l, 1, mp};
    } else if (std::abs(l - best.loss) <= 1e-12) {
      ++best.num_optimal;
    }
  }
  return best;
}

/// Maximum cardinality of a one-to-one matching in a boolean compatibility
/// matrix, by trying every subset-free assignment recursively.
inline int max_bipartite(const std::vector<std::vector<bool>>& ok, std::size_t row = 0,
                         std::vector<bool>* used_cols = nullptr) {
  std::vector<bool> local;
  if (!used_cols) {
    local.assign(ok.empty() ? 0 : ok[0].size(), false);
    used_cols = &local;
  }
  if (row == ok.size()) return 0;
  int best = max_bipartite(ok, row + 1, used_cols);
  for (std::size_t c = 0; c < ok[row].size(); ++c) {
    if (!ok[row][c] || (*used_cols)[c]) continue;
    (*used_cols)[c] = true;
    best = std::max(best, 1 + max_bipartite(ok, row + 1, used_cols));
    (*used_cols)[c] = false;
  }
  return best;
}

/// All-point interpolated AP from a ranked list of hit flags: sum over recall
/// steps of the best precision at that recall or beyond.
inline double all_point_ap(const std::vector<bool>& ranked_hits, int num_gt) {
  std::vector<double> prec, rec;
  int tp = 0;
  for (std::size_t k = 0; k < ranked_hits.size(); ++k) {
    tp += ranked_hits[k];
    prec.push_back(static_cast<double>(tp) / (k + 1));
    rec.push_back(static_cast<double>(tp) / num_gt);
  }
  double ap = 0, prev_r = 0;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    double best = 0;
    for (std::size_t l = k; l < rec.size(); ++l) best = std::max(best, prec[l]);
    ap += (rec[k] - prev_r) * best;
    prev_r = rec[k];
  }
  return ap;
}

/// Random symmetric distance-like matrix from points in the unit square, scaled.
inline Eigen::MatrixXd random_points_distances(int k, std::mt19937_64& rng, double scale,
                                               Eigen::MatrixX2d* points = nullptr) {
  std::uniform_real_distribution<double> uni(0.0, scale);
  Eigen::MatrixX2d p(k, 2);
  for (int i = 0; i < k; ++i) p.row(i) << uni(rng), uni(rng);
  Eigen::MatrixXd d(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) d(i, j) = (p.row(i) - p.row(j)).norm();
  }
  if (points) *points = p;
  return d;
}

}  // namespace oracle
