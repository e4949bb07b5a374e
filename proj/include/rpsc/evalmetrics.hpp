// Clustering error under the optimal matching of predicted to true labels.
#pragma once

#include "rpsc/core.hpp"

#include <limits>
#include <map>

namespace rpsc {

struct Assignment {
  std::vector<Index> row_to_col;  // row i is matched to column row_to_col[i]
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with row/column potentials, O(k^3)).
inline Assignment assignment_min_cost(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw DimensionError("assignment_min_cost: cost matrix must be square");
  const Index n = cost.rows();
  Assignment result;
  if (n == 0) return result;

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.row_to_col.assign(static_cast<std::size_t>(n), -1);
  for (Index j = 1; j <= n; ++j) result.row_to_col[match[j] - 1] = j - 1;
  for (Index i = 0; i < n; ++i) result.cost += cost(i, result.row_to_col[i]);
  return result;
}

struct Matching {
  std::map<int, int> pred_to_truth;  // predicted id -> truth id (-1: dummy)
  Index mismatches = 0;
  double ce = 0.0;
};

/// Fraction of misclustered points under the best injective relabeling.
/// Unequal cluster counts are handled by padding the contingency table.
inline Matching clustering_error(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size()) throw UsageError("clustering_error: label vectors differ in length");
  Matching out;
  if (pred.empty()) return out;

  std::map<int, Index> pred_ids, truth_ids;
  for (int p : pred) pred_ids.emplace(p, 0);
  for (int t : truth) truth_ids.emplace(t, 0);
  Index k = 0;
  for (auto& [id, idx] : pred_ids) idx = k++;
  std::vector<int> truth_of(truth_ids.size());
  k = 0;
  for (auto& [id, idx] : truth_ids) {
    truth_of[static_cast<std::size_t>(k)] = id;
    idx = k++;
  }
  const Index size = std::max<Index>(static_cast<Index>(pred_ids.size()), static_cast<Index>(truth_ids.size()));
  Matrix counts = Matrix::Zero(size, size);
  for (std::size_t n = 0; n < pred.size(); ++n) counts(pred_ids[pred[n]], truth_ids[truth[n]]) += 1.0;

  const Assignment a = assignment_min_cost(-counts);
  const double matched = -a.cost;
  for (const auto& [id, idx] : pred_ids) {
    const Index col = a.row_to_col[idx];
    out.pred_to_truth[id] = col < static_cast<Index>(truth_of.size()) ? truth_of[col] : -1;
  }
  out.mismatches = static_cast<Index>(pred.size()) - static_cast<Index>(std::llround(matched));
  out.ce = static_cast<double>(out.mismatches) / static_cast<double>(pred.size());
  return out;
}

}  // namespace rpsc
