// Normalized spectral clustering (Ng-Jordan-Weiss flavour on the symmetric
// Laplacian), eigengap cluster-count estimation, k-means and graph components.
#pragma once

#include "rpsc/core.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace rpsc {

/// L_sym = I - D^{-1/2} A D^{-1/2}. Isolated nodes get an identity row.
inline Matrix normalized_laplacian(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("normalized_laplacian: adjacency must be square");
  const Index n = a.rows();
  if (n > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError("normalized_laplacian: adjacency is not symmetric");
  if (n > 0 && a.minCoeff() < 0.0) throw ValidationError("normalized_laplacian: negative weight");
  Vector inv_sqrt(n);
  for (Index i = 0; i < n; ++i) {
    const double deg = a.row(i).sum();
    inv_sqrt[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Matrix lap = -(inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal());
  lap.diagonal().array() += 1.0;
  return lap;
}

struct Eigensystem {
  Vector values;   // ascending
  Matrix vectors;  // columns match values
};

inline Eigensystem laplacian_spectrum(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(normalized_laplacian(a));
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition of the Laplacian failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// argmax_{1 <= i <= L_max} (lambda_{i+1} - lambda_i), 1-based.
inline Index eigengap_from_spectrum(const Vector& ascending, Index l_max) {
  if (l_max < 1) throw ConfigError("estimate_num_clusters: L_max must be >= 1");
  const Index n = ascending.size();
  if (n <= 1) return 1;
  const Index upper = std::min(l_max, n - 1);
  Index best = 1;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (Index i = 1; i <= upper; ++i) {
    const double gap = ascending[i] - ascending[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return best;
}

inline Index estimate_num_clusters(const Matrix& a, Index l_max) {
  if (l_max < 1) throw ConfigError("estimate_num_clusters: L_max must be >= 1");
  return eigengap_from_spectrum(laplacian_spectrum(a).values, l_max);
}

struct KMeansOptions {
  Index restarts = 10;
  Index iterations = 100;
};

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;  // k x dim
  double cost = 0.0;
};

namespace detail {

inline double assign_to_centers(const Matrix& pts, const Matrix& centers, std::vector<int>& labels,
                                Vector& dist) {
  double cost = 0.0;
  for (Index i = 0; i < pts.rows(); ++i) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < centers.rows(); ++c) {
      const double d = (pts.row(i) - centers.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[i] = static_cast<int>(best);
    dist[i] = best_d;
    cost += best_d;
  }
  return cost;
}

inline Matrix kmeanspp_seed(const Matrix& pts, Index k, Rng& rng) {
  const Index n = pts.rows();
  Matrix centers(k, pts.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  centers.row(0) = pts.row(first(rng));
  Vector d2(n);
  for (Index i = 0; i < n; ++i) d2[i] = (pts.row(i) - centers.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index c = 1; c < k; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = std::uniform_int_distribution<Index>(0, n - 1)(rng);
    }
    centers.row(c) = pts.row(pick);
    for (Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], (pts.row(i) - centers.row(c)).squaredNorm());
  }
  return centers;
}

}  // namespace detail

/// Best-of-restarts Lloyd with k-means++ seeding. Rows of `pts` are points.
inline KMeansResult kmeans(const Matrix& pts, Index k, std::uint64_t seed, const KMeansOptions& opts = {}) {
  if (k < 1) throw ConfigError("kmeans: k must be >= 1");
  const Index n = pts.rows();
  if (k > n) throw ConfigError("kmeans: k exceeds the number of points");
  if (opts.restarts < 1 || opts.iterations < 1) throw ConfigError("kmeans: restarts and iterations must be >= 1");

  KMeansResult best;
  best.cost = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  std::vector<int> labels(static_cast<std::size_t>(n));
  Vector dist(n);
  for (Index restart = 0; restart < opts.restarts; ++restart) {
    Matrix centers = detail::kmeanspp_seed(pts, k, rng);
    double cost = detail::assign_to_centers(pts, centers, labels, dist);
    for (Index it = 0; it < opts.iterations; ++it) {
      Matrix sums = Matrix::Zero(k, pts.cols());
      std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
      for (Index i = 0; i < n; ++i) {
        sums.row(labels[i]) += pts.row(i);
        ++sizes[labels[i]];
      }
      for (Index c = 0; c < k; ++c) {
        if (sizes[c] > 0) {
          centers.row(c) = sums.row(c) / static_cast<double>(sizes[c]);
        } else {
          // Empty cluster: reseed from the point farthest from its center.
          Index far = 0;
          dist.maxCoeff(&far);
          centers.row(c) = pts.row(far);
          dist[far] = 0.0;
        }
      }
      const std::vector<int> previous = labels;
      cost = detail::assign_to_centers(pts, centers, labels, dist);
      if (labels == previous) break;
    }
    if (cost < best.cost) {
      best.cost = cost;
      best.labels = labels;
      best.centers = centers;
    }
  }
  return best;
}

struct SpectralResult {
  std::vector<int> labels;
  Vector eigenvalues;  // ascending L_sym spectrum
  std::optional<Index> estimated_L;
  double kmeans_cost = 0.0;
};

/// Clusters the graph into l_hat groups: the l_hat eigenvectors of L_sym with
/// smallest eigenvalues form a row embedding, nonzero rows are scaled to unit
/// norm, and k-means runs on the result. Zero rows inherit the label of the
/// nearest nonzero row.
inline SpectralResult spectral_clustering_from(const Eigensystem& eig, Index l_hat, std::uint64_t seed,
                                               const KMeansOptions& opts = {}) {
  const Index n = eig.values.size();
  if (l_hat < 1) throw ConfigError("spectral_clustering: L_hat must be >= 1");
  if (l_hat > n) throw ConfigError("spectral_clustering: L_hat exceeds the number of points");
  SpectralResult out;
  out.eigenvalues = eig.values;
  out.labels.assign(static_cast<std::size_t>(n), 0);
  if (l_hat == 1) return out;

  Matrix emb = eig.vectors.leftCols(l_hat);
  std::vector<Index> nonzero, zero;
  for (Index i = 0; i < n; ++i) {
    const double norm = emb.row(i).norm();
    if (norm > 1e-12) {
      emb.row(i) /= norm;
      nonzero.push_back(i);
    } else {
      zero.push_back(i);
    }
  }
  if (nonzero.empty()) return out;
  const Index k = std::min<Index>(l_hat, static_cast<Index>(nonzero.size()));
  const Matrix rows = emb(nonzero, Eigen::all);
  const KMeansResult km = kmeans(rows, k, seed, opts);
  out.kmeans_cost = km.cost;
  for (std::size_t r = 0; r < nonzero.size(); ++r) out.labels[nonzero[r]] = km.labels[r];
  for (Index i : zero) {
    Index nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < nonzero.size(); ++r) {
      const double d = (eig.vectors.row(i).head(l_hat) - eig.vectors.row(nonzero[r]).head(l_hat)).squaredNorm();
      if (d < best) {
        best = d;
        nearest = static_cast<Index>(r);
      }
    }
    out.labels[i] = km.labels[nearest];
  }
  return out;
}

inline SpectralResult spectral_clustering(const Matrix& a, Index l_hat, std::uint64_t seed,
                                          const KMeansOptions& opts = {}) {
  return spectral_clustering_from(laplacian_spectrum(a), l_hat, seed, opts);
}

/// Union-find over edges with weight > weight_tol; ids are 0..C-1 in order of
/// first appearance.
inline std::vector<int> connected_components(const Matrix& a, double weight_tol = 0.0) {
  if (a.rows() != a.cols()) throw DimensionError("connected_components: adjacency must be square");
  if (weight_tol < 0.0) throw ConfigError("connected_components: weight_tol must be >= 0");
  const Index n = a.rows();
  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (a(i, j) > weight_tol || a(j, i) > weight_tol) {
        const Index ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
  std::vector<int> ids(static_cast<std::size_t>(n), -1);
  std::vector<int> root_id(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (Index i = 0; i < n; ++i) {
    const Index r = find(i);
    if (root_id[r] < 0) root_id[r] = next++;
    ids[i] = root_id[r];
  }
  return ids;
}

inline Index count_components(const std::vector<int>& ids) {
  int mx = -1;
  for (int c : ids) mx = std::max(mx, c);
  return mx + 1;
}

}  // namespace rpsc
