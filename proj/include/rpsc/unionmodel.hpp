// Union-of-subspaces data model: random subspace arrangements, points drawn
// uniformly from the unit sphere of each subspace, additive Gaussian noise,
// and subspace affinity / principal angles.
#pragma once

#include "rpsc/core.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace rpsc {

struct SubspaceArrangement {
  Index ambient_dim = 0;
  std::vector<Matrix> bases;  // orthonormal m x d_l

  Index size() const { return static_cast<Index>(bases.size()); }
  std::vector<Index> dims() const {
    std::vector<Index> d;
    for (const auto& u : bases) d.push_back(u.cols());
    return d;
  }
  Index max_dim() const {
    Index d = 0;
    for (const auto& u : bases) d = std::max(d, u.cols());
    return d;
  }
  Index min_dim() const {
    Index d = bases.empty() ? 0 : bases.front().cols();
    for (const auto& u : bases) d = std::min(d, u.cols());
    return d;
  }
};

/// Column points with optional ground truth. Points are stored grouped by
/// subspace when produced by sample_points.
struct Dataset {
  Matrix points;            // m x N
  std::vector<int> labels;  // empty when ground truth is unknown
  std::vector<Index> counts;
  double noise_sigma = 0.0;

  Index dim() const { return points.rows(); }
  Index size() const { return points.cols(); }
  bool has_labels() const { return !labels.empty(); }
};

enum class ArrangementMode {
  independent,          // each basis uniform on the Stiefel manifold
  shared_intersection,  // common r-dimensional block in every subspace
  gaussian_partition,   // one m x m Gaussian sliced into blocks, spans R^m
  orthogonal,           // mutually orthogonal subspaces
};

inline std::string to_string(ArrangementMode mode) {
  switch (mode) {
    case ArrangementMode::independent: return "independent";
    case ArrangementMode::shared_intersection: return "shared_intersection";
    case ArrangementMode::gaussian_partition: return "gaussian_partition";
    case ArrangementMode::orthogonal: return "orthogonal";
  }
  return "unknown";
}

inline ArrangementMode parse_arrangement_mode(std::string_view name) {
  if (name == "independent") return ArrangementMode::independent;
  if (name == "shared_intersection" || name == "shared") return ArrangementMode::shared_intersection;
  if (name == "gaussian_partition" || name == "ambient") return ArrangementMode::gaussian_partition;
  if (name == "orthogonal") return ArrangementMode::orthogonal;
  throw ConfigError("unknown arrangement mode '" + std::string(name) + "'");
}

/// Orthonormal basis of span(a) via Householder QR with a nonnegative R
/// diagonal. The first k columns of the result span the first k columns of a.
inline Matrix orthonormalize(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix& r = qr.matrixQR();
  for (Index k = 0; k < a.cols(); ++k)
    if (r(k, k) < 0.0) q.col(k) = -q.col(k);
  return q;
}

/// Haar-distributed m x d orthonormal matrix.
inline Matrix random_orthonormal(Index m, Index d, Rng& rng) {
  return orthonormalize(gaussian_matrix(m, d, 1.0, rng));
}

inline double orthonormality_defect(const Matrix& u) {
  return (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

inline SubspaceArrangement make_arrangement(Index m, const std::vector<Index>& dims, ArrangementMode mode,
                                            Index shared_dim, std::uint64_t seed) {
  if (m < 1) throw ConfigError("arrangement: ambient dimension must be >= 1");
  if (dims.empty()) throw ConfigError("arrangement: need at least one subspace");
  for (Index d : dims)
    if (d < 1 || d > m) throw ConfigError("arrangement: subspace dimensions must lie in [1, m]");
  const Index total = std::accumulate(dims.begin(), dims.end(), Index{0});

  Rng rng(seed);
  SubspaceArrangement arr;
  arr.ambient_dim = m;
  switch (mode) {
    case ArrangementMode::independent:
      for (Index d : dims) arr.bases.push_back(random_orthonormal(m, d, rng));
      break;
    case ArrangementMode::shared_intersection: {
      const Index d = dims.front();
      for (Index dl : dims)
        if (dl != d) throw ConfigError("shared_intersection: all subspaces must have equal dimension");
      if (shared_dim < 0 || shared_dim >= d)
        throw ConfigError("shared_intersection: need 0 <= r < d");
      const Matrix common = shared_dim > 0 ? random_orthonormal(m, shared_dim, rng) : Matrix(m, 0);
      for (std::size_t l = 0; l < dims.size(); ++l) {
        Matrix basis(m, d);
        basis.leftCols(shared_dim) = common;
        basis.rightCols(d - shared_dim) = random_orthonormal(m, d - shared_dim, rng);
        arr.bases.push_back(orthonormalize(basis));
      }
      break;
    }
    case ArrangementMode::gaussian_partition: {
      if (total != m) throw ConfigError("gaussian_partition: subspace dimensions must sum to m");
      const Matrix v = gaussian_matrix(m, m, 1.0, rng);
      Index offset = 0;
      for (Index d : dims) {
        arr.bases.push_back(orthonormalize(v.middleCols(offset, d)));
        offset += d;
      }
      break;
    }
    case ArrangementMode::orthogonal: {
      if (total > m) throw ConfigError("orthogonal: subspace dimensions must sum to at most m");
      const Matrix q = random_orthonormal(m, total, rng);
      Index offset = 0;
      for (Index d : dims) {
        arr.bases.push_back(q.middleCols(offset, d));
        offset += d;
      }
      break;
    }
  }
  return arr;
}

/// y = U^(l) a with a uniform on the unit sphere of R^{d_l}.
inline Dataset sample_points(const SubspaceArrangement& arr, const std::vector<Index>& counts,
                             std::uint64_t seed) {
  if (static_cast<Index>(counts.size()) != arr.size())
    throw DimensionError("sample_points: need one count per subspace");
  for (Index n : counts)
    if (n < 1) throw ConfigError("sample_points: counts must be >= 1");
  const Index total = std::accumulate(counts.begin(), counts.end(), Index{0});

  Rng rng(seed);
  Dataset ds;
  ds.points.resize(arr.ambient_dim, total);
  ds.labels.reserve(static_cast<std::size_t>(total));
  ds.counts = counts;
  Index col = 0;
  for (Index l = 0; l < arr.size(); ++l) {
    const Matrix& u = arr.bases[l];
    Matrix coeffs = gaussian_matrix(u.cols(), counts[l], 1.0, rng);
    for (Index j = 0; j < coeffs.cols(); ++j) {
      // A zero Gaussian draw has probability zero; guard anyway.
      double n = coeffs.col(j).norm();
      while (n == 0.0) {
        coeffs.col(j) = gaussian_matrix(u.cols(), 1, 1.0, rng);
        n = coeffs.col(j).norm();
      }
      coeffs.col(j) /= n;
    }
    ds.points.middleCols(col, counts[l]) = u * coeffs;
    for (Index j = 0; j < counts[l]; ++j) ds.labels.push_back(static_cast<int>(l));
    col += counts[l];
  }
  return ds;
}

/// Adds an independent N(0, (sigma^2/m) I) vector to every column.
inline Dataset add_noise(Dataset ds, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ConfigError("add_noise: sigma must be >= 0");
  ds.noise_sigma = sigma;
  if (sigma == 0.0) return ds;
  Rng rng(seed);
  const double stddev = sigma / std::sqrt(static_cast<double>(ds.points.rows()));
  ds.points += gaussian_matrix(ds.points.rows(), ds.points.cols(), stddev, rng);
  return ds;
}

namespace detail {
inline void require_orthonormal(const Matrix& u, const char* what) {
  if (u.cols() == 0 || orthonormality_defect(u) > 1e-8)
    throw ValidationError(std::string(what) + ": basis is not orthonormal");
}
}  // namespace detail

/// Singular values of Uk^T Ul clamped to [0, 1], descending.
inline Vector canonical_cosines(const Matrix& uk, const Matrix& ul) {
  detail::require_orthonormal(uk, "canonical_cosines");
  detail::require_orthonormal(ul, "canonical_cosines");
  if (uk.rows() != ul.rows()) throw DimensionError("canonical_cosines: ambient dimensions differ");
  Eigen::JacobiSVD<Matrix> svd(uk.transpose() * ul);
  return svd.singularValues().cwiseMax(0.0).cwiseMin(1.0);
}

/// Principal angles, ascending in [0, pi/2]. Small angles come from the
/// sines (singular values of the residual of projecting one basis onto the
/// other), since acos loses half the digits near cos = 1.
inline std::vector<double> principal_angles(const Matrix& uk, const Matrix& ul) {
  const Vector cosines = canonical_cosines(uk, ul);
  const Matrix& wide = uk.cols() >= ul.cols() ? uk : ul;
  const Matrix& narrow = uk.cols() >= ul.cols() ? ul : uk;
  Eigen::JacobiSVD<Matrix> svd(narrow - wide * (wide.transpose() * narrow));
  Vector sines = svd.singularValues().cwiseMin(1.0);
  std::sort(sines.begin(), sines.end());
  std::vector<double> angles(static_cast<std::size_t>(cosines.size()));
  for (Index i = 0; i < cosines.size(); ++i)
    angles[i] = cosines[i] * cosines[i] < 0.5 ? std::acos(cosines[i]) : std::asin(sines[i]);
  std::sort(angles.begin(), angles.end());
  return angles;
}

/// ||Uk^T Ul||_F / sqrt(min(dk, dl)), clamped to [0, 1].
inline double affinity(const Matrix& uk, const Matrix& ul) {
  detail::require_orthonormal(uk, "affinity");
  detail::require_orthonormal(ul, "affinity");
  if (uk.rows() != ul.rows()) throw DimensionError("affinity: ambient dimensions differ");
  const double denom = std::sqrt(static_cast<double>(std::min(uk.cols(), ul.cols())));
  return std::clamp((uk.transpose() * ul).norm() / denom, 0.0, 1.0);
}

inline double max_affinity(const SubspaceArrangement& arr) {
  double best = 0.0;
  for (Index k = 0; k < arr.size(); ++k)
    for (Index l = k + 1; l < arr.size(); ++l) best = std::max(best, affinity(arr.bases[k], arr.bases[l]));
  return best;
}

}  // namespace rpsc
