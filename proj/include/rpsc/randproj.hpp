// Random projection operators: Gaussian (GRP), fast randomly-signed
// subsampled DFT (FRP) and the identity.
//
// FRP convention: Phi = sqrt(2/p) * Re(F_sel) * diag(d), where F_sel holds p
// rows of the unitary m-point DFT (entry (j,k) = exp(-2 pi i jk/m)/sqrt(m)).
// The factor 2 compensates for discarding the imaginary part, so that
// E||Phi x||^2 is close to ||x||^2. Downstream clustering normalizes points, so
// the global scale does not affect results.
#pragma once

#include "rpsc/core.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <string>

namespace rpsc {

enum class ProjectionKind { gaussian, fast_dft, identity };

inline std::string to_string(ProjectionKind kind) {
  switch (kind) {
    case ProjectionKind::gaussian: return "gaussian";
    case ProjectionKind::fast_dft: return "fast_dft";
    case ProjectionKind::identity: return "identity";
  }
  return "unknown";
}

inline ProjectionKind parse_projection_kind(std::string_view name) {
  if (name == "gaussian" || name == "grp") return ProjectionKind::gaussian;
  if (name == "fast_dft" || name == "frp") return ProjectionKind::fast_dft;
  if (name == "identity" || name == "none") return ProjectionKind::identity;
  throw ConfigError("unknown projection kind '" + std::string(name) + "'");
}

class ProjectionOperator {
 public:
  static ProjectionOperator make(ProjectionKind kind, Index m, Index p, std::uint64_t seed) {
    if (m < 1 || p < 1) throw DimensionError("projection requires m >= 1 and p >= 1");
    if (kind != ProjectionKind::gaussian && p > m)
      throw DimensionError("projection kind " + to_string(kind) + " requires p <= m (p=" +
                           std::to_string(p) + ", m=" + std::to_string(m) + ")");
    if (kind == ProjectionKind::identity && p != m)
      throw DimensionError("identity projection requires p == m");

    ProjectionOperator op(kind, m, p, seed);
    Rng rng(seed);
    switch (kind) {
      case ProjectionKind::gaussian:
        op.gaussian_ = gaussian_matrix(p, m, 1.0 / std::sqrt(static_cast<double>(p)), rng);
        break;
      case ProjectionKind::fast_dft: {
        op.signs_.resize(m);
        std::bernoulli_distribution coin(0.5);
        for (Index k = 0; k < m; ++k) op.signs_[k] = coin(rng) ? 1.0 : -1.0;
        // Partial Fisher-Yates: the first p entries form a uniform sample
        // without replacement.
        std::vector<Index> perm(static_cast<std::size_t>(m));
        std::iota(perm.begin(), perm.end(), Index{0});
        for (Index i = 0; i < p; ++i) {
          std::uniform_int_distribution<Index> pick(i, m - 1);
          std::swap(perm[i], perm[pick(rng)]);
        }
        op.rows_.assign(perm.begin(), perm.begin() + p);
        break;
      }
      case ProjectionKind::identity:
        break;
    }
    return op;
  }

  ProjectionKind kind() const { return kind_; }
  Index ambient_dim() const { return m_; }
  Index target_dim() const { return p_; }
  std::uint64_t seed() const { return seed_; }
  const Vector& signs() const { return signs_; }
  const std::vector<Index>& rows() const { return rows_; }
  const Matrix& gaussian() const { return gaussian_; }

  /// X = Phi * Y, column by column. The FRP path uses one length-m FFT per
  /// column and never forms Phi.
  Matrix apply(const Matrix& y) const {
    if (y.rows() != m_)
      throw DimensionError("apply: data has " + std::to_string(y.rows()) +
                           " rows, operator expects " + std::to_string(m_));
    switch (kind_) {
      case ProjectionKind::identity: return y;
      case ProjectionKind::gaussian: return gaussian_ * y;
      case ProjectionKind::fast_dft: break;
    }
    const double scale = std::sqrt(2.0 / static_cast<double>(p_)) / std::sqrt(static_cast<double>(m_));
    Eigen::FFT<double> fft;
    std::vector<double> signed_col(static_cast<std::size_t>(m_));
    std::vector<std::complex<double>> spectrum;
    Matrix out(p_, y.cols());
    for (Index c = 0; c < y.cols(); ++c) {
      for (Index k = 0; k < m_; ++k) signed_col[k] = signs_[k] * y(k, c);
      fft.fwd(spectrum, signed_col);
      for (Index i = 0; i < p_; ++i) out(i, c) = scale * spectrum[rows_[i]].real();
    }
    return out;
  }

  /// Materialized p x m matrix (reference path for tests and small m).
  Matrix dense() const {
    switch (kind_) {
      case ProjectionKind::identity: return Matrix::Identity(m_, m_);
      case ProjectionKind::gaussian: return gaussian_;
      case ProjectionKind::fast_dft: break;
    }
    const double scale = std::sqrt(2.0 / static_cast<double>(p_)) / std::sqrt(static_cast<double>(m_));
    Matrix phi(p_, m_);
    for (Index i = 0; i < p_; ++i) {
      for (Index k = 0; k < m_; ++k) {
        // Reduce jk mod m before the trig call to keep the angle small.
        const auto jk = static_cast<double>((rows_[i] * k) % m_);
        phi(i, k) = scale * std::cos(2.0 * std::numbers::pi * jk / static_cast<double>(m_)) * signs_[k];
      }
    }
    return phi;
  }

 private:
  ProjectionOperator(ProjectionKind kind, Index m, Index p, std::uint64_t seed)
      : kind_(kind), m_(m), p_(p), seed_(seed) {}

  ProjectionKind kind_;
  Index m_;
  Index p_;
  std::uint64_t seed_;
  Matrix gaussian_;
  Vector signs_;
  std::vector<Index> rows_;
};

inline ProjectionOperator make_projection(ProjectionKind kind, Index m, Index p, std::uint64_t seed) {
  return ProjectionOperator::make(kind, m, p, seed);
}

inline Matrix apply(const ProjectionOperator& op, const Matrix& y) { return op.apply(y); }

/// Fraction of independent operator draws with | ||Phi x||^2 - 1 | >= t.
inline double concentration_probe(ProjectionKind kind, Index m, Index p, const Vector& x, double t,
                                  Index trials, std::uint64_t seed) {
  if (x.size() != m) throw DimensionError("concentration_probe: x must have length m");
  if (std::abs(x.norm() - 1.0) > 1e-8) throw ValidationError("concentration_probe: x must be a unit vector");
  if (trials < 1) throw ConfigError("concentration_probe: trials must be >= 1");
  if (!(t > 0.0)) throw ConfigError("concentration_probe: t must be positive");
  Index exceed = 0;
  const Matrix col = x;
  for (Index k = 0; k < trials; ++k) {
    const auto op = make_projection(kind, m, p, derive_seed({seed, static_cast<std::uint64_t>(k)}));
    const double sq = op.apply(col).squaredNorm();
    if (std::abs(sq - 1.0) >= t) ++exceed;
  }
  return static_cast<double>(exceed) / static_cast<double>(trials);
}

}  // namespace rpsc
