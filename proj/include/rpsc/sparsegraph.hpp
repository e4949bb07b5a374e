// Sparse self-representations and the adjacency A = |Z| + |Z|^T for TSC,
// SSC (basis pursuit or Lasso, solved by ADMM) and SSC-OMP, together with the
// no-false-connections check and per-point selection diagnostics.
//
// All builders l2-normalize the columns of X first. Ties are broken towards
// the smaller index everywhere.
#pragma once

#include "rpsc/core.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rpsc {

enum class Algorithm { tsc, ssc, sscomp };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::tsc: return "tsc";
    case Algorithm::ssc: return "ssc";
    case Algorithm::sscomp: return "sscomp";
  }
  return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "tsc") return Algorithm::tsc;
  if (name == "ssc") return Algorithm::ssc;
  if (name == "sscomp" || name == "ssc-omp" || name == "ssc_omp" || name == "omp") return Algorithm::sscomp;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

struct SparseRep {
  Index index = 0;
  std::vector<Index> support;
  Vector coefficients;                // aligned with support
  std::vector<double> residual_norms;  // OMP: ||r_s|| after each iteration
};

struct AdjacencyMatrix {
  Matrix weights;
  std::string algorithm;
  std::vector<Index> support_sizes;
  Index unconverged = 0;  // SSC columns that hit the iteration cap

  Index size() const { return weights.rows(); }
};

/// A = |Z| + |Z|^T with a zero diagonal. Column j of Z represents point j.
inline AdjacencyMatrix adjacency_from_coefficients(const Matrix& z, std::string algorithm) {
  AdjacencyMatrix out;
  out.algorithm = std::move(algorithm);
  const Matrix za = z.cwiseAbs();
  out.weights = za + za.transpose();
  out.weights.diagonal().setZero();
  out.support_sizes.resize(static_cast<std::size_t>(z.cols()));
  for (Index j = 0; j < z.cols(); ++j) out.support_sizes[j] = (z.col(j).array() != 0.0).count();
  return out;
}

namespace detail {

// Indices i != j ordered by decreasing |corr[i]|, ties to the smaller index;
// only the first `count` entries are meaningful.
inline std::vector<Index> top_by_magnitude(const Vector& corr, Index j, Index count) {
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(corr.size()));
  for (Index i = 0; i < corr.size(); ++i)
    if (i != j) idx.push_back(i);
  auto better = [&](Index a, Index b) {
    const double fa = std::abs(corr[a]), fb = std::abs(corr[b]);
    return fa > fb || (fa == fb && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + count, idx.end(), better);
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

// Minimum-norm least-squares coefficients of x on the columns `cols` of xn.
inline Vector min_norm_ls(const Matrix& xn, const std::vector<Index>& cols, const Vector& x) {
  if (cols.empty()) return Vector();
  const Matrix sub = xn(Eigen::all, cols);
  return sub.completeOrthogonalDecomposition().solve(x);
}

inline void soft_threshold(Eigen::Ref<Vector> v, double kappa) {
  for (Index i = 0; i < v.size(); ++i) {
    const double a = v[i];
    v[i] = a > kappa ? a - kappa : (a < -kappa ? a + kappa : 0.0);
  }
}

inline void require_columns(const Matrix& x, Index min_cols, const char* what) {
  if (x.cols() < min_cols)
    throw DimensionError(std::string(what) + ": need at least " + std::to_string(min_cols) + " points");
}

}  // namespace detail

// ---------------------------------------------------------------- TSC

/// Representation of point j from its q nearest neighbours by |inner product|.
/// `xn` must have unit-norm columns; `gram_col` is xn^T xn.col(j).
inline SparseRep tsc_representation(const Matrix& xn, const Vector& gram_col, Index j, Index q) {
  SparseRep rep;
  rep.index = j;
  rep.support = detail::top_by_magnitude(gram_col, j, q);
  rep.coefficients = detail::min_norm_ls(xn, rep.support, xn.col(j));
  return rep;
}

inline AdjacencyMatrix tsc_adjacency(const Matrix& x, Index q, unsigned threads = 1) {
  detail::require_columns(x, 2, "tsc_adjacency");
  const Index n = x.cols();
  if (q < 1 || q > n - 1)
    throw ConfigError("tsc_adjacency: q must lie in [1, N-1] (q=" + std::to_string(q) + ")");
  const Matrix xn = normalized_columns(x);
  const Matrix gram = xn.transpose() * xn;
  Matrix z = Matrix::Zero(n, n);
  parallel_for(n, threads, [&](Index j) {
    const SparseRep rep = tsc_representation(xn, gram.col(j), j, q);
    for (std::size_t k = 0; k < rep.support.size(); ++k) z(rep.support[k], j) = rep.coefficients[k];
  });
  AdjacencyMatrix out = adjacency_from_coefficients(z, "tsc");
  for (auto& s : out.support_sizes) s = q;
  return out;
}

// ---------------------------------------------------------------- SSC-OMP

/// Greedy representation of point j: add argmax_{i != j} |<x_i, r>| until the
/// residual norm drops to residual_tol or s_max points are selected.
/// If `labels` is non-null, `margin` receives the minimum over executed
/// iterations of (best in-class |<x_i, r>|) - (best out-of-class |<x_i, r>|),
/// both taken over the not-yet-selected candidates.
inline SparseRep omp_representation(const Matrix& xn, Index j, Index s_max, double residual_tol,
                                    const std::vector<int>* labels = nullptr, double* margin = nullptr) {
  const Index n = xn.cols();
  SparseRep rep;
  rep.index = j;
  const Vector x = xn.col(j);
  Vector r = x;
  Matrix q(xn.rows(), 0);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  taken[j] = true;
  double min_margin = std::numeric_limits<double>::infinity();

  for (Index s = 0; s < s_max; ++s) {
    if (r.norm() <= residual_tol) break;
    const Vector corr = xn.transpose() * r;
    Index pick = -1;
    double best = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double c = std::abs(corr[i]);
      if (pick < 0 || c > best) {
        best = c;
        pick = i;
      }
    }
    if (pick < 0 || best == 0.0) break;  // nothing correlates with the residual

    if (labels) {
      double in = 0.0, out = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double c = std::abs(corr[i]);
        if ((*labels)[i] == (*labels)[j])
          in = std::max(in, c);
        else
          out = std::max(out, c);
      }
      min_margin = std::min(min_margin, in - out);
    }

    taken[pick] = true;
    rep.support.push_back(pick);
    // Two passes of Gram-Schmidt against the current orthonormal basis.
    Vector v = xn.col(pick);
    const double vnorm = v.norm();
    for (int pass = 0; pass < 2 && q.cols() > 0; ++pass) v -= q * (q.transpose() * v);
    if (v.norm() > 1e-12 * std::max(vnorm, 1.0)) {
      q.conservativeResize(Eigen::NoChange, q.cols() + 1);
      q.col(q.cols() - 1) = v / v.norm();
    }
    r = x - q * (q.transpose() * x);
    rep.residual_norms.push_back(r.norm());
  }
  rep.coefficients = detail::min_norm_ls(xn, rep.support, x);
  if (margin) *margin = min_margin;
  return rep;
}

inline AdjacencyMatrix sscomp_adjacency(const Matrix& x, Index s_max, double residual_tol = 1e-6,
                                        unsigned threads = 1) {
  detail::require_columns(x, 2, "sscomp_adjacency");
  if (s_max < 1) throw ConfigError("sscomp_adjacency: s_max must be >= 1");
  if (!(residual_tol >= 0.0)) throw ConfigError("sscomp_adjacency: residual_tol must be >= 0");
  const Index n = x.cols();
  const Matrix xn = normalized_columns(x);
  Matrix z = Matrix::Zero(n, n);
  parallel_for(n, threads, [&](Index j) {
    const SparseRep rep = omp_representation(xn, j, std::min(s_max, n - 1), residual_tol);
    for (std::size_t k = 0; k < rep.support.size(); ++k) z(rep.support[k], j) = rep.coefficients[k];
  });
  return adjacency_from_coefficients(z, "sscomp");
}

// ---------------------------------------------------------------- SSC

enum class SscMode { basis_pursuit, lasso };

struct AdmmOptions {
  double rho = 1.0;
  double abs_tol = 1e-6;
  double rel_tol = 1e-4;
  Index max_iter = 400;
  Index polish_every = 10;  // attempt an exact support solve this often
};

struct SscOptions {
  SscMode mode = SscMode::lasso;
  double lambda = 0.01;
  AdmmOptions admm;
  unsigned threads = 1;
};

/// Per-column SSC solutions. A column is `certified` when its support solve
/// passed the exact optimality check (KKT for the Lasso, a dual certificate
/// for basis pursuit); `converged` additionally accepts ADMM residual
/// convergence.
struct SscCoefficients {
  Matrix z;
  std::vector<std::uint8_t> converged;  // bytes, not vector<bool>: written concurrently
  std::vector<std::uint8_t> certified;
  Index unconverged = 0;
};

namespace detail {

constexpr Index kSscBlock = 128;
constexpr Index kWarmStart = 16;  // largest warm-start support handed to the active-set polish

// Exact Lasso solve on the support/signs of `c` (entries above `cut` in
// magnitude); returns true and fills `out` if the KKT conditions hold.
inline bool polish_lasso(const Matrix& gram, Index j, const Vector& c, double lambda, Vector& out,
                         double cut = 0.0) {
  const Index n = gram.rows();
  std::vector<Index> support;
  for (Index i = 0; i < n; ++i)
    if (std::abs(c[i]) > cut && i != j) support.push_back(i);
  Vector z = Vector::Zero(n);
  if (!support.empty()) {
    const Index s = static_cast<Index>(support.size());
    Vector signs(s);
    for (Index k = 0; k < s; ++k) signs[k] = c[support[k]] > 0.0 ? 1.0 : -1.0;
    const Matrix gss = gram(support, support);
    const Vector rhs = gram(support, Eigen::all).col(j) - lambda * signs;
    const Vector zs = gss.completeOrthogonalDecomposition().solve(rhs);
    for (Index k = 0; k < s; ++k) {
      if (zs[k] * signs[k] <= 0.0) return false;
      z[support[k]] = zs[k];
    }
  }
  Vector g = gram.col(j);
  for (Index i : support) g -= gram.col(i) * z[i];
  std::vector<bool> on(static_cast<std::size_t>(n), false);
  for (Index i : support) on[i] = true;
  for (Index i = 0; i < n; ++i) {
    if (i == j) continue;
    if (on[i]) {
      const double sgn = z[i] > 0.0 ? 1.0 : -1.0;
      if (std::abs(g[i] - lambda * sgn) > 1e-6 * lambda) return false;
    } else if (std::abs(g[i]) > lambda * (1.0 + 1e-6)) {
      return false;
    }
  }
  out = z;
  return true;
}

// Feature-sign search (an active-set Lasso method) started from `start`.
// Each step either solves the equality-constrained problem on the current
// signs and line-searches to the best sign change, or, when the active
// columns are linearly dependent, slides along a null direction of the Gram
// block (which leaves the fit unchanged and does not raise the l1 norm) until
// a coefficient reaches zero. The objective never increases and the support
// stays independent, so the exact solution is reached in finitely many steps.
inline bool feature_sign_lasso(const Matrix& gram, Index j, const Vector& start, double lambda, Vector& out,
                               Index max_steps = 400) {
  const Index n = gram.rows();
  const Vector b = gram.col(j);
  Vector x = start;
  x[j] = 0.0;
  for (Index step = 0; step < max_steps; ++step) {
    std::vector<Index> active;
    for (Index i = 0; i < n; ++i)
      if (x[i] != 0.0) active.push_back(i);
    Vector g = b - gram(Eigen::all, active) * x(active);
    g[j] = 0.0;
    bool active_ok = true;
    for (Index i : active)
      if (std::abs(g[i] - lambda * (x[i] > 0.0 ? 1.0 : -1.0)) > 1e-9 * lambda) active_ok = false;
    Vector theta = Vector::Zero(n);
    for (Index i : active) theta[i] = x[i] > 0.0 ? 1.0 : -1.0;
    Index enter = -1;
    if (active_ok) {
      double worst = lambda;
      for (Index i = 0; i < n; ++i)
        if (i != j && x[i] == 0.0 && std::abs(g[i]) > worst) {
          worst = std::abs(g[i]);
          enter = i;
        }
      if (enter < 0) return polish_lasso(gram, j, x, lambda, out);
      theta[enter] = g[enter] > 0.0 ? 1.0 : -1.0;
      active.insert(std::upper_bound(active.begin(), active.end(), enter), enter);
    }
    const Index s = static_cast<Index>(active.size());
    const Vector cur = x(active);
    const Vector th = theta(active);
    const Matrix gaa = gram(active, active);
    const Eigen::LDLT<Matrix> ldlt(gaa);
    const Vector diag = ldlt.vectorD().cwiseAbs();
    if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-10 * std::max(1.0, diag.maxCoeff())) {
      const Eigen::SelfAdjointEigenSolver<Matrix> es(gaa);
      Vector d = es.eigenvectors().col(0);
      const Index e = enter < 0 ? -1 : static_cast<Index>(std::find(active.begin(), active.end(), enter) - active.begin());
      if (e >= 0 && std::abs(d[e]) > 1e-8) {
        d *= th[e] / d[e];
      } else if (th.dot(d) > 0.0) {
        d = -d;
      }
      Index hit = -1;
      double t_hit = std::numeric_limits<double>::infinity();
      for (Index k = 0; k < s; ++k)
        if (cur[k] != 0.0 && cur[k] * d[k] < 0.0 && -cur[k] / d[k] < t_hit) {
          t_hit = -cur[k] / d[k];
          hit = k;
        }
      if (hit < 0) {
        if (std::abs(th.dot(d)) > 1e-12 || e >= 0) return false;
        d = -d;
        for (Index k = 0; k < s; ++k)
          if (cur[k] != 0.0 && cur[k] * d[k] < 0.0 && -cur[k] / d[k] < t_hit) {
            t_hit = -cur[k] / d[k];
            hit = k;
          }
        if (hit < 0) return false;
      }
      for (Index k = 0; k < s; ++k) x[active[k]] = cur[k] + t_hit * d[k];
      x[active[hit]] = 0.0;
      continue;
    }
    Vector rhs(s);
    for (Index k = 0; k < s; ++k) rhs[k] = b[active[k]] - lambda * th[k];
    const Vector target = ldlt.solve(rhs);
    // Candidate points: the target and every zero crossing on the segment.
    // Along x + t (target - x) the smooth part is a quadratic in t.
    const Vector delta = target - cur;
    const double slope = (gaa * cur - b(active)).dot(delta);
    const double curv = delta.dot(gaa * delta);
    const double smooth0 = 0.5 * cur.dot(gaa * cur) - b(active).dot(cur);
    auto along = [&](double t, Index zeroed) {
      Vector v = cur + t * delta;
      if (zeroed >= 0) v[zeroed] = 0.0;
      return smooth0 + t * slope + 0.5 * t * t * curv + lambda * v.lpNorm<1>();
    };
    Vector best = x;
    best(active) = target;
    double best_f = along(1.0, -1);
    for (Index k = 0; k < s; ++k) {
      if (cur[k] == 0.0 || cur[k] * target[k] >= 0.0) continue;
      const double t = cur[k] / (cur[k] - target[k]);
      const double f = along(t, k);
      if (f < best_f) {
        best_f = f;
        best = x;
        best(active) = cur + t * delta;
        best[active[k]] = 0.0;
      }
    }
    if (best == x) break;
    x = best;
  }
  return polish_lasso(gram, j, x, lambda, out);
}

// Lasso for the columns `cols` of xn, batched: the z-update shares one
// factorization of (X^T X + rho I); z_j = 0 is imposed in the proximal step.
inline void lasso_block(const Matrix& xn, const Matrix& gram, const std::vector<Index>& cols, double lambda,
                        const AdmmOptions& opt, SscCoefficients& res) {
  const Index n = xn.cols();
  const Index p = xn.rows();
  const double rho = opt.rho;
  const bool woodbury = p < n;
  Eigen::LLT<Matrix> factor;
  if (woodbury) {
    Matrix k = xn * xn.transpose();
    k.diagonal().array() += rho;
    factor.compute(k);
  } else {
    Matrix k = gram;
    k.diagonal().array() += rho;
    factor.compute(k);
  }
  if (factor.info() != Eigen::Success) throw NumericalError("ssc: factorization failed");

  const Index b = static_cast<Index>(cols.size());
  Matrix c = Matrix::Zero(n, b), u = Matrix::Zero(n, b);
  std::vector<Index> active(static_cast<std::size_t>(b));
  std::iota(active.begin(), active.end(), Index{0});
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  for (Index iter = 1; iter <= opt.max_iter && !active.empty(); ++iter) {
    std::vector<Index> gcols;
    for (Index k : active) gcols.push_back(cols[k]);
    Matrix rhs = gram(Eigen::all, gcols) + rho * (c(Eigen::all, active) - u(Eigen::all, active));
    Matrix a;
    if (woodbury)
      a = (rhs - xn.transpose() * factor.solve(xn * rhs)) / rho;
    else
      a = factor.solve(rhs);

    std::vector<Index> still;
    for (std::size_t t = 0; t < active.size(); ++t) {
      const Index k = active[t];
      const Index j = cols[k];
      const Vector c_old = c.col(k);
      Vector v = a.col(static_cast<Index>(t)) + u.col(k);
      Vector cn = v;
      soft_threshold(cn, lambda / rho);
      cn[j] = 0.0;
      u.col(k) = v - cn;
      c.col(k) = cn;
      const double r_pri = (a.col(static_cast<Index>(t)) - cn).norm();
      const double r_dual = rho * (cn - c_old).norm();
      const double eps_pri = sqrt_n * opt.abs_tol + opt.rel_tol * std::max(a.col(static_cast<Index>(t)).norm(), cn.norm());
      const double eps_dual = sqrt_n * opt.abs_tol + opt.rel_tol * rho * u.col(k).norm();
      const bool resid_ok = r_pri <= eps_pri && r_dual <= eps_dual;
      if (resid_ok) res.converged[j] = 1;
      if (resid_ok || iter % opt.polish_every == 0) {
        // Warm start from the dominant entries of the iterate; the small
        // ones are mostly transient and make the active-set walk long.
        Vector warm = Vector::Zero(n);
        const double cut = 1e-1 * cn.cwiseAbs().maxCoeff();
        std::vector<Index> big;
        for (Index i = 0; i < n; ++i)
          if (std::abs(cn[i]) > cut) big.push_back(i);
        std::sort(big.begin(), big.end(), [&](Index l, Index r) {
          return std::abs(cn[l]) > std::abs(cn[r]) || (std::abs(cn[l]) == std::abs(cn[r]) && l < r);
        });
        if (static_cast<Index>(big.size()) > kWarmStart) big.resize(static_cast<std::size_t>(kWarmStart));
        for (Index i : big) warm[i] = cn[i];
        Vector polished;
        if (feature_sign_lasso(gram, j, warm, lambda, polished)) {
          res.z.col(j) = polished;
          res.certified[j] = 1;
          res.converged[j] = 1;
          continue;
        }
      }
      still.push_back(k);
    }
    active.swap(still);
  }
  for (Index k : active) res.z.col(cols[k]) = c.col(k);
}

// Exact solve of A_S w = b on the entries of `c` above `cut` in magnitude.
inline bool support_solve(const Matrix& a, const Vector& b, const Vector& c, double cut, std::vector<Index>& support,
                          Vector& w) {
  support.clear();
  for (Index i = 0; i < a.cols(); ++i)
    if (std::abs(c[i]) > cut) support.push_back(i);
  if (support.empty() || static_cast<Index>(support.size()) > a.rows()) return false;
  w = a(Eigen::all, support).completeOrthogonalDecomposition().solve(b);
  return (a(Eigen::all, support) * w - b).norm() <= 1e-10 * std::max(1.0, b.norm());
}

inline Vector scatter(const std::vector<Index>& support, const Vector& w, Index n) {
  Vector out = Vector::Zero(n);
  for (std::size_t k = 0; k < support.size(); ++k) out[support[k]] = w[static_cast<Index>(k)];
  return out;
}

// Basis-pursuit optimality of the support solve: needs a dual nu with
// A_S^T nu = sign(w) and |A^T nu| <= 1. The candidates are the minimum-norm
// solution and the one closest to the ADMM dual estimate `hint`.
inline bool polish_bp(const Matrix& a, const Vector& b, const Vector& c, const Vector& hint, Vector& out,
                      double cut = 0.0) {
  std::vector<Index> support;
  Vector w;
  if (!support_solve(a, b, c, cut, support, w)) return false;
  const double top = w.cwiseAbs().maxCoeff();
  if ((w.array().abs() <= 1e-9 * top).any()) {  // degenerate: a support entry vanishes
    Vector trimmed = scatter(support, w, a.cols());
    if (!support_solve(a, b, trimmed, 1e-9 * top, support, w)) return false;
  }
  Vector signs(w.size());
  for (Index k = 0; k < w.size(); ++k) {
    if (w[k] == 0.0) return false;
    signs[k] = w[k] > 0.0 ? 1.0 : -1.0;
  }
  const Matrix ast = a(Eigen::all, support).transpose();
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(ast);
  auto certifies = [&](const Vector& nu) {
    return (ast * nu - signs).cwiseAbs().maxCoeff() <= 1e-9 && (a.transpose() * nu).cwiseAbs().maxCoeff() <= 1.0 + 1e-9;
  };
  bool ok = certifies(cod.solve(signs));
  if (!ok && hint.size() == a.rows()) ok = certifies(hint + cod.solve(signs - ast * hint));
  if (!ok) return false;
  out = scatter(support, w, a.cols());
  return true;
}

// minimize ||z||_1 s.t. A z = b via ADMM with exact projection onto the affine
// set. If b is outside range(A) the projection targets the least-squares set.
inline Vector basis_pursuit(const Matrix& a, const Vector& b, const AdmmOptions& opt, bool& converged,
                            bool& certified) {
  const Index n = a.cols();
  converged = certified = false;
  if (b.norm() == 0.0) {
    converged = certified = true;
    return Vector::Zero(n);
  }
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  auto project = [&](const Vector& v) -> Vector { return v - cod.solve(a * v - b); };
  const Eigen::CompleteOrthogonalDecomposition<Matrix> at_cod(a.transpose());
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  Vector c = Vector::Zero(n), u = Vector::Zero(n), z = project(c);
  for (Index iter = 1; iter <= opt.max_iter; ++iter) {
    z = project(c - u);
    const Vector c_old = c;
    Vector v = z + u;
    c = v;
    soft_threshold(c, 1.0 / opt.rho);
    u = v - c;
    const double r_pri = (z - c).norm();
    const double r_dual = opt.rho * (c - c_old).norm();
    const double eps_pri = sqrt_n * opt.abs_tol + opt.rel_tol * std::max(z.norm(), c.norm());
    const double eps_dual = sqrt_n * opt.abs_tol + opt.rel_tol * opt.rho * u.norm();
    const bool resid_ok = r_pri <= eps_pri && r_dual <= eps_dual;
    if (resid_ok) converged = true;
    if (resid_ok || iter % opt.polish_every == 0) {
      const Vector hint = at_cod.solve(opt.rho * u);
      const double top = c.cwiseAbs().maxCoeff();
      for (double rel : {0.0, 1e-6, 1e-3, 1e-2}) {
        Vector polished;
        if (polish_bp(a, b, c, hint, polished, rel * top)) {
          certified = converged = true;
          return polished;
        }
      }
    }
  }
  // Out of iterations: try the leading-k supports of the feasible iterate.
  const Vector hint = at_cod.solve(opt.rho * u);
  std::vector<double> mags(z.data(), z.data() + n);
  for (double& v : mags) v = std::abs(v);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  for (Index k = 1; k < std::min(n, a.rows() + 1); ++k) {
    if (mags[k] == mags[k - 1]) continue;
    Vector polished;
    if (polish_bp(a, b, z, hint, polished, mags[k])) {
      certified = converged = true;
      return polished;
    }
  }
  // Lasso continuation: for small lambda the Lasso support is the basis-pursuit
  // one and r / lambda is a dual certificate.
  Matrix ab(a.rows(), n + 1);
  ab << a, b;
  const Matrix gram = ab.transpose() * ab;
  Vector lz = Vector::Zero(n + 1);
  for (double lambda : {1e-2, 1e-3, 1e-4, 1e-5}) {
    Vector next;
    if (!feature_sign_lasso(gram, n, lz, lambda, next)) break;
    lz = next;
    const Vector head = lz.head(n);
    Vector polished;
    if (polish_bp(a, b, head, (b - a * head) / lambda, polished)) {
      certified = converged = true;
      return polished;
    }
  }
  // Converged but uncertified: drop sub-tolerance entries of the sparse iterate
  // as long as the equality still holds exactly.
  if (converged) {
    std::vector<Index> support;
    Vector w;
    if (support_solve(a, b, c, 1e-6 * c.cwiseAbs().maxCoeff(), support, w)) return scatter(support, w, n);
  }
  return z;
}

}  // namespace detail

/// Signed SSC coefficient matrix (column j represents point j; Z(j,j) = 0).
/// `xn` is used as given; ssc_adjacency normalizes before calling this.
inline SscCoefficients ssc_coefficients(const Matrix& xn, const SscOptions& opt) {
  detail::require_columns(xn, 2, "ssc");
  if (opt.mode == SscMode::lasso && !(opt.lambda > 0.0)) throw ConfigError("ssc: lasso requires lambda > 0");
  if (!(opt.admm.rho > 0.0) || opt.admm.max_iter < 1 || opt.admm.polish_every < 1)
    throw ConfigError("ssc: invalid ADMM options");
  const Index n = xn.cols();
  SscCoefficients res;
  res.z = Matrix::Zero(n, n);
  res.converged.assign(static_cast<std::size_t>(n), 0);
  res.certified.assign(static_cast<std::size_t>(n), 0);

  if (opt.mode == SscMode::lasso) {
    const Matrix gram = xn.transpose() * xn;
    // Fixed-size column blocks keep results independent of the thread count.
    const Index blocks = (n + detail::kSscBlock - 1) / detail::kSscBlock;
    parallel_for(blocks, opt.threads, [&](Index blk) {
      std::vector<Index> cols;
      for (Index j = blk * detail::kSscBlock; j < std::min(n, (blk + 1) * detail::kSscBlock); ++j) cols.push_back(j);
      detail::lasso_block(xn, gram, cols, opt.lambda, opt.admm, res);
    });
  } else {
    parallel_for(n, opt.threads, [&](Index j) {
      std::vector<Index> others;
      for (Index i = 0; i < n; ++i)
        if (i != j) others.push_back(i);
      const Matrix a = xn(Eigen::all, others);
      bool conv = false, cert = false;
      const Vector w = detail::basis_pursuit(a, xn.col(j), opt.admm, conv, cert);
      for (std::size_t k = 0; k < others.size(); ++k) res.z(others[k], j) = w[static_cast<Index>(k)];
      res.converged[j] = conv;
      res.certified[j] = cert;
    });
  }
  for (Index j = 0; j < n; ++j)
    if (!res.converged[j]) ++res.unconverged;
  return res;
}

inline AdjacencyMatrix ssc_adjacency(const Matrix& x, const SscOptions& opt) {
  const SscCoefficients res = ssc_coefficients(normalized_columns(x), opt);
  AdjacencyMatrix out = adjacency_from_coefficients(res.z, "ssc");
  out.unconverged = res.unconverged;
  return out;
}

// ---------------------------------------------------------------- diagnostics

struct NfcResult {
  bool ok = true;
  Index violating_pairs = 0;
};

/// True iff every strictly positive off-diagonal weight links equal labels.
inline NfcResult no_false_connections(const Matrix& a, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != a.rows() || a.rows() != a.cols())
    throw DimensionError("no_false_connections: labels must have one entry per node");
  NfcResult out;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.cols(); ++j)
      if ((a(i, j) > 0.0 || a(j, i) > 0.0) && labels[i] != labels[j]) ++out.violating_pairs;
  out.ok = out.violating_pairs == 0;
  return out;
}

/// TSC margin per point: the q-th largest in-class |<x_i, x_j>| minus the
/// largest out-of-class one. Positive for every point implies no false
/// connections. -inf when the point's class has fewer than q other members.
inline std::vector<double> tsc_selection_margins(const Matrix& x, const std::vector<int>& labels, Index q) {
  if (labels.empty()) throw UsageError("selection_margins: ground-truth labels required");
  if (static_cast<Index>(labels.size()) != x.cols()) throw DimensionError("selection_margins: label count mismatch");
  if (q < 1) throw ConfigError("selection_margins: q must be >= 1");
  const Index n = x.cols();
  const Matrix xn = normalized_columns(x);
  const Matrix gram = (xn.transpose() * xn).cwiseAbs();
  std::vector<double> margins(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::vector<double> in;
    double out = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (labels[j] == labels[i])
        in.push_back(gram(i, j));
      else
        out = std::max(out, gram(i, j));
    }
    if (static_cast<Index>(in.size()) < q) {
      margins[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    std::nth_element(in.begin(), in.begin() + (q - 1), in.end(), std::greater<>());
    margins[i] = in[q - 1] - out;
  }
  return margins;
}

/// OMP margin per point: minimum over executed iterations of the in-class
/// minus out-of-class maximal |<x_i, r_s>|. +inf if OMP stops immediately.
inline std::vector<double> omp_selection_margins(const Matrix& x, const std::vector<int>& labels, Index s_max,
                                                 double residual_tol = 1e-6) {
  if (labels.empty()) throw UsageError("selection_margins: ground-truth labels required");
  if (static_cast<Index>(labels.size()) != x.cols()) throw DimensionError("selection_margins: label count mismatch");
  if (s_max < 1) throw ConfigError("selection_margins: s_max must be >= 1");
  const Index n = x.cols();
  const Matrix xn = normalized_columns(x);
  std::vector<double> margins(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j)
    omp_representation(xn, j, std::min(s_max, n - 1), residual_tol, &labels, &margins[j]);
  return margins;
}

}  // namespace rpsc
