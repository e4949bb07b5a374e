// Closed-form clustering conditions for TSC, SSC and SSC-OMP applied to
// randomly projected data, plus the noise phase-transition curve
//   sqrt(d/p) * (c1 + sigma * (c2 + sigma)) = c3.
// All logarithms are natural. c_tilde is the constant of the projection's
// concentration inequality P(| ||Phi x||^2 - ||x||^2 | >= t ||x||^2) <= 2 exp(-c_tilde t^2 p).
#pragma once

#include "rpsc/core.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace rpsc {

/// Inputs echoed into every report; NaN marks a field the condition ignores.
struct ConditionInputs {
  static constexpr double unused = std::numeric_limits<double>::quiet_NaN();
  double max_aff = unused;
  double d_max = unused;
  double d_min = unused;
  double p = unused;
  double N = unused;
  double L = unused;
  double rho_min = unused;
  double sigma = unused;
  double m = unused;
  double c_tilde = unused;
  double tau = unused;
};

struct ConditionReport {
  std::string condition;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool satisfied = false;
  ConditionInputs inputs;
};

namespace detail {

inline ConditionReport make_report(std::string name, double lhs, double rhs, const ConditionInputs& in) {
  ConditionReport r;
  r.condition = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.satisfied = lhs <= rhs;
  r.inputs = in;
  return r;
}

inline void check_common(double max_aff, double d_max, double p, double n_points, double c_tilde) {
  if (!(max_aff >= 0.0 && max_aff <= 1.0)) throw DomainError("max_aff must lie in [0, 1]");
  if (!(d_max > 0.0)) throw DomainError("d_max must be positive");
  if (!(p > 0.0)) throw DomainError("p must be positive");
  if (!(c_tilde > 0.0)) throw DomainError("c_tilde must be positive");
  if (!(n_points >= 3.0)) throw DomainError("N must be >= 3 so that ln N > 1");
}

inline void check_rho(double rho_min, double tau, double n_subspaces) {
  if (!(rho_min > 1.0)) throw DomainError("rho_min must exceed 1");
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  if (!(n_subspaces >= 1.0)) throw DomainError("L must be >= 1");
}

}  // namespace detail

/// TSC, noiseless: aff + sqrt(11/(3 c)) sqrt(d_max/p) <= 1/(15 ln N).
inline ConditionReport tsc_condition(double max_aff, double d_max, double p, double n_points,
                                     double c_tilde) {
  detail::check_common(max_aff, d_max, p, n_points, c_tilde);
  const double lhs = max_aff + std::sqrt(11.0 / (3.0 * c_tilde)) * std::sqrt(d_max / p);
  const double rhs = 1.0 / (15.0 * std::log(n_points));
  ConditionInputs in;
  in.max_aff = max_aff;
  in.d_max = d_max;
  in.p = p;
  in.N = n_points;
  in.sigma = 0.0;
  in.c_tilde = c_tilde;
  return detail::make_report("tsc", lhs, rhs, in);
}

/// SSC: aff + sqrt((28 d_max + 8 ln L + 2 tau)/(3 c p)) <= sqrt(ln rho_min)/(65 ln N).
inline ConditionReport ssc_condition(double max_aff, double d_max, double p, double n_points,
                                     double n_subspaces, double rho_min, double tau, double c_tilde) {
  detail::check_common(max_aff, d_max, p, n_points, c_tilde);
  detail::check_rho(rho_min, tau, n_subspaces);
  const double lhs =
      max_aff + std::sqrt((28.0 * d_max + 8.0 * std::log(n_subspaces) + 2.0 * tau) / (3.0 * c_tilde * p));
  const double rhs = std::sqrt(std::log(rho_min)) / (65.0 * std::log(n_points));
  ConditionInputs in;
  in.max_aff = max_aff;
  in.d_max = d_max;
  in.p = p;
  in.N = n_points;
  in.L = n_subspaces;
  in.rho_min = rho_min;
  in.tau = tau;
  in.c_tilde = c_tilde;
  return detail::make_report("ssc", lhs, rhs, in);
}

/// SSC-OMP: aff + sqrt((28 d_max + 8 ln L + 2 tau)/(12 c p)) sqrt(d_max/d_min)
///          <= (3/200) sqrt(ln rho_min)/ln N.
inline ConditionReport sscomp_condition(double max_aff, double d_max, double d_min, double p,
                                        double n_points, double n_subspaces, double rho_min, double tau,
                                        double c_tilde) {
  detail::check_common(max_aff, d_max, p, n_points, c_tilde);
  detail::check_rho(rho_min, tau, n_subspaces);
  if (!(d_min >= 1.0) || d_min > d_max) throw DomainError("d_min must lie in [1, d_max]");
  const double lhs =
      max_aff + std::sqrt((28.0 * d_max + 8.0 * std::log(n_subspaces) + 2.0 * tau) / (12.0 * c_tilde * p)) *
                    std::sqrt(d_max / d_min);
  const double rhs = (3.0 / 200.0) * std::sqrt(std::log(rho_min)) / std::log(n_points);
  ConditionInputs in;
  in.max_aff = max_aff;
  in.d_max = d_max;
  in.d_min = d_min;
  in.p = p;
  in.N = n_points;
  in.L = n_subspaces;
  in.rho_min = rho_min;
  in.tau = tau;
  in.c_tilde = c_tilde;
  return detail::make_report("sscomp", lhs, rhs, in);
}

/// TSC under additive noise; the noise contributes
/// sigma (1 + sigma) sqrt(6) / sqrt(c_bar ln N) * sqrt(d_max/p), c_bar = min(6, c_tilde).
inline ConditionReport tsc_noisy_condition(double max_aff, double d_max, double p, double n_points,
                                           double sigma, double c_tilde) {
  detail::check_common(max_aff, d_max, p, n_points, c_tilde);
  if (!(sigma >= 0.0)) throw DomainError("sigma must be >= 0");
  const double c_bar = std::min(6.0, c_tilde);
  const double log_n = std::log(n_points);
  const double ratio = std::sqrt(d_max / p);
  const double lhs = max_aff + std::sqrt(11.0 / (3.0 * c_tilde)) * ratio +
                     sigma * (1.0 + sigma) * std::sqrt(6.0) / std::sqrt(c_bar * log_n) * ratio;
  const double rhs = 1.0 / (15.0 * log_n);
  ConditionInputs in;
  in.max_aff = max_aff;
  in.d_max = d_max;
  in.p = p;
  in.N = n_points;
  in.sigma = sigma;
  in.c_tilde = c_tilde;
  return detail::make_report("tsc_noisy", lhs, rhs, in);
}

/// SSC-OMP on the unprojected data: aff <= sqrt(ln rho_min)/(64 ln N).
inline ConditionReport sscomp_ambient_condition(double max_aff, double n_points, double rho_min) {
  if (!(max_aff >= 0.0 && max_aff <= 1.0)) throw DomainError("max_aff must lie in [0, 1]");
  if (!(n_points >= 3.0)) throw DomainError("N must be >= 3 so that ln N > 1");
  if (!(rho_min > 1.0)) throw DomainError("rho_min must exceed 1");
  const double rhs = std::sqrt(std::log(rho_min)) / (64.0 * std::log(n_points));
  ConditionInputs in;
  in.max_aff = max_aff;
  in.N = n_points;
  in.rho_min = rho_min;
  return detail::make_report("sscomp_ambient", max_aff, rhs, in);
}

/// Default failure-probability parameter: tau = 2 ln N, so exp(-tau/2) = 1/N.
inline double default_tau(double n_points) { return 2.0 * std::log(n_points); }

/// Nonnegative sigma on the curve x (c1 + sigma(c2 + sigma)) = c3, if any.
inline std::optional<double> phase_sigma_star_at(double x, double c1, double c2, double c3) {
  if (!(x > 0.0)) throw DomainError("phase_sigma_star: x must be positive");
  if (c1 < 0.0 || c2 < 0.0 || c3 < 0.0) throw DomainError("phase_sigma_star: constants must be >= 0");
  const double disc = c2 * c2 - 4.0 * (c1 - c3 / x);
  if (disc < 0.0) return std::nullopt;
  const double root = (-c2 + std::sqrt(disc)) / 2.0;
  if (root < 0.0) return std::nullopt;
  return root;
}

/// Nonnegative sigma solving sqrt(d/p)(c1 + sigma(c2 + sigma)) = c3, if any.
inline std::optional<double> phase_sigma_star(double d, double p, double c1, double c2, double c3) {
  if (!(d >= 1.0) || !(p >= 1.0)) throw DomainError("phase_sigma_star: d and p must be >= 1");
  return phase_sigma_star_at(std::sqrt(d / p), c1, c2, c3);
}

}  // namespace rpsc
