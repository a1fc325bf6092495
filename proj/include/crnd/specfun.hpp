#pragma once

// Special functions behind the closed-form success and acceptance
// probabilities. All functions are pure and work in double precision.

#include <cstdint>

namespace crnd {

/// A real value constrained to [0, 1].
class Probability {
public:
  constexpr Probability() = default;
  explicit Probability(double value);

  constexpr double value() const { return value_; }
  constexpr operator double() const { return value_; }

  /// Clamps into [0, 1] instead of rejecting; NaN is still rejected.
  static Probability clamped(double value);

private:
  double value_ = 0.0;
};

enum class Tail { lower, upper };

double erf(double x);
double erfc(double x);

/// Inverse complementary error function on (0, 2).
double erfc_inv(double p);

/// Regularized incomplete beta I_x(a, b).
Probability reg_inc_beta(double x, double a, double b);

/// Natural log of I_x(a, b); stays finite where I_x underflows.
double log_reg_inc_beta(double x, double a, double b);

/// Regularized incomplete gamma, P(a, x) for the lower tail and Q(a, x) for
/// the upper tail. These are NIST's igam and igamc.
Probability reg_inc_gamma(double a, double x, Tail tail);

/// Solves Q(a, x) = p for x.
double inv_reg_inc_gamma_upper(double a, double p);

/// CDF of a noncentral chi-square with `dof` degrees of freedom and
/// noncentrality `lambda` (lambda = 0 gives the central case).
Probability noncentral_chi2_cdf(double x, double dof, double lambda);

/// log C(n, k) via lgamma.
double log_binomial(std::uint64_t n, std::uint64_t k);

/// log of sum_{i=0}^{k} C(n, i) p^i (1-p)^(n-i), summed in log space.
double log_binomial_cdf(std::uint64_t k, std::uint64_t n, double p);

/// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b);

}  // namespace crnd
