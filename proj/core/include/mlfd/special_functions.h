#pragma once

#include <cstddef>

namespace mlfd::special {

/// Result of a certified series evaluation of E_{a,b}(z) (or its Prabhakar extension).
struct MlfValue {
  double value = 0.0;
  double log_value = 0.0;
  std::size_t terms_used = 0;
  /// Absolute bound on the truncation error of `value`.
  double tail_bound = 0.0;
};

/// Log-domain result. `tail_bound` bounds the absolute error of `log_value`
/// caused by truncation (equivalently the relative truncation error of the sum).
struct LogMlfValue {
  double log_value = 0.0;
  std::size_t terms_used = 0;
  double tail_bound = 0.0;
};

/// Hard cap on the number of series terms summed by a single evaluation.
inline constexpr std::size_t kMaxSeriesTerms = 2'000'000;

/// ln Gamma(x) for x > 0. Throws DomainError otherwise.
double log_gamma(double x);

/// Generalized Mittag-Leffler function E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta).
///
/// Terms are formed as exp(k ln z - lnGamma(alpha k + beta)) and summed forward with
/// compensated accumulation, scaled by the largest term. Summation stops after the peak
/// term once the next term is below 1e-17 of the running sum and the geometric bound on
/// the remainder (ratios are non-increasing because lnGamma is convex) is below 1e-15.
/// alpha == 0 uses the closed form 1 / (Gamma(beta) (1 - z)).
///
/// Throws DomainError for alpha < 0, beta <= 0 or z < 0; DivergenceError for alpha == 0
/// with z >= 1; OverflowError when the result would not fit in a double (call log_mlf);
/// ConvergenceError when more than kMaxSeriesTerms terms would be needed.
MlfValue mlf(double alpha, double beta, double z);

/// ln E_{alpha,beta}(z). Same preconditions and errors as mlf, except overflow.
LogMlfValue log_mlf(double alpha, double beta, double z);

/// ln of the partial sum of the first `n_terms` terms of E_{alpha,beta}(z), accumulated
/// exactly as log_mlf does. tail_bound is left at zero.
LogMlfValue log_mlf_partial(double alpha, double beta, double z, std::size_t n_terms);

/// Prabhakar function E^rho_{alpha,beta}(z) = sum_k (rho)_k z^k / (k! Gamma(alpha k + beta)).
/// rho == 1 forwards to mlf. alpha == 0 uses (1 - z)^{-rho} / Gamma(beta).
MlfValue mlf_prabhakar(double alpha, double beta, double rho, double z);
LogMlfValue log_mlf_prabhakar(double alpha, double beta, double rho, double z);

/// Large-argument approximation ln[ z^{(1-beta)/alpha} exp(z^{1/alpha}) / alpha ].
/// Only meaningful for alpha in (0, 2]; throws DomainError outside.
double log_mlf_asymptotic(double alpha, double beta, double z);

/// Regularized upper incomplete gamma Q(s, x). Chi-square survival with k degrees of
/// freedom at t is reg_gamma_q(k / 2, t / 2).
double reg_gamma_q(double s, double x);

}  // namespace mlfd::special
