#include "mlfd/special_functions.h"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "mlfd/errors.h"
#include "numeric_detail.h"

namespace mlfd::special {

namespace {

using detail::CompensatedSum;
using detail::lgamma_pos;

constexpr double kStopFraction = 1e-17;
constexpr double kTailTarget = 1e-15;
const double kLogStopFraction = std::log(kStopFraction);
const double kLogDoubleMax = std::log(std::numeric_limits<double>::max());
const double kLogDoubleMin = std::log(std::numeric_limits<double>::min());
constexpr double kOverflowMargin = 40.0;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// ln of the k-th term: k ln z - lnGamma(alpha k + beta) [+ ln((rho)_k / k!)].
/// The log-terms are concave in k (lnGamma is convex; for rho >= 1 so is the
/// Pochhammer ratio), hence the terms are unimodal and their ratios non-increasing.
struct SeriesTerms {
  double alpha;
  double beta;
  double log_z;
  double rho = 1.0;
  double lgamma_rho = 0.0;

  double operator()(std::uint64_t k) const noexcept {
    const double kd = static_cast<double>(k);
    double t = kd * log_z - lgamma_pos(alpha * kd + beta);
    if (rho != 1.0) {
      t += lgamma_pos(rho + kd) - lgamma_rho - lgamma_pos(kd + 1.0);
    }
    return t;
  }
};

/// Index of the largest term: the smallest k with term(k+1) < term(k).
std::uint64_t find_peak(const SeriesTerms& terms) {
  auto descending = [&](std::uint64_t k) { return terms(k + 1) < terms(k); };
  if (descending(0)) return 0;
  std::uint64_t lo = 0;
  std::uint64_t hi = 1;
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 52;
  while (!descending(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > kLimit) {
      throw ConvergenceError("Mittag-Leffler series: terms keep increasing beyond k = 2^52");
    }
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (descending(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

void check_term_budget(const SeriesTerms& terms, std::uint64_t peak) {
  if (peak >= kMaxSeriesTerms) {
    throw ConvergenceError("Mittag-Leffler series peaks at term " + std::to_string(peak) +
                           ", beyond the budget of " + std::to_string(kMaxSeriesTerms) + " terms");
  }
  // The running sum is at most (cap + 1) peak terms, so if the term at the cap is still
  // above kStopFraction of that, the stopping rule cannot fire before the cap.
  const double cap = static_cast<double>(kMaxSeriesTerms);
  if (terms(kMaxSeriesTerms) - terms(peak) - std::log(cap + 1.0) >= kLogStopFraction) {
    throw ConvergenceError("Mittag-Leffler series decays too slowly to truncate within " +
                           std::to_string(kMaxSeriesTerms) + " terms");
  }
}

/// Forward compensated sum scaled by the peak term. With `n_terms` set, sums exactly that
/// many terms; otherwise applies the certified stopping rule.
LogMlfValue sum_series(const SeriesTerms& terms, std::optional<std::uint64_t> n_terms) {
  const std::uint64_t peak = find_peak(terms);
  if (!n_terms) check_term_budget(terms, peak);

  const std::uint64_t last_index = n_terms ? (*n_terms == 0 ? 0 : *n_terms - 1) : peak;
  const double anchor = terms(n_terms ? std::min(peak, last_index) : peak);

  LogMlfValue out;
  if (n_terms && *n_terms == 0) {
    out.log_value = -std::numeric_limits<double>::infinity();
    return out;
  }

  CompensatedSum acc;
  double log_term = terms(0);
  for (std::uint64_t k = 0;; ++k) {
    acc.add(std::exp(log_term - anchor));
    if (n_terms && k + 1 == *n_terms) {
      out.log_value = anchor + std::log(acc.value());
      out.terms_used = k + 1;
      return out;
    }
    const double log_next = terms(k + 1);
    if (!n_terms && k >= peak) {
      const double ratio = std::exp(log_next - log_term);
      const double sum = acc.value();
      const double next = std::exp(log_next - anchor);
      if (ratio < 1.0 && next < kStopFraction * sum) {
        const double rel_tail = next / ((1.0 - ratio) * sum);
        if (rel_tail < kTailTarget) {
          out.log_value = anchor + std::log(sum);
          out.terms_used = k + 1;
          out.tail_bound = rel_tail;
          return out;
        }
      }
    }
    if (!n_terms && k + 1 >= kMaxSeriesTerms) {
      throw ConvergenceError("Mittag-Leffler series not truncated within " +
                             std::to_string(kMaxSeriesTerms) + " terms");
    }
    log_term = log_next;
  }
}

void check_args(double alpha, double beta, double z) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw DomainError("Mittag-Leffler: alpha must be finite and >= 0, got " + fmt(alpha));
  }
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw DomainError("Mittag-Leffler: beta must be finite and > 0, got " + fmt(beta));
  }
  if (!std::isfinite(z) || z < 0.0) {
    throw DomainError("Mittag-Leffler: z must be finite and >= 0, got " + fmt(z));
  }
  if (alpha == 0.0 && z >= 1.0) {
    throw DivergenceError("Mittag-Leffler: with alpha = 0 the series is geometric and diverges for z >= 1 (z = " +
                          fmt(z) + ")");
  }
}

MlfValue to_value(const LogMlfValue& lv) {
  if (lv.log_value > kLogDoubleMax - kOverflowMargin || lv.log_value < kLogDoubleMin + kOverflowMargin) {
    throw OverflowError("Mittag-Leffler value exp(" + fmt(lv.log_value) +
                        ") is outside the double range; use the log-domain evaluator");
  }
  MlfValue v;
  v.log_value = lv.log_value;
  v.value = std::exp(lv.log_value);
  v.terms_used = lv.terms_used;
  v.tail_bound = lv.tail_bound * v.value;
  return v;
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("log_gamma: argument must be finite and > 0, got " + fmt(x));
  }
  return lgamma_pos(x);
}

LogMlfValue log_mlf(double alpha, double beta, double z) {
  check_args(alpha, beta, z);
  LogMlfValue out;
  if (alpha == 0.0) {
    out.log_value = -lgamma_pos(beta) - std::log1p(-z);
    return out;
  }
  if (z == 0.0) {
    out.log_value = -lgamma_pos(beta);
    out.terms_used = 1;
    return out;
  }
  return sum_series(SeriesTerms{alpha, beta, std::log(z)}, std::nullopt);
}

MlfValue mlf(double alpha, double beta, double z) { return to_value(log_mlf(alpha, beta, z)); }

LogMlfValue log_mlf_partial(double alpha, double beta, double z, std::size_t n_terms) {
  check_args(alpha, beta, z);
  if (alpha == 0.0) {
    throw DomainError("log_mlf_partial: alpha = 0 is evaluated in closed form only");
  }
  if (z == 0.0) {
    LogMlfValue out;
    out.log_value = n_terms == 0 ? -std::numeric_limits<double>::infinity() : -lgamma_pos(beta);
    out.terms_used = n_terms == 0 ? 0 : 1;
    return out;
  }
  return sum_series(SeriesTerms{alpha, beta, std::log(z)}, n_terms);
}

LogMlfValue log_mlf_prabhakar(double alpha, double beta, double rho, double z) {
  if (!std::isfinite(rho) || rho < 1.0) {
    throw DomainError("Prabhakar function: rho must be finite and >= 1, got " + fmt(rho));
  }
  if (rho == 1.0) return log_mlf(alpha, beta, z);
  check_args(alpha, beta, z);
  LogMlfValue out;
  if (alpha == 0.0) {
    out.log_value = -lgamma_pos(beta) - rho * std::log1p(-z);
    return out;
  }
  if (z == 0.0) {
    out.log_value = -lgamma_pos(beta);
    out.terms_used = 1;
    return out;
  }
  return sum_series(SeriesTerms{alpha, beta, std::log(z), rho, lgamma_pos(rho)}, std::nullopt);
}

MlfValue mlf_prabhakar(double alpha, double beta, double rho, double z) {
  if (rho == 1.0) return mlf(alpha, beta, z);
  return to_value(log_mlf_prabhakar(alpha, beta, rho, z));
}

double log_mlf_asymptotic(double alpha, double beta, double z) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw DomainError("mlf_asymptotic: alpha must lie in (0, 2], got " + fmt(alpha));
  }
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw DomainError("mlf_asymptotic: beta must be finite and > 0, got " + fmt(beta));
  }
  if (!std::isfinite(z) || z <= 0.0) {
    throw DomainError("mlf_asymptotic: z must be finite and > 0, got " + fmt(z));
  }
  const double log_z = std::log(z);
  return (1.0 - beta) / alpha * log_z + std::exp(log_z / alpha) - std::log(alpha);
}

double reg_gamma_q(double s, double x) {
  if (!std::isfinite(s) || s <= 0.0) {
    throw DomainError("reg_gamma_q: s must be finite and > 0, got " + fmt(s));
  }
  if (std::isnan(x) || x < 0.0) {
    throw DomainError("reg_gamma_q: x must be >= 0, got " + fmt(x));
  }
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(s, x);
}

}  // namespace mlfd::special
