#include "mlfd/distribution.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "mlfd/errors.h"
#include "mlfd/special_functions.h"
#include "numeric_detail.h"

namespace mlfd {

namespace {

using detail::CompensatedSum;
using detail::lgamma_pos;
using detail::LogAccumulator;

constexpr double kModeTieTolerance = 1e-12;
constexpr double kEquiTolerance = 1e-9;
constexpr double kMomentTailTarget = 1e-13;
constexpr double kTableTailStop = 1e-17;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// Smallest k >= 0 with pred(k) true for a predicate that is monotone (false...false, true...).
template <typename Pred>
std::uint64_t first_true(Pred pred) {
  if (pred(0)) return 0;
  std::uint64_t lo = 0;
  std::uint64_t hi = 1;
  while (!pred(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > (std::uint64_t{1} << 52)) {
      throw ConvergenceError("probability ratios stay above one beyond k = 2^52");
    }
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double log_p0(const MlfdParams& p) { return -lgamma_pos(p.beta()) - log_normalizer(p); }

/// Variance as E[(X - c)^2] - E[X - c]^2 with the integer shift c = floor(mean), so no large
/// raw moments are subtracted.
double central_second(const MlfdParams& p, double mean) {
  const double c = std::floor(mean);
  LogAccumulator lp(log_p0(p));
  CompensatedSum s1;
  CompensatedSum s2;
  s1.add(-c * std::exp(lp));
  s2.add(c * c * std::exp(lp));
  for (std::uint64_t k = 1;; ++k) {
    lp += log_ratio(p, k - 1);
    const double d = static_cast<double>(k) - c;
    const double prob = std::exp(lp);
    s1.add(d * prob);
    s2.add(d * d * prob);
    if (d >= 1.0) {
      // Past the shift, successive terms shrink by at most (1 + 1/d)^2 q_k.
      const double log_rho = 2.0 * std::log1p(1.0 / d) + log_ratio(p, k);
      if (log_rho < 0.0) {
        const double bound = d * d * prob * std::exp(log_rho) / -std::expm1(log_rho);
        if (bound <= kMomentTailTarget * s2.value()) break;
      }
    }
    if (k >= special::kMaxSeriesTerms + static_cast<std::uint64_t>(c)) {
      throw ConvergenceError("variance: tail not bounded within the term budget");
    }
  }
  const double m = s1.value();
  return std::max(s2.value() - m * m, 0.0);
}

}  // namespace

MlfdParams::MlfdParams(double lambda, double alpha, double beta) : lambda_(lambda), alpha_(alpha), beta_(beta) {
  if (!std::isfinite(lambda) || lambda <= 0.0) {
    throw DomainError("MLFD: lambda must be finite and > 0, got " + fmt(lambda));
  }
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw DomainError("MLFD: alpha must be finite and >= 0, got " + fmt(alpha));
  }
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw DomainError("MLFD: beta must be finite and > 0, got " + fmt(beta));
  }
  if (alpha == 0.0 && lambda >= 1.0) {
    throw DivergenceError("MLFD: alpha = 0 (geometric case) requires lambda < 1, got " + fmt(lambda));
  }
}

std::string_view to_string(ShapeClass c) noexcept {
  switch (c) {
    case ShapeClass::nonincreasing:
      return "nonincreasing";
    case ShapeClass::unimodal_nonzero:
      return "unimodal_nonzero";
    case ShapeClass::bimodal_adjacent:
      return "bimodal_adjacent";
  }
  return "unknown";
}

std::string_view to_string(DispersionClass c) noexcept {
  switch (c) {
    case DispersionClass::under:
      return "under";
    case DispersionClass::equi:
      return "equi";
    case DispersionClass::over:
      return "over";
  }
  return "unknown";
}

double log_normalizer(const MlfdParams& p) {
  // log_pmf is typically called for many k at one parameter point.
  thread_local MlfdParams last{1.0, 1.0, 1.0};
  thread_local double last_value = special::log_mlf(1.0, 1.0, 1.0).log_value;
  if (!(p == last)) {
    last_value = special::log_mlf(p.alpha(), p.beta(), p.lambda()).log_value;
    last = p;
  }
  return last_value;
}

double log_pmf(const MlfdParams& p, std::uint64_t k) {
  const double kd = static_cast<double>(k);
  return kd * std::log(p.lambda()) - lgamma_pos(p.alpha() * kd + p.beta()) - log_normalizer(p);
}

double pmf(const MlfdParams& p, std::uint64_t k) { return std::exp(log_pmf(p, k)); }

double log_ratio(const MlfdParams& p, std::uint64_t k) {
  if (p.alpha() == 0.0) return std::log(p.lambda());
  const double x = p.alpha() * static_cast<double>(k) + p.beta();
  return std::log(p.lambda()) - detail::log_gamma_ratio(x, p.alpha());
}

PmfTable pmf_table(const MlfdParams& p, std::uint64_t kmax) {
  PmfTable table;
  table.probs.reserve(static_cast<std::size_t>(kmax) + 1);
  LogAccumulator lp(log_p0(p));
  table.probs.push_back(std::exp(lp));
  for (std::uint64_t k = 0; k < kmax; ++k) {
    lp += log_ratio(p, k);
    table.probs.push_back(std::exp(lp));
  }

  // Remainder: explicit terms until the geometric bound on what is left (ratios are
  // non-increasing past the mode) is negligible, then that bound itself.
  CompensatedSum tail;
  for (std::uint64_t k = kmax;; ++k) {
    const double lr = log_ratio(p, k);
    const double next = lp + lr;
    if (lr < 0.0) {
      const double bound = std::exp(next) / -std::expm1(lr);
      if (bound < kTableTailStop) {
        tail.add(bound);
        break;
      }
    }
    tail.add(std::exp(next));
    lp += lr;
    if (k - kmax >= special::kMaxSeriesTerms) {
      throw ConvergenceError("pmf_table: tail mass not bounded within the term budget");
    }
  }
  table.tail_mass = tail.value();
  return table;
}

double log_survival(const MlfdParams& p, std::uint64_t t) {
  const double n = static_cast<double>(t) + 1.0;
  const double shifted = special::log_mlf(p.alpha(), p.beta() + n * p.alpha(), p.lambda()).log_value;
  return n * std::log(p.lambda()) + shifted - log_normalizer(p);
}

double survival(const MlfdParams& p, std::uint64_t t) { return std::clamp(std::exp(log_survival(p, t)), 0.0, 1.0); }

double cdf(const MlfdParams& p, std::uint64_t r) {
  const double s = survival(p, r);
  if (s <= 0.5) return std::clamp(1.0 - s, 0.0, 1.0);
  // Below the median 1 - S(r) loses the small cdf to cancellation; sum the head instead.
  LogAccumulator lp(log_p0(p));
  CompensatedSum head;
  head.add(std::exp(lp));
  for (std::uint64_t k = 0; k < r; ++k) {
    lp += log_ratio(p, k);
    head.add(std::exp(lp));
  }
  return std::clamp(head.value(), 0.0, 1.0);
}

double hazard(const MlfdParams& p, std::uint64_t t) {
  const double x = p.alpha() * static_cast<double>(t) + p.beta();
  return std::exp(-lgamma_pos(x) - special::log_mlf(p.alpha(), x, p.lambda()).log_value);
}

double pgf(const MlfdParams& p, double s) {
  if (!std::isfinite(s) || s < 0.0) {
    throw DomainError("pgf: s must be finite and >= 0, got " + fmt(s));
  }
  if (s == 1.0) return 1.0;
  const double num = special::log_mlf(p.alpha(), p.beta(), p.lambda() * s).log_value;
  return std::exp(num - log_normalizer(p));
}

double rising_shifted_moment(const MlfdParams& p, unsigned r) {
  if (r < 1) throw DomainError("rising_shifted_moment: r must be >= 1");
  // Sum_k (k+1)...(k+r) lambda^k / Gamma(alpha k + beta) = r! E^{r+1}_{alpha,beta}(lambda), since
  // (k+1)...(k+r) = r! (r+1)_k / k!.
  const double num = special::log_mlf_prabhakar(p.alpha(), p.beta(), static_cast<double>(r) + 1.0, p.lambda()).log_value;
  return std::exp(num + lgamma_pos(static_cast<double>(r) + 1.0) - log_normalizer(p));
}

double moment_raw(const MlfdParams& p, unsigned r) {
  if (r < 1 || r > 6) throw DomainError("moment_raw: order must lie in 1..6, got " + std::to_string(r));
  const double order = static_cast<double>(r);
  LogAccumulator lp(log_p0(p));
  CompensatedSum acc;
  for (std::uint64_t k = 1;; ++k) {
    lp += log_ratio(p, k - 1);
    const double kd = static_cast<double>(k);
    const double term = std::pow(kd, order) * std::exp(lp);
    acc.add(term);
    // For j >= k: m_{j+1} / m_j = (1 + 1/j)^r q_j <= (1 + 1/k)^r q_k.
    const double lr = log_ratio(p, k);
    const double log_rho = order * std::log1p(1.0 / kd) + lr;
    if (log_rho < 0.0) {
      const double rho = std::exp(log_rho);
      const double bound = term * rho / -std::expm1(log_rho);
      if (bound <= kMomentTailTarget * acc.value()) break;
    }
    if (k >= special::kMaxSeriesTerms) {
      throw ConvergenceError("moment_raw: tail not bounded within the term budget");
    }
  }
  return acc.value();
}

double mean(const MlfdParams& p) { return moment_raw(p, 1); }

double variance(const MlfdParams& p) { return central_second(p, moment_raw(p, 1)); }

double index_of_dispersion(const MlfdParams& p) {
  const double m1 = moment_raw(p, 1);
  return central_second(p, m1) / m1;
}

DispersionClass classify_dispersion(double id) noexcept {
  if (std::fabs(id - 1.0) <= kEquiTolerance) return DispersionClass::equi;
  return id < 1.0 ? DispersionClass::under : DispersionClass::over;
}

std::vector<std::vector<double>> dispersion_grid(double lambda, const std::vector<double>& alpha_grid,
                                                 const std::vector<double>& beta_grid) {
  std::vector<std::vector<double>> out;
  out.reserve(alpha_grid.size());
  for (double a : alpha_grid) {
    std::vector<double> row;
    row.reserve(beta_grid.size());
    for (double b : beta_grid) row.push_back(index_of_dispersion(MlfdParams(lambda, a, b)));
    out.push_back(std::move(row));
  }
  return out;
}

ShapeReport mode_set(const MlfdParams& p) {
  ShapeReport report;
  report.index_of_dispersion = index_of_dispersion(p);
  report.dispersion_class = classify_dispersion(report.index_of_dispersion);

  if (p.alpha() == 0.0) {
    report.modes = {0};
    report.shape_class = ShapeClass::nonincreasing;
    return report;
  }
  // First k at which P(k+1)/P(k) is not clearly above one.
  const std::uint64_t k = first_true([&](std::uint64_t j) { return log_ratio(p, j) < kModeTieTolerance; });
  if (std::fabs(log_ratio(p, k)) <= kModeTieTolerance) {
    report.modes = {k, k + 1};
    report.shape_class = ShapeClass::bimodal_adjacent;
  } else {
    report.modes = {k};
    report.shape_class = k == 0 ? ShapeClass::nonincreasing : ShapeClass::unimodal_nonzero;
  }
  return report;
}

std::vector<std::uint64_t> sample(const MlfdParams& p, std::uint64_t seed, std::size_t n) {
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };

  std::vector<double> cumulative;
  LogAccumulator lp(log_p0(p));
  double running = std::exp(lp);
  cumulative.push_back(running);
  bool exhausted = false;
  auto extend = [&] {
    const auto k = static_cast<std::uint64_t>(cumulative.size() - 1);
    lp += log_ratio(p, k);
    const double prob = std::exp(lp);
    running += prob;
    cumulative.push_back(running);
    // Past the mode, once a step no longer moves the sum, the remaining mass is below rounding.
    if (log_ratio(p, k + 1) < 0.0 && running + prob == running) exhausted = true;
  };
  while (!exhausted && running < 1.0 - 1e-12) extend();

  std::vector<std::uint64_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform();
    while (!exhausted && u >= cumulative.back()) extend();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    out.push_back(static_cast<std::uint64_t>(it - cumulative.begin()));
  }
  return out;
}

}  // namespace mlfd
