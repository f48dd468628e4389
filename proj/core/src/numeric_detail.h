#pragma once

#include <cmath>

namespace mlfd::detail {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Running log-probability built from many small increments; compensated so that
/// rounding does not accumulate when the running value is large in magnitude.
class LogAccumulator {
 public:
  explicit LogAccumulator(double start) noexcept { sum_.add(start); }
  LogAccumulator& operator+=(double step) noexcept {
    sum_.add(step);
    return *this;
  }
  operator double() const noexcept { return sum_.value(); }

 private:
  CompensatedSum sum_;
};

/// lnGamma for x > 0 without touching the global signgam.
inline double lgamma_pos(double x) noexcept {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

/// lnGamma(x + d) - lnGamma(x) for x > 0, d >= 0. For x >= 20 the Stirling series is
/// differenced term by term, which avoids subtracting two large lgamma values.
inline double log_gamma_ratio(double x, double d) noexcept {
  if (d == 0.0) return 0.0;
  if (x < 20.0) return lgamma_pos(x + d) - lgamma_pos(x);
  static constexpr double kStirling[] = {1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680, 1.0 / 1188, -691.0 / 360360};
  const double u = std::log1p(d / x);
  double r = (x - 0.5) * u + d * std::log(x + d) - d;
  const double x2 = x * x;
  double xp = x;
  for (int n = 0; n < 6; ++n) {
    r += kStirling[n] / xp * std::expm1(-(2 * n + 1) * u);
    xp *= x2;
  }
  return r;
}

}  // namespace mlfd::detail
