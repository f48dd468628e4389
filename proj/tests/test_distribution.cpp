#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mlfd/distribution.h"
#include "mlfd/errors.h"
#include "mlfd/special_functions.h"
#include "oracles.h"

using namespace mlfd;
using oracle::rel_err;

namespace {

// 6 x 6 x 4 = 144 parameter points.
std::vector<MlfdParams> grid() {
  std::vector<MlfdParams> out;
  for (double l : {0.1, 0.5, 1.0, 2.5, 5.0, 8.0}) {
    for (double a : {0.2, 0.5, 1.0, 1.7, 2.5, 3.0}) {
      for (double b : {0.3, 1.0, 2.5, 4.0}) out.emplace_back(l, a, b);
    }
  }
  return out;
}

std::string show(const MlfdParams& p) {
  return "(" + std::to_string(p.lambda()) + ", " + std::to_string(p.alpha()) + ", " + std::to_string(p.beta()) + ")";
}

// Every probability carries the absolute rounding error of ln E_{alpha,beta}(lambda), which
// reaches ~3e4 on the grid; relative tolerances below that level are not attainable.
double log_scale_tol(const MlfdParams& p, double base) {
  const double log_norm = special::log_mlf(p.alpha(), p.beta(), p.lambda()).log_value;
  return base + 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(log_norm);
}

// P(X >= t) summed forward, stopping once the terms past the mode stop contributing.
double tail_sum(const MlfdParams& p, std::uint64_t t) {
  long double total = 0.0L;
  double prev = 0.0;
  for (std::uint64_t k = t;; ++k) {
    const double term = pmf(p, k);
    total += term;
    if (term < prev && term <= 1e-20 * static_cast<double>(total)) break;
    prev = term;
  }
  return static_cast<double>(total);
}

double poisson(double l, int k) { return std::exp(k * std::log(l) - l - std::lgamma(k + 1.0)); }

}  // namespace

TEST(Params, Validation) {
  EXPECT_THROW(MlfdParams(0, 1, 1), DomainError);
  EXPECT_THROW(MlfdParams(1, -0.1, 1), DomainError);
  EXPECT_THROW(MlfdParams(1, 1, 0), DomainError);
  EXPECT_THROW(MlfdParams(1.0, 0, 1), DivergenceError);
  EXPECT_NO_THROW(MlfdParams(0.99, 0, 1));
}

TEST(Pmf, Examples) {
  EXPECT_LE(rel_err(pmf({2, 1, 1}, 0), std::exp(-2.0)), 1e-14);
  EXPECT_LE(rel_err(pmf({4, 2, 1}, 1), 4.0 / (2.0 * std::cosh(2.0))), 1e-14);
  EXPECT_LE(rel_err(pmf({0.5, 0, 1}, 3), 0.0625), 1e-14);
  EXPECT_NEAR(log_pmf({2, 1, 1}, 0), -2.0, 1e-14);
}

TEST(Pmf, LogAndLinearAgree) {
  for (const auto& p : grid()) {
    for (std::uint64_t k : {0, 1, 7, 50, 200}) {
      const double lp = log_pmf(p, k);
      if (lp < -700) continue;
      EXPECT_LE(rel_err(std::exp(lp), pmf(p, k)), 1e-12);
    }
  }
}

TEST(Pmf, DeepTailStaysFinite) {
  const MlfdParams p(1, 0.25, 0.5);
  const double lp = log_pmf(p, 100);
  const long double lnorm = std::log(oracle::mlf_direct(0.25L, 0.5L, 1.0L, 400));
  const double want = static_cast<double>(-std::lgammal(25.5L) - lnorm);
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_LE(std::fabs(lp - want), 1e-12 * std::fabs(want));
}

TEST(PmfTable, PoissonAndGeometric) {
  const PmfTable t = pmf_table({2, 1, 1}, 20);
  ASSERT_EQ(t.probs.size(), 21u);
  for (int k = 0; k <= 20; ++k) EXPECT_NEAR(t.probs[k], poisson(2, k), 1e-12);

  const PmfTable g = pmf_table({0.5, 0, 1}, 30);
  EXPECT_LE(rel_err(g.tail_mass, std::pow(0.5, 31)), 1e-10);
}

TEST(PmfTable, NormalizedAndMatchesPmf) {
  for (const auto& p : grid()) {
    const PmfTable t = pmf_table(p, 50);
    long double total = t.tail_mass;
    for (std::size_t k = 0; k < t.probs.size(); ++k) {
      total += t.probs[k];
      ASSERT_GE(t.probs[k], 0.0);
      ASSERT_LE(t.probs[k], 1.0);
      if (t.probs[k] > 1e-300) EXPECT_LE(rel_err(t.probs[k], pmf(p, k)), 1e-10) << show(p) << " k=" << k;
    }
    EXPECT_NEAR(static_cast<double>(total), 1.0, 1e-10) << show(p);
  }
}

TEST(Pmf, Recurrence) {
  for (const auto& p : grid()) {
    for (std::uint64_t k = 0; k < 60; ++k) {
      const double kd = static_cast<double>(k);
      const double want = std::log(p.lambda()) + std::lgamma(p.alpha() * kd + p.beta()) -
                          std::lgamma(p.alpha() * (kd + 1) + p.beta());
      EXPECT_NEAR(log_pmf(p, k + 1) - log_pmf(p, k), want, 1e-11) << show(p) << " k=" << k;
    }
  }
}

TEST(Pmf, LogConcave) {
  for (const auto& p : grid()) {
    for (std::uint64_t k = 1; k <= 200; ++k) {
      const double second = log_pmf(p, k + 1) - 2.0 * log_pmf(p, k) + log_pmf(p, k - 1);
      EXPECT_LT(second, 0.0) << show(p) << " k=" << k;
    }
  }
}

TEST(Pmf, RatioMonotone) {
  // P(i+s)/P(i) >= P(j+s)/P(j) for i < j.
  for (const auto& p : grid()) {
    for (std::uint64_t s : {1, 3}) {
      double prev = log_pmf(p, s) - log_pmf(p, 0);
      for (std::uint64_t i = 1; i < 40; ++i) {
        const double cur = log_pmf(p, i + s) - log_pmf(p, i);
        EXPECT_LE(cur, prev + 1e-12) << show(p);
        prev = cur;
      }
    }
  }
}

TEST(Pmf, SpecialCases) {
  for (double l : {0.5, 2.0, 10.0}) {
    for (int k = 0; k <= 50; ++k) EXPECT_NEAR(pmf({l, 1, 1}, k), poisson(l, k), 1e-12);
    for (int k = 0; k <= 20; ++k) {
      const double r = std::sqrt(l);
      EXPECT_LE(rel_err(pmf({l, 2, 1}, k), std::exp(2 * k * std::log(r) - std::lgamma(2 * k + 1.0)) / std::cosh(r)),
                1e-12);
      EXPECT_LE(
          rel_err(pmf({l, 2, 2}, k), std::exp(2 * k * std::log(r) - std::lgamma(2 * k + 2.0)) * r / std::sinh(r)),
          1e-12);
    }
  }
  for (double l : {0.2, 0.5, 0.9}) {
    for (double b : {0.5, 1.0, 3.0}) {
      for (int k = 0; k <= 30; ++k) EXPECT_LE(rel_err(pmf({l, 0, b}, k), (1 - l) * std::pow(l, k)), 1e-12);
    }
    // Continuity towards the geometric law as alpha -> 0.
    for (int k = 0; k <= 30; ++k) EXPECT_NEAR(pmf({l, 1e-6, 1}, k), (1 - l) * std::pow(l, k), 1e-4);
  }
}

TEST(Pmf, WeightedPoissonStructure) {
  for (const auto& p : grid()) {
    const MlfdParams hp(p.lambda(), 1.0, p.beta());
    auto residual = [&](double k) {
      return log_pmf(p, k) - log_pmf(hp, k) - (std::lgamma(k + p.beta()) - std::lgamma(p.alpha() * k + p.beta()));
    };
    const double c = residual(0);
    for (int k = 1; k <= 60; ++k) EXPECT_NEAR(residual(k), c, 1e-10) << show(p);
  }
}

TEST(Pmf, LikelihoodRatioOrder) {
  // The gamma-ratio monotonicity needs beta away from 0; see SmallBetaBreaksMonotonicity.
  for (double b : {1.0, 2.5, 4.0}) {
    for (double a : {1.2, 1.7, 2.5, 3.0}) {
      for (int n = 0; n < 100; ++n) {
        const double cur = std::lgamma(n * a + b) - std::lgamma(n + b);
        const double next = std::lgamma((n + 1) * a + b) - std::lgamma(n + 1 + b);
        EXPECT_GT(next, cur) << a << ' ' << b << ' ' << n;
      }
      // Hence P_MLFD / P_HP is decreasing in k.
      const MlfdParams p(2.0, a, b);
      const MlfdParams hp(2.0, 1.0, b);
      for (int k = 0; k < 40; ++k) {
        EXPECT_LT(log_pmf(p, k + 1) - log_pmf(hp, k + 1), log_pmf(p, k) - log_pmf(hp, k));
      }
    }
    for (double a : {0.2, 0.5, 0.8}) {
      for (int n = 0; n < 100; ++n) {
        const double cur = std::lgamma(n * a + b) - std::lgamma(n + b);
        const double next = std::lgamma((n + 1) * a + b) - std::lgamma(n + 1 + b);
        EXPECT_LT(next, cur) << a << ' ' << b << ' ' << n;
      }
    }
  }
}

TEST(Pmf, SmallBetaBreaksMonotonicity) {
  // Gamma(n a + b) / Gamma(n + b) at n = 0, 1 with b = 0.3: the first step goes the wrong way
  // for a = 1.2 (Gamma(1.5) < Gamma(1.3)), so the order holds only from some n on.
  const double b = 0.3;
  const double a = 1.2;
  EXPECT_LT(std::lgamma(a + b) - std::lgamma(1 + b), 0.0);
  const MlfdParams p(2.0, a, b);
  const MlfdParams hp(2.0, 1.0, b);
  EXPECT_GT(log_pmf(p, 1) - log_pmf(hp, 1), log_pmf(p, 0) - log_pmf(hp, 0));
}

TEST(Cdf, Examples) {
  EXPECT_LE(rel_err(cdf({2, 1, 1}, 2), 5.0 * std::exp(-2.0)), 1e-12);
  EXPECT_LE(rel_err(cdf({0.5, 0, 1}, 4), 0.96875), 1e-12);
  EXPECT_LE(rel_err(survival({2, 1, 1}, 2), 1.0 - 5.0 * std::exp(-2.0)), 1e-12);
  EXPECT_LE(rel_err(survival({0.5, 0, 1}, 0), 0.5), 1e-12);
}

TEST(Cdf, ClosedFormMatchesPartialSums) {
  for (const auto& p : grid()) {
    double partial = 0.0;
    double prev = 0.0;
    for (std::uint64_t r = 0; r <= 40; ++r) {
      partial += pmf(p, r);
      const double c = cdf(p, r);
      EXPECT_NEAR(c, partial, 1e-10) << show(p) << " r=" << r;
      EXPECT_GE(c, prev);
      EXPECT_NEAR(c + survival(p, r), 1.0, log_scale_tol(p, 1e-12));
      prev = c;
    }
  }
  EXPECT_NEAR(cdf({2, 1, 1}, 60), 1.0, 1e-15);
}

TEST(Hazard, Examples) {
  for (std::uint64_t t = 0; t < 20; ++t) EXPECT_NEAR(hazard({0.5, 0, 1}, t), 0.5, 1e-12);
  EXPECT_LE(rel_err(hazard({2, 1, 1}, 0), std::exp(-2.0)), 1e-12);
}

TEST(Hazard, DefinitionAndIncreasingFailureRate) {
  for (const auto& p : grid()) {
    for (std::uint64_t t = 0; t <= 5; ++t) {
      if (pmf(p, t) < 1e-300) continue;
      EXPECT_LE(rel_err(hazard(p, t), pmf(p, t) / tail_sum(p, t)), 1e-9) << show(p) << " t=" << t;
    }
    double prev = hazard(p, 0);
    for (std::uint64_t t = 1; t <= 100; ++t) {
      const double h = hazard(p, t);
      EXPECT_GE(h, prev * (1 - 1e-12)) << show(p) << " t=" << t;
      prev = h;
    }
  }
}

TEST(Pgf, Examples) {
  EXPECT_EQ(pgf({3, 0.7, 2}, 1.0), 1.0);
  EXPECT_LE(rel_err(pgf({2, 1, 1}, 0.5), std::exp(-1.0)), 1e-12);
  for (const auto& p : grid()) {
    // At lambda^(1/alpha) ~ 3e4 both sides underflow; compare where P(0) is representable.
    if (pmf(p, 0) > 1e-300) EXPECT_LE(rel_err(pgf(p, 0.0), pmf(p, 0)), log_scale_tol(p, 1e-12)) << show(p);
  }
  EXPECT_THROW(pgf({0.5, 0, 1}, 2.5), DivergenceError);
  EXPECT_THROW(pgf({0.5, 1, 1}, -0.1), DomainError);
}

TEST(Moments, RisingShifted) {
  EXPECT_LE(rel_err(rising_shifted_moment({1, 1, 1}, 1), 2.0), 1e-12);
  const auto direct = oracle::pmf_direct(1, 1, 1, 200);
  const double want = static_cast<double>(oracle::expect(direct, [](long double k) { return (k + 1) * (k + 2); }));
  EXPECT_LE(rel_err(rising_shifted_moment({1, 1, 1}, 2), want), 1e-12);
  EXPECT_LE(rel_err(want, 7.0), 1e-14);
  for (const auto& p : grid()) {
    const double m1 = moment_raw(p, 1);
    const double m2 = moment_raw(p, 2);
    EXPECT_LE(rel_err(rising_shifted_moment(p, 1), m1 + 1.0), 1e-10) << show(p);
    EXPECT_LE(rel_err(rising_shifted_moment(p, 2), m2 + 3.0 * m1 + 2.0), 1e-10) << show(p);
  }
}

TEST(Moments, RawExamples) {
  EXPECT_LE(rel_err(moment_raw({2, 1, 1}, 1), 2.0), 1e-12);
  EXPECT_LE(rel_err(moment_raw({2, 1, 1}, 2), 6.0), 1e-12);
  EXPECT_LE(rel_err(moment_raw({0.5, 0, 1}, 1), 1.0), 1e-12);
  EXPECT_THROW(moment_raw({2, 1, 1}, 0), DomainError);
  EXPECT_THROW(moment_raw({2, 1, 1}, 7), DomainError);
}

TEST(Moments, RawAgainstDirectSummation) {
  for (const MlfdParams& p : {MlfdParams(36.6589, 2.2862, 1.9074), MlfdParams(0.6114, 0.1282, 0.1603),
                              MlfdParams(5, 0.5, 0.3), MlfdParams(0.3, 3, 4)}) {
    const auto direct = oracle::pmf_direct(p.lambda(), p.alpha(), p.beta(), 3000);
    for (unsigned r = 1; r <= 6; ++r) {
      const double want = static_cast<double>(oracle::expect(direct, [r](long double k) { return std::pow(k, r); }));
      EXPECT_LE(rel_err(moment_raw(p, r), want), 1e-10) << show(p) << " r=" << r;
    }
  }
  // At the Skellam reference point the mean is 1.714837..., not the sample mean 1.74184: that
  // point does not satisfy the likelihood first-order condition.
  EXPECT_NEAR(mean({36.6589, 2.2862, 1.9074}), 1.714837, 5e-6);
}

TEST(Moments, PoissonAndGeometric) {
  EXPECT_LE(rel_err(mean({3, 1, 1}), 3.0), 1e-12);
  EXPECT_LE(rel_err(variance({3, 1, 1}), 3.0), 1e-10);
  EXPECT_LE(rel_err(mean({0.5, 0, 1}), 1.0), 1e-12);
  EXPECT_LE(rel_err(variance({0.5, 0, 1}), 2.0), 1e-10);
}

TEST(Moments, ClassicalFormulasForLargeBeta) {
  // E[a X + b - 1] = E_{a,b-1}/E_{a,b}; E[(a X + b - 1)(a X + b - 2)] = E_{a,b-2}/E_{a,b}.
  int checked = 0;
  for (double l : {0.1, 0.5, 1.0, 2.5, 5.0, 8.0}) {
    for (double a : {0.5, 1.0, 1.7, 2.5, 3.0}) {
      for (double b : {2.5, 3.3, 4.0, 6.0}) {
        const MlfdParams p(l, a, b);
        const double e0 = special::log_mlf(a, b, l).log_value;
        const double r1 = std::exp(special::log_mlf(a, b - 1, l).log_value - e0);
        const double r2 = std::exp(special::log_mlf(a, b - 2, l).log_value - e0);
        const double m1 = (r1 - (b - 1)) / a;
        const double m2 = (r2 - a * (2 * b - 3) * m1 - (b - 1) * (b - 2)) / (a * a);
        EXPECT_LE(rel_err(mean(p), m1), 1e-8) << show(p);
        EXPECT_LE(rel_err(variance(p), m2 - m1 * m1), 1e-8) << show(p);
        ++checked;
      }
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(Moments, VarianceIsLambdaTimesMeanDerivative) {
  for (const auto& p : grid()) {
    const double h = 1e-5 * p.lambda();
    const double up = mean({p.lambda() + h, p.alpha(), p.beta()});
    const double down = mean({p.lambda() - h, p.alpha(), p.beta()});
    const double fd = p.lambda() * (up - down) / (2 * h);
    EXPECT_LE(rel_err(variance(p), fd), 1e-4) << show(p);
  }
}

TEST(Moments, RecurrenceWithRisingFactorial) {
  // E[(a(X-1)+b)_a] = lambda + (b-a)_a P(X=0) for integer a, (y)_n rising.
  auto rising = [](long double y, int n) {
    long double r = 1.0L;
    for (int i = 0; i < n; ++i) r *= y + i;
    return r;
  };
  for (int a : {1, 2, 3}) {
    for (double l : {0.5, 2.0, 7.0}) {
      for (double b : {0.3, 1.0, 2.5, 4.0}) {
        const auto direct = oracle::pmf_direct(l, a, b, 400);
        const double lhs =
            static_cast<double>(oracle::expect(direct, [&](long double k) { return rising(a * (k - 1) + b, a); }));
        const double rhs = l + static_cast<double>(rising(b - a, a)) * pmf({l, static_cast<double>(a), b}, 0);
        EXPECT_LE(rel_err(rhs, lhs), 1e-8) << a << ' ' << l << ' ' << b;
      }
    }
  }
}

TEST(Moments, MeanIncreasesWithLambda) {
  for (double a : {0.2, 1.0, 2.5}) {
    for (double b : {0.3, 2.5}) {
      double prev = 0.0;
      for (double l = 0.1; l <= 10.0; l *= 1.5) {
        const double m = mean({l, a, b});
        EXPECT_GT(m, prev);
        prev = m;
      }
    }
  }
}

TEST(Dispersion, Index) {
  for (double l : {0.5, 2.0, 10.0}) EXPECT_NEAR(index_of_dispersion({l, 1, 1}), 1.0, 1e-9);
  EXPECT_NEAR(index_of_dispersion({0.5, 0, 1}), 2.0, 1e-10);
  EXPECT_LT(index_of_dispersion({36.6589, 2.2862, 1.9074}), 1.0);
  EXPECT_EQ(classify_dispersion(1.0 + 5e-10), DispersionClass::equi);
  EXPECT_EQ(classify_dispersion(1.0 + 2e-9), DispersionClass::over);
  EXPECT_EQ(classify_dispersion(0.5), DispersionClass::under);
}

TEST(Dispersion, EquiDispersedPoissonCase) {
  // ln E_{1,1}(lambda) = lambda exactly.
  for (double l : {0.3, 4.0, 60.0}) EXPECT_NEAR(special::log_mlf(1, 1, l).log_value, l, 1e-12 * l);
}

TEST(Dispersion, Grid) {
  const std::vector<double> alphas = {0.1, 0.5, 1.0, 2.0, 3.0};
  const std::vector<double> betas = {0.5, 1.0, 2.0};
  const auto g = dispersion_grid(0.25, alphas, betas);
  ASSERT_EQ(g.size(), alphas.size());
  ASSERT_EQ(g[0].size(), betas.size());
  EXPECT_NEAR(g[2][1], 1.0, 1e-9);
  for (std::size_t j = 0; j < betas.size(); ++j) {
    EXPECT_GT(g[0][j], 1.0);
    EXPECT_LT(g[4][j], 1.0);
  }
  const auto one = dispersion_grid(5.0, {1.7}, {0.4});
  EXPECT_EQ(one[0][0], index_of_dispersion({5.0, 1.7, 0.4}));
}

TEST(Shape, Examples) {
  const ShapeReport poisson35 = mode_set({3.5, 1, 1});
  EXPECT_EQ(poisson35.modes, std::vector<std::uint64_t>{3});
  EXPECT_EQ(poisson35.shape_class, ShapeClass::unimodal_nonzero);

  const ShapeReport low = mode_set({0.5, 1, 1});
  EXPECT_EQ(low.modes, std::vector<std::uint64_t>{0});
  EXPECT_EQ(low.shape_class, ShapeClass::nonincreasing);

  const ShapeReport tie = mode_set({1, 1, 1});
  EXPECT_EQ(tie.modes, (std::vector<std::uint64_t>{0, 1}));
  EXPECT_EQ(tie.shape_class, ShapeClass::bimodal_adjacent);

  // lambda = Gamma(2a+b)/Gamma(a+b) puts the tie at {1, 2}: a = 2, b = 1 gives 4!/2! = 12.
  const ShapeReport tie12 = mode_set({12, 2, 1});
  EXPECT_EQ(tie12.modes, (std::vector<std::uint64_t>{1, 2}));

  EXPECT_EQ(mode_set({0.9, 0, 1}).shape_class, ShapeClass::nonincreasing);
}

TEST(Shape, ConsistentWithGammaRatioConditions) {
  for (const auto& p : grid()) {
    const ShapeReport s = mode_set(p);
    const double a = p.alpha();
    const double b = p.beta();
    const double ll = std::log(p.lambda());
    if (s.shape_class == ShapeClass::bimodal_adjacent) {
      ASSERT_EQ(s.modes.size(), 2u);
      EXPECT_EQ(s.modes[1], s.modes[0] + 1);
      continue;
    }
    ASSERT_EQ(s.modes.size(), 1u);
    const double k = static_cast<double>(s.modes[0]);
    if (s.shape_class == ShapeClass::nonincreasing) {
      EXPECT_EQ(s.modes[0], 0u);
      EXPECT_LT(ll, std::lgamma(a + b) - std::lgamma(b)) << show(p);
    } else {
      EXPECT_GT(ll, std::lgamma(a * k + b) - std::lgamma(a * k - a + b)) << show(p);
      EXPECT_LT(ll, std::lgamma(a * k + a + b) - std::lgamma(a * k + b)) << show(p);
    }
    // The mode is the pmf maximiser.
    const double at_mode = log_pmf(p, s.modes[0]);
    for (std::uint64_t j = 0; j < 60; ++j) EXPECT_LE(log_pmf(p, j), at_mode + 1e-12);
  }
}

TEST(Sample, PoissonBandAndDeterminism) {
  const auto xs = sample({2, 1, 1}, 42, 100000);
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  EXPECT_LE(std::fabs(m - 2.0), 3.0 * std::sqrt(2.0 / 1e5));
  EXPECT_EQ(xs, sample({2, 1, 1}, 42, 100000));
  EXPECT_NE(xs, sample({2, 1, 1}, 43, 100000));
}

TEST(Sample, OverdispersedReferenceParams) {
  const MlfdParams p(0.6114, 0.1282, 0.1603);
  const std::size_t n = 100000;
  const auto xs = sample(p, 7, n);
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  EXPECT_LE(std::fabs(m - mean(p)), 3.0 * std::sqrt(variance(p) / n));
}
