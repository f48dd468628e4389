#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace mlfd {

/// Parameters of MLFD(lambda, alpha, beta): P(X = k) = lambda^k / (Gamma(alpha k + beta) E_{alpha,beta}(lambda)).
///
/// alpha == 0 is admitted as the geometric boundary case and then requires lambda < 1.
class MlfdParams {
 public:
  /// Throws DomainError unless lambda > 0, alpha >= 0, beta > 0 (all finite) and,
  /// for alpha == 0, lambda < 1.
  MlfdParams(double lambda, double alpha, double beta);

  double lambda() const noexcept { return lambda_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  friend bool operator==(const MlfdParams&, const MlfdParams&) = default;

 private:
  double lambda_;
  double alpha_;
  double beta_;
};

struct PmfTable {
  /// probs[k] = P(X = k), k = 0..kmax.
  std::vector<double> probs;
  /// Certified upper bound on P(X > kmax).
  double tail_mass = 0.0;
};

enum class ShapeClass { nonincreasing, unimodal_nonzero, bimodal_adjacent };
enum class DispersionClass { under, equi, over };

std::string_view to_string(ShapeClass c) noexcept;
std::string_view to_string(DispersionClass c) noexcept;

struct ShapeReport {
  std::vector<std::uint64_t> modes;
  ShapeClass shape_class = ShapeClass::nonincreasing;
  DispersionClass dispersion_class = DispersionClass::equi;
  double index_of_dispersion = 1.0;
};

/// ln E_{alpha,beta}(lambda), the log normalizing constant.
double log_normalizer(const MlfdParams& p);

double pmf(const MlfdParams& p, std::uint64_t k);
double log_pmf(const MlfdParams& p, std::uint64_t k);

/// ln P(X = k+1) - ln P(X = k) = ln lambda + lnGamma(alpha k + beta) - lnGamma(alpha k + alpha + beta).
double log_ratio(const MlfdParams& p, std::uint64_t k);

/// Probabilities 0..kmax from P(X = 0) and the two-term recurrence.
PmfTable pmf_table(const MlfdParams& p, std::uint64_t kmax);

/// P(X <= r) = 1 - lambda^{r+1} E_{alpha, beta+(r+1)alpha}(lambda) / E_{alpha,beta}(lambda).
double cdf(const MlfdParams& p, std::uint64_t r);
/// P(X > t).
double survival(const MlfdParams& p, std::uint64_t t);
double log_survival(const MlfdParams& p, std::uint64_t t);

/// Discrete failure rate P(X = t) / P(X >= t) = 1 / (Gamma(alpha t + beta) E_{alpha, beta + alpha t}(lambda)).
///
/// Note this is the "P(X >= t)" form; the ratio P(X = t) / P(X > t) is a different quantity.
double hazard(const MlfdParams& p, std::uint64_t t);

/// E[s^X] = E_{alpha,beta}(lambda s) / E_{alpha,beta}(lambda) for s >= 0 (as far as the
/// series converges). The mgf is pgf(e^t), the factorial mgf is pgf(1 + t).
double pgf(const MlfdParams& p, double s);

/// E[(X+1)(X+2)...(X+r)] = r! E^{r+1}_{alpha,beta}(lambda) / E_{alpha,beta}(lambda), r >= 1.
double rising_shifted_moment(const MlfdParams& p, unsigned r);

/// E[X^r], 1 <= r <= 6, by summation over the pmf with a certified tail below 1e-13 of the result.
double moment_raw(const MlfdParams& p, unsigned r);
double mean(const MlfdParams& p);
double variance(const MlfdParams& p);
double index_of_dispersion(const MlfdParams& p);

/// |ID - 1| <= 1e-9 is equi-dispersion.
DispersionClass classify_dispersion(double index_of_dispersion) noexcept;

/// result[i][j] = index_of_dispersion(lambda, alpha_grid[i], beta_grid[j]).
std::vector<std::vector<double>> dispersion_grid(double lambda, const std::vector<double>& alpha_grid,
                                                 const std::vector<double>& beta_grid);

/// Modes and shape class. Successive-probability ratios decrease in k (log-concavity), so
/// the mode is the first k with P(k+1) <= P(k); a ratio within 1e-12 of one gives two adjacent modes.
ShapeReport mode_set(const MlfdParams& p);

/// n draws by inversion against the cumulative pmf; deterministic given seed.
std::vector<std::uint64_t> sample(const MlfdParams& p, std::uint64_t seed, std::size_t n);

}  // namespace mlfd
