#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlfd/distribution.h"

namespace mlfd::inference {

/// Grouped count data {(x_i, f_i)} with strictly increasing values and positive counts.
class FreqTable {
 public:
  using Row = std::pair<std::uint64_t, std::uint64_t>;

  /// Throws DataError on zero counts or values that are not strictly increasing.
  explicit FreqTable(std::vector<Row> rows);
  /// Sorts the rows first; duplicate values are still rejected.
  static FreqTable from_unsorted(std::vector<Row> rows);

  const std::vector<Row>& rows() const noexcept { return rows_; }
  std::uint64_t n() const noexcept { return n_; }
  /// sum f_i x_i
  double total() const noexcept { return total_; }
  /// Identifies the data a FitResult was computed on.
  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

 private:
  std::vector<Row> rows_;
  std::uint64_t n_ = 0;
  double total_ = 0.0;
  std::uint64_t fingerprint_ = 0;
};

struct SampleMoments {
  double mean = 0.0;
  /// Divisor n.
  double variance = 0.0;
  double index_of_dispersion = 0.0;
};

/// Throws DataError for n < 2 and DomainError when the mean is zero.
SampleMoments sample_moments(const FreqTable& data);

enum class ModelKind {
  Full,           ///< MLFD(lambda, alpha, beta)
  HpAlphaFixed1,  ///< hyper-Poisson, alpha = 1
  Beta1Fixed,     ///< MLFD(lambda, alpha, 1)
};

std::string_view to_string(ModelKind k) noexcept;
/// Accepts "full", "hp", "beta1". Throws DomainError otherwise.
ModelKind parse_model_kind(std::string_view s);
int free_parameter_count(ModelKind k) noexcept;

/// Dense symmetric matrix over the free parameters, row-major.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> data;

  Matrix() = default;
  explicit Matrix(std::size_t size) : n(size), data(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

/// Names of the free parameters of `k`, in the order used by Matrix rows.
std::vector<std::string> free_parameter_names(ModelKind k);

struct FitResult {
  ModelKind kind = ModelKind::Full;
  MlfdParams params{1.0, 1.0, 1.0};
  double loglik = 0.0;
  double aic = 0.0;
  std::optional<Matrix> cov;
  bool converged = false;
  /// The optimum sits on the box of the transformed coordinates (e.g. alpha -> 0).
  bool at_bound = false;
  int n_restarts_used = 0;
  std::size_t n_evals = 0;
  double simplex_diameter = 0.0;
  std::uint64_t data_fingerprint = 0;
};

struct FitOptions {
  std::uint64_t seed = 20150101;
  /// Number of starting points (at least 1).
  int restarts = 8;
  double x_tol = 1e-9;
  std::size_t max_evals_per_start = 20000;
  /// Additional starting points (lambda, alpha, beta), e.g. optima of nested models.
  std::vector<MlfdParams> extra_starts;
  bool parallel = true;
};

/// Transformed coordinates ln(lambda), ln(alpha), ln(beta) are confined to this box.
inline constexpr double kLogLower = -30.0;
inline constexpr double kLogUpper = 30.0;

/// (sum f_i x_i) ln lambda - sum f_i lnGamma(alpha x_i + beta) - n ln E_{alpha,beta}(lambda).
double loglik(const MlfdParams& params, const FreqTable& data);

/// Multi-start Nelder-Mead maximum likelihood on log-transformed parameters.
/// Throws FitError for n < 3 or fewer than two distinct values.
FitResult fit(const FreqTable& data, ModelKind kind, const FitOptions& opts = {});

struct CovarianceResult {
  std::optional<Matrix> matrix;
  bool boundary_solution = false;
  std::string reason;
};

/// Inverse of the negative central-difference Hessian of `f` at `x` (steps `h`), symmetrized
/// before inversion. No matrix is returned when -H is not positive definite.
CovarianceResult inverse_negative_hessian(const std::function<double(std::span<const double>)>& f,
                                          std::span<const double> x, std::span<const double> h);

/// Asymptotic covariance of the MLEs: inverse observed information with relative step 1e-4.
CovarianceResult covariance(const FitResult& result, const FreqTable& data);

struct LrTestResult {
  double statistic = 0.0;
  int df = 1;
  double p_value = 1.0;
};

/// 2 (loglik_full - loglik_restricted), referred to chi-square with one degree of freedom.
/// Throws FitError when the models are not nested or were fitted to different data.
LrTestResult lr_test(const FitResult& restricted, const FitResult& full);

}  // namespace mlfd::inference
