#include "mlfd/inference.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "mlfd/errors.h"
#include "mlfd/nelder_mead.h"
#include "mlfd/special_functions.h"
#include "numeric_detail.h"

namespace mlfd::inference {

namespace {

using detail::lgamma_pos;

constexpr double kAgreementTol = 1e-6;
constexpr double kBoundSlack = 1e-6;
constexpr double kHessianRelStep = 1e-4;
constexpr double kPolishStep = 0.1;
constexpr int kMaxPolish = 5;
constexpr double kLrSlack = 1e-8;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) noexcept {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

/// Maps free log-coordinates to parameters and back.
struct Parameterization {
  ModelKind kind;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(free_parameter_count(kind)); }

  MlfdParams params(std::span<const double> t) const {
    switch (kind) {
      case ModelKind::Full:
        return MlfdParams(std::exp(t[0]), std::exp(t[1]), std::exp(t[2]));
      case ModelKind::HpAlphaFixed1:
        return MlfdParams(std::exp(t[0]), 1.0, std::exp(t[1]));
      case ModelKind::Beta1Fixed:
        return MlfdParams(std::exp(t[0]), std::exp(t[1]), 1.0);
    }
    throw FitError("unknown model kind");
  }

  /// Free parameters on the natural scale.
  std::vector<double> natural(const MlfdParams& p) const {
    switch (kind) {
      case ModelKind::Full:
        return {p.lambda(), p.alpha(), p.beta()};
      case ModelKind::HpAlphaFixed1:
        return {p.lambda(), p.beta()};
      case ModelKind::Beta1Fixed:
        return {p.lambda(), p.alpha()};
    }
    return {};
  }

  MlfdParams from_natural(std::span<const double> v) const {
    switch (kind) {
      case ModelKind::Full:
        return MlfdParams(v[0], v[1], v[2]);
      case ModelKind::HpAlphaFixed1:
        return MlfdParams(v[0], 1.0, v[1]);
      case ModelKind::Beta1Fixed:
        return MlfdParams(v[0], v[1], 1.0);
    }
    throw FitError("unknown model kind");
  }

  std::vector<double> transformed(double lambda, double alpha, double beta) const {
    auto clamp_log = [](double v) { return std::clamp(std::log(v), kLogLower, kLogUpper); };
    switch (kind) {
      case ModelKind::Full:
        return {clamp_log(lambda), clamp_log(alpha), clamp_log(beta)};
      case ModelKind::HpAlphaFixed1:
        return {clamp_log(lambda), clamp_log(beta)};
      case ModelKind::Beta1Fixed:
        return {clamp_log(lambda), clamp_log(alpha)};
    }
    return {};
  }
};

struct StartOutcome {
  optim::NelderMeadResult best;
  std::size_t evals = 0;
};

StartOutcome run_start(const optim::Objective& objective, std::vector<double> x0, const optim::NelderMeadOptions& base) {
  StartOutcome out;
  out.best = optim::nelder_mead(objective, std::move(x0), base);
  out.evals = out.best.evals;
  // Restart from the best vertex with a fresh simplex until that stops helping; a
  // collapsed simplex (common when it is pressed against the box) can stall early.
  optim::NelderMeadOptions polish = base;
  polish.initial_step = kPolishStep;
  for (int i = 0; i < kMaxPolish; ++i) {
    optim::NelderMeadResult next = optim::nelder_mead(objective, out.best.x, polish);
    out.evals += next.evals;
    const bool improved = next.value < out.best.value - 1e-10;
    if (next.value <= out.best.value) out.best = std::move(next);
    if (!improved) break;
  }
  return out;
}

}  // namespace

FreqTable::FreqTable(std::vector<Row> rows) : rows_(std::move(rows)) {
  fingerprint_ = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto [value, count] = rows_[i];
    if (count == 0) {
      throw DataError("frequency table: count for value " + std::to_string(value) + " must be positive");
    }
    if (i > 0 && value <= rows_[i - 1].first) {
      throw DataError("frequency table: values must be strictly increasing (value " + std::to_string(value) +
                      " follows " + std::to_string(rows_[i - 1].first) + ")");
    }
    n_ += count;
    total_ += static_cast<double>(value) * static_cast<double>(count);
    fingerprint_ = mix(mix(fingerprint_, value), count);
  }
}

FreqTable FreqTable::from_unsorted(std::vector<Row> rows) {
  std::sort(rows.begin(), rows.end());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].first == rows[i - 1].first) {
      throw DataError("frequency table: duplicate value " + std::to_string(rows[i].first));
    }
  }
  return FreqTable(std::move(rows));
}

SampleMoments sample_moments(const FreqTable& data) {
  if (data.n() < 2) throw DataError("sample_moments: need at least two observations");
  const double n = static_cast<double>(data.n());
  SampleMoments m;
  m.mean = data.total() / n;
  double ss = 0.0;
  for (const auto& [value, count] : data.rows()) {
    const double d = static_cast<double>(value) - m.mean;
    ss += static_cast<double>(count) * d * d;
  }
  m.variance = ss / n;
  if (m.mean == 0.0) throw DomainError("sample_moments: index of dispersion undefined for zero mean");
  m.index_of_dispersion = m.variance / m.mean;
  return m;
}

std::string_view to_string(ModelKind k) noexcept {
  switch (k) {
    case ModelKind::Full:
      return "full";
    case ModelKind::HpAlphaFixed1:
      return "hp";
    case ModelKind::Beta1Fixed:
      return "beta1";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "full") return ModelKind::Full;
  if (s == "hp") return ModelKind::HpAlphaFixed1;
  if (s == "beta1") return ModelKind::Beta1Fixed;
  throw DomainError("unknown model '" + std::string(s) + "' (expected full, hp or beta1)");
}

int free_parameter_count(ModelKind k) noexcept { return k == ModelKind::Full ? 3 : 2; }

std::vector<std::string> free_parameter_names(ModelKind k) {
  switch (k) {
    case ModelKind::Full:
      return {"lambda", "alpha", "beta"};
    case ModelKind::HpAlphaFixed1:
      return {"lambda", "beta"};
    case ModelKind::Beta1Fixed:
      return {"lambda", "alpha"};
  }
  return {};
}

double loglik(const MlfdParams& params, const FreqTable& data) {
  double sum_lgamma = 0.0;
  for (const auto& [value, count] : data.rows()) {
    sum_lgamma += static_cast<double>(count) * lgamma_pos(params.alpha() * static_cast<double>(value) + params.beta());
  }
  const double log_norm = special::log_mlf(params.alpha(), params.beta(), params.lambda()).log_value;
  return data.total() * std::log(params.lambda()) - sum_lgamma - static_cast<double>(data.n()) * log_norm;
}

FitResult fit(const FreqTable& data, ModelKind kind, const FitOptions& opts) {
  if (data.n() < 3) throw FitError("fit: need at least three observations");
  if (data.rows().size() < 2) throw FitError("fit: data take a single value; the likelihood has no interior maximum");
  if (opts.restarts < 1) throw FitError("fit: restarts must be >= 1");

  const Parameterization param{kind};
  const std::size_t dim = param.dim();
  const optim::Objective objective = [&](std::span<const double> t) {
    try {
      return -loglik(param.params(t), data);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // Starting points: moment-informed, near-geometric corner(s), sub/over-dispersed guesses,
  // then seeded jitter around the moment start.
  const double m = data.total() / static_cast<double>(data.n());
  const double g = std::max(m / (1.0 + m), 1e-3);
  std::vector<std::array<double, 3>> starts = {
      {std::max(m, 1e-3), 1.0, 1.0}, {g, 1e-3, 1.0},   {g, 1e-3, 1e-3},
      {std::max(m, 1e-3), 0.5, 0.5}, {4.0 * m * m + 1e-3, 2.0, 1.0}, {m + 1.0, 1.0, m + 1.0},
  };
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  while (starts.size() < static_cast<std::size_t>(opts.restarts)) {
    starts.push_back({std::max(m, 1e-3) * std::exp(jitter(rng)), std::exp(jitter(rng)), std::exp(jitter(rng))});
  }
  starts.resize(static_cast<std::size_t>(opts.restarts));
  for (const MlfdParams& p : opts.extra_starts) starts.push_back({p.lambda(), p.alpha(), p.beta()});

  optim::NelderMeadOptions nm;
  nm.x_tol = opts.x_tol;
  nm.max_evals = opts.max_evals_per_start;
  nm.lower.assign(dim, kLogLower);
  nm.upper.assign(dim, kLogUpper);

  std::vector<StartOutcome> outcomes(starts.size());
  if (opts.parallel && starts.size() > 1) {
    std::vector<std::future<StartOutcome>> jobs;
    jobs.reserve(starts.size());
    for (const auto& s : starts) {
      jobs.push_back(std::async(std::launch::async, run_start, std::cref(objective),
                                param.transformed(s[0], s[1], s[2]), std::cref(nm)));
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i) {
      outcomes[i] = run_start(objective, param.transformed(starts[i][0], starts[i][1], starts[i][2]), nm);
    }
  }

  std::vector<std::size_t> order(outcomes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return outcomes[a].best.value < outcomes[b].best.value; });
  const StartOutcome& best = outcomes[order.front()];
  if (!std::isfinite(best.best.value)) {
    throw FitError("fit: the likelihood could not be evaluated at any starting point");
  }

  FitResult result;
  result.kind = kind;
  result.params = param.params(best.best.x);
  result.loglik = -best.best.value;
  result.aic = -2.0 * result.loglik + 2.0 * free_parameter_count(kind);
  result.n_restarts_used = static_cast<int>(outcomes.size());
  for (const auto& o : outcomes) result.n_evals += o.evals;
  result.simplex_diameter = best.best.diameter;
  result.data_fingerprint = data.fingerprint();
  for (double t : best.best.x) {
    if (t <= kLogLower + kBoundSlack || t >= kLogUpper - kBoundSlack) result.at_bound = true;
  }
  bool agree = true;
  if (outcomes.size() > 1) {
    agree = std::fabs(outcomes[order[1]].best.value - best.best.value) <= kAgreementTol;
  }
  result.converged = best.best.diameter < opts.x_tol && agree;

  if (result.converged && !result.at_bound) {
    CovarianceResult c = covariance(result, data);
    result.cov = std::move(c.matrix);
  }
  return result;
}

CovarianceResult inverse_negative_hessian(const std::function<double(std::span<const double>)>& f,
                                          std::span<const double> x, std::span<const double> h) {
  const std::size_t d = x.size();
  CovarianceResult out;
  std::vector<double> pt(x.begin(), x.end());
  auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
    pt.assign(x.begin(), x.end());
    pt[i] += di;
    pt[j] += dj;
    return f(pt);
  };
  const double f0 = f(x);
  Eigen::MatrixXd hess(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    const double hi = h[i];
    hess(i, i) = (at(i, hi, i, 0.0) - 2.0 * f0 + at(i, -hi, i, 0.0)) / (hi * hi);
    for (std::size_t j = i + 1; j < d; ++j) {
      const double hj = h[j];
      const double v = (at(i, hi, j, hj) - at(i, hi, j, -hj) - at(i, -hi, j, hj) + at(i, -hi, j, -hj)) / (4.0 * hi * hj);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  if (!hess.allFinite()) {
    out.boundary_solution = true;
    out.reason = "Hessian is not finite";
    return out;
  }
  const Eigen::MatrixXd info = -0.5 * (hess + hess.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) {
    out.boundary_solution = true;
    out.reason = "observed information is not positive definite";
    return out;
  }
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
  Matrix m(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) m(i, j) = 0.5 * (inv(i, j) + inv(j, i));
  }
  out.matrix = std::move(m);
  return out;
}

CovarianceResult covariance(const FitResult& result, const FreqTable& data) {
  const Parameterization param{result.kind};
  const std::vector<double> theta = param.natural(result.params);
  CovarianceResult out;
  const double lower = 10.0 * std::exp(kLogLower);
  for (double v : theta) {
    if (v <= lower) {
      out.boundary_solution = true;
      out.reason = "a free parameter sits at its lower bound";
      return out;
    }
  }
  if (result.at_bound) {
    out.boundary_solution = true;
    out.reason = "the optimum lies on the parameter box";
    return out;
  }
  std::vector<double> h(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) h[i] = kHessianRelStep * theta[i];
  auto f = [&](std::span<const double> v) {
    try {
      return loglik(param.from_natural(v), data);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  return inverse_negative_hessian(f, theta, h);
}

LrTestResult lr_test(const FitResult& restricted, const FitResult& full) {
  if (full.kind != ModelKind::Full || restricted.kind == ModelKind::Full) {
    throw FitError("lr_test: the restricted model must be hp or beta1 and the alternative full");
  }
  if (restricted.data_fingerprint != full.data_fingerprint) {
    throw FitError("lr_test: the two fits were computed on different data");
  }
  double stat = 2.0 * (full.loglik - restricted.loglik);
  if (stat < 0.0) {
    if (stat < -kLrSlack) {
      throw FitError("lr_test: restricted log-likelihood exceeds the full one by " + std::to_string(-stat / 2.0) +
                     "; the full fit did not reach its maximum");
    }
    stat = 0.0;
  }
  LrTestResult r;
  r.statistic = stat;
  r.df = 1;
  r.p_value = special::reg_gamma_q(0.5, stat / 2.0);
  return r;
}

}  // namespace mlfd::inference
