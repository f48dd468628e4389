#include "mlfd/nelder_mead.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlfd/errors.h"

namespace mlfd::optim {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Vertex {
  std::vector<double> x;
  double f;
};

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts) {
  const std::size_t dim = x0.size();
  if (dim == 0) throw DomainError("nelder_mead: empty starting point");
  const bool boxed = !opts.lower.empty();
  if (boxed && (opts.lower.size() != dim || opts.upper.size() != dim)) {
    throw DomainError("nelder_mead: bounds do not match the dimension");
  }

  std::size_t evals = 0;
  auto project = [&](std::vector<double>& x) {
    if (!boxed) return;
    for (std::size_t i = 0; i < dim; ++i) x[i] = std::clamp(x[i], opts.lower[i], opts.upper[i]);
  };
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  project(x0);
  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  simplex.push_back({x0, eval(x0)});
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> x = x0;
    x[i] += opts.initial_step;
    // Step inward when the box would swallow the step.
    if (boxed && x[i] > opts.upper[i]) x[i] = x0[i] - opts.initial_step;
    project(x);
    simplex.push_back({x, eval(x)});
  }

  auto by_value = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t v = 1; v <= dim; ++v) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double diff = simplex[v].x[i] - simplex[0].x[i];
        s += diff * diff;
      }
      d = std::max(d, std::sqrt(s));
    }
    return d;
  };

  NelderMeadResult result;
  std::vector<double> centroid(dim);
  auto along = [&](double t, const std::vector<double>& worst) {
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < dim; ++i) x[i] = centroid[i] + t * (centroid[i] - worst[i]);
    project(x);
    return x;
  };

  while (true) {
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    const double d = diameter();
    if (d < opts.x_tol || evals >= opts.max_evals) {
      result.converged = d < opts.x_tol;
      result.diameter = d;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v < dim; ++v) {
      for (std::size_t i = 0; i < dim; ++i) centroid[i] += simplex[v].x[i];
    }
    for (double& c : centroid) c /= static_cast<double>(dim);

    Vertex& worst = simplex[dim];
    const double f_best = simplex[0].f;
    const double f_second_worst = simplex[dim - 1].f;

    std::vector<double> xr = along(kReflect, worst.x);
    const double fr = eval(xr);
    if (fr < f_best) {
      std::vector<double> xe = along(kExpand, worst.x);
      const double fe = eval(xe);
      if (fe < fr) {
        worst = {std::move(xe), fe};
      } else {
        worst = {std::move(xr), fr};
      }
      continue;
    }
    if (fr < f_second_worst) {
      worst = {std::move(xr), fr};
      continue;
    }
    const bool outside = fr < worst.f;
    std::vector<double> xc = along(outside ? kContract : -kContract, worst.x);
    const double fc = eval(xc);
    if (fc < (outside ? fr : worst.f)) {
      worst = {std::move(xc), fc};
      continue;
    }
    for (std::size_t v = 1; v <= dim; ++v) {
      for (std::size_t i = 0; i < dim; ++i) {
        simplex[v].x[i] = simplex[0].x[i] + kShrink * (simplex[v].x[i] - simplex[0].x[i]);
      }
      project(simplex[v].x);
      simplex[v].f = eval(simplex[v].x);
    }
  }

  result.x = simplex[0].x;
  result.value = simplex[0].f;
  result.evals = evals;
  return result;
}

}  // namespace mlfd::optim
