#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mlfd::optim {

struct NelderMeadOptions {
  double initial_step = 0.5;
  /// Stop once the simplex diameter (max vertex distance to the best vertex) drops below this.
  double x_tol = 1e-9;
  std::size_t max_evals = 20000;
  /// Optional box; trial points are projected onto it. Empty means unbounded.
  std::vector<double> lower;
  std::vector<double> upper;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evals = 0;
  double diameter = 0.0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;

/// Minimizes `f` from `x0`. Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts);

}  // namespace mlfd::optim
