#pragma once

#include <cstdint>
#include <vector>

#include "mlfd/distribution.h"

namespace mlfd::queue {

/// Birth-death queue with Poisson arrivals and state-dependent exponential service.
/// In state n >= 1 the service rate is mu (n a)(n a - 1)...(n a - a + 1) for pressure a >= 1
/// and mu for a = 0, so the stationary law is MLFD(arrival_rate / mu, a, 1).
struct QueueConfig {
  double arrival_rate = 1.0;
  double base_service_rate = 1.0;
  unsigned pressure = 1;
  /// Defaults to 10% of measure_time when left at zero.
  double warmup_time = 0.0;
  double measure_time = 1e5;
  /// Arrivals that would push the system above this state are rejected (and counted).
  /// Zero selects recommended_max_state().
  std::uint64_t max_state = 0;
  std::uint64_t seed = 1;

  double traffic() const noexcept { return arrival_rate / base_service_rate; }
};

/// Throws DomainError for non-positive rates/times or an unstable geometric queue
/// (pressure 0 with arrival_rate >= base_service_rate).
void validate(const QueueConfig& config);

struct OccupancyHistogram {
  std::vector<double> time_in_state;
  double total_time = 0.0;
  std::uint64_t events = 0;
  std::uint64_t rejected_arrivals = 0;

  /// time_in_state normalized by total_time.
  std::vector<double> probabilities() const;
  /// Time-weighted mean state.
  double mean() const;
};

/// mu_n. Throws DomainError for n == 0 (no service in the empty state).
double service_rate(const QueueConfig& config, std::uint64_t n);

/// Smallest state whose exact stationary tail mass P(N > state) is below 1e-8.
std::uint64_t recommended_max_state(double z, unsigned pressure);

/// Event-driven simulation; occupancy is time-weighted and recorded after warmup.
OccupancyHistogram simulate(const QueueConfig& config);

/// Exact stationary law MLFD(z, pressure, 1) tabulated up to kmax.
PmfTable stationary_exact(double z, unsigned pressure, std::uint64_t kmax);

/// Total variation distance between the empirical occupancy and an exact table; the
/// exact mass beyond the table (tail_mass) and beyond the histogram counts in full.
double tv_distance(const std::vector<double>& empirical, const PmfTable& exact);

/// Counter-based generator: the i-th output is a SplitMix64 finalizer of (seed, i), so a
/// stream is reproducible independently of how many other streams exist.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}
  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double next_uniform() noexcept;
  /// Exponential with the given rate by inversion.
  double next_exponential(double rate) noexcept;
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace mlfd::queue
