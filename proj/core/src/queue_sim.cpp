#include "mlfd/queue_sim.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlfd/errors.h"
#include "numeric_detail.h"

namespace mlfd::queue {

namespace {

constexpr double kMaxStateTail = 1e-8;

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::next_u64() noexcept {
  ++counter_;
  return splitmix64(splitmix64(seed_) + 0x9e3779b97f4a7c15ULL * counter_);
}

double CounterRng::next_uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::next_exponential(double rate) noexcept { return -std::log1p(-next_uniform()) / rate; }

void validate(const QueueConfig& c) {
  auto positive = [](double v, const char* what) {
    if (!std::isfinite(v) || v <= 0.0) throw DomainError(std::string("queue: ") + what + " must be finite and > 0");
  };
  positive(c.arrival_rate, "arrival rate");
  positive(c.base_service_rate, "service rate");
  positive(c.measure_time, "measure time");
  if (!std::isfinite(c.warmup_time) || c.warmup_time < 0.0) {
    throw DomainError("queue: warmup time must be finite and >= 0");
  }
  if (c.pressure == 0 && c.arrival_rate >= c.base_service_rate) {
    throw DomainError("queue: with pressure 0 the queue is M/M/1 and is unstable unless arrival rate < service rate");
  }
}

double service_rate(const QueueConfig& config, std::uint64_t n) {
  if (n == 0) throw DomainError("service_rate: no service takes place in the empty state");
  const double mu = config.base_service_rate;
  if (config.pressure == 0) return mu;
  // Falling factorial (n a)(n a - 1)...(n a - a + 1).
  const double top = static_cast<double>(n) * config.pressure;
  double rate = mu;
  for (unsigned i = 0; i < config.pressure; ++i) rate *= top - i;
  return rate;
}

std::uint64_t recommended_max_state(double z, unsigned pressure) {
  const MlfdParams p(z, pressure, 1.0);
  double lp = log_pmf(p, 0);
  detail::CompensatedSum cumulative;
  cumulative.add(std::exp(lp));
  for (std::uint64_t k = 0;; ++k) {
    const double lr = log_ratio(p, k);
    if (lr < 0.0 && 1.0 - cumulative.value() < kMaxStateTail) return k;
    lp += lr;
    cumulative.add(std::exp(lp));
    if (k > (std::uint64_t{1} << 40)) throw ConvergenceError("recommended_max_state: tail never drops below 1e-8");
  }
}

OccupancyHistogram simulate(const QueueConfig& config) {
  validate(config);
  const std::uint64_t max_state =
      config.max_state > 0 ? config.max_state : recommended_max_state(config.traffic(), config.pressure);
  const double warmup = config.warmup_time > 0.0 ? config.warmup_time : 0.1 * config.measure_time;
  const double horizon = warmup + config.measure_time;

  std::vector<detail::CompensatedSum> occupancy(static_cast<std::size_t>(max_state) + 1);
  CounterRng rng(config.seed);
  OccupancyHistogram hist;
  double t = 0.0;
  std::uint64_t n = 0;
  while (true) {
    const double death = n > 0 ? service_rate(config, n) : 0.0;
    const double total_rate = config.arrival_rate + death;
    const double t_next = t + rng.next_exponential(total_rate);
    const double from = std::max(t, warmup);
    const double to = std::min(t_next, horizon);
    if (to > from) occupancy[static_cast<std::size_t>(n)].add(to - from);
    if (t_next >= horizon) break;
    t = t_next;
    const bool arrival = rng.next_uniform() * total_rate < config.arrival_rate;
    if (t >= warmup) ++hist.events;
    if (arrival) {
      if (n == max_state) {
        if (t >= warmup) ++hist.rejected_arrivals;
      } else {
        ++n;
      }
    } else {
      --n;
    }
  }

  hist.time_in_state.reserve(occupancy.size());
  detail::CompensatedSum total;
  for (const auto& s : occupancy) {
    hist.time_in_state.push_back(s.value());
    total.add(s.value());
  }
  hist.total_time = total.value();
  return hist;
}

std::vector<double> OccupancyHistogram::probabilities() const {
  std::vector<double> p(time_in_state.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = time_in_state[i] / total_time;
  return p;
}

double OccupancyHistogram::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < time_in_state.size(); ++i) s += static_cast<double>(i) * time_in_state[i];
  return s / total_time;
}

PmfTable stationary_exact(double z, unsigned pressure, std::uint64_t kmax) {
  return pmf_table(MlfdParams(z, pressure, 1.0), kmax);
}

double tv_distance(const std::vector<double>& empirical, const PmfTable& exact) {
  const std::size_t common = std::min(empirical.size(), exact.probs.size());
  double l1 = exact.tail_mass;
  for (std::size_t k = 0; k < common; ++k) l1 += std::fabs(empirical[k] - exact.probs[k]);
  for (std::size_t k = common; k < empirical.size(); ++k) l1 += empirical[k];
  for (std::size_t k = common; k < exact.probs.size(); ++k) l1 += exact.probs[k];
  return 0.5 * l1;
}

}  // namespace mlfd::queue
