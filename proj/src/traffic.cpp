#include "rfd/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfd/errors.hpp"

namespace rfd {

std::size_t jam_capacity(const UnitGeometry& u, double jam_density) {
  const double raw = jam_density * u.length_m * u.lanes;
  return static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
}

double congestion_index(std::size_t vehicles, const UnitGeometry& u, double jam_density) {
  if (vehicles == 0) return 0.0;
  const double density = static_cast<double>(vehicles) / (u.length_m * u.lanes);
  return std::min(1.0, density / jam_density);
}

double travel_time(const UnitGeometry& u, double chi, double alpha, double beta) {
  return u.free_flow_s * (1.0 + alpha * std::pow(chi, beta));
}

SignalPlan adjust_signal_splits(const SignalPlan& plan, const std::vector<std::size_t>& queues,
                                double min_green) {
  const std::size_t k = queues.size();
  const double available = plan.cycle_s - plan.lost_s;
  if (k == 0) throw InfeasibleCycle("signal plan has no approaches");
  if (available < min_green * static_cast<double>(k))
    throw InfeasibleCycle("cycle " + std::to_string(plan.cycle_s) + " s minus lost time cannot give " +
                          std::to_string(k) + " approaches " + std::to_string(min_green) + " s of green");

  SignalPlan out = plan;
  out.green_s.assign(k, 0.0);
  std::vector<double> share(k);
  const std::size_t total = std::accumulate(queues.begin(), queues.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) share[i] = total ? static_cast<double>(queues[i]) : 1.0;

  std::vector<bool> floored(k, false);
  for (;;) {
    double pool = available;
    double weight = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (floored[i])
        pool -= min_green;
      else
        weight += share[i];
    }
    bool changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (floored[i]) continue;
      // Since available >= k * min_green, some unfloored approach always keeps
      // a positive share, so weight > 0 here.
      const double g = pool * share[i] / weight;
      if (g < min_green) {
        floored[i] = true;
        changed = true;
      }
    }
    if (changed) continue;

    std::size_t last = k;
    double assigned = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (floored[i]) {
        out.green_s[i] = min_green;
      } else {
        out.green_s[i] = pool * share[i] / weight;
        last = i;
      }
    }
    if (last < k) {
      for (std::size_t i = 0; i < k; ++i)
        if (i != last) assigned += out.green_s[i];
      out.green_s[last] = available - assigned;
    }
    return out;
  }
}

}  // namespace rfd
