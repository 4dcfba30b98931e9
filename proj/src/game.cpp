#include "cobandit/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cobandit::game {

double raw_gain(const NetworkSpec& network, int n_clients) {
  if (n_clients < 1) throw std::invalid_argument("raw_gain: n_clients must be >= 1");
  if (network.capacity_mbps <= 0.0)
    throw std::invalid_argument("raw_gain: capacity must be positive");
  return network.capacity_mbps / static_cast<double>(n_clients);
}

double scaled_gain(const NetworkSpec& network, int n_on_network, bool chosen,
                   const GainScale& scale) {
  if (scale.c_max <= 0.0) throw std::invalid_argument("scaled_gain: c_max must be positive");
  if (n_on_network < 0) throw std::invalid_argument("scaled_gain: negative client count");
  if (chosen && n_on_network == 0)
    throw std::invalid_argument("scaled_gain: chosen network with zero clients");
  const int effective = chosen ? n_on_network : n_on_network + 1;
  return raw_gain(network, effective) / scale.c_max;
}

std::vector<double> perceived_loss(const std::vector<std::optional<double>>& gains) {
  double best = -std::numeric_limits<double>::infinity();
  bool any_known = false;
  for (const auto& g : gains) {
    if (g) {
      best = std::max(best, *g);
      any_known = true;
    }
  }
  std::vector<double> losses(gains.size(), 0.0);
  if (!any_known) return losses;
  for (size_t i = 0; i < gains.size(); ++i) {
    if (gains[i]) losses[i] = std::clamp(best - *gains[i], 0.0, 1.0);
  }
  return losses;
}

Allocation nash_allocation(const std::vector<double>& capacities, int n_devices) {
  if (capacities.empty()) throw std::invalid_argument("nash_allocation: no networks");
  if (n_devices < 1) throw std::invalid_argument("nash_allocation: need at least one device");
  for (double c : capacities) {
    if (c <= 0.0) throw std::invalid_argument("nash_allocation: capacities must be positive");
  }
  Allocation alloc;
  alloc.counts.assign(capacities.size(), 0);
  for (int placed = 0; placed < n_devices; ++placed) {
    size_t best = 0;
    double best_gain = -1.0;
    for (size_t m = 0; m < capacities.size(); ++m) {
      const double gain = capacities[m] / static_cast<double>(alloc.counts[m] + 1);
      if (gain > best_gain) {
        best_gain = gain;
        best = m;
      }
    }
    ++alloc.counts[best];
  }
  return alloc;
}

bool is_nash(const std::vector<double>& capacities, const Allocation& allocation) {
  const auto& counts = allocation.counts;
  if (counts.size() != capacities.size())
    throw std::invalid_argument("is_nash: size mismatch");
  constexpr double kEps = 1e-12;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 1) continue;
    const double own = capacities[i] / static_cast<double>(counts[i]);
    for (size_t m = 0; m < counts.size(); ++m) {
      if (m == i) continue;
      const double elsewhere = capacities[m] / static_cast<double>(counts[m] + 1);
      if (elsewhere > own + kEps) return false;
    }
  }
  return true;
}

double distance_to_ne(const Allocation& current, const Allocation& ne,
                      const std::vector<double>& capacities) {
  const auto& cur = current.counts;
  const auto& eq = ne.counts;
  if (cur.size() != eq.size() || cur.size() != capacities.size())
    throw std::invalid_argument("distance_to_ne: allocations over different networks");
  const int total_cur = std::accumulate(cur.begin(), cur.end(), 0);
  const int total_ne = std::accumulate(eq.begin(), eq.end(), 0);
  if (total_cur != total_ne)
    throw std::invalid_argument("distance_to_ne: device totals differ");

  double worst = 0.0;
  for (size_t i = 0; i < cur.size(); ++i) {
    if (eq[i] >= 1) {
      const double ratio = static_cast<double>(cur[i]) / static_cast<double>(eq[i]);
      worst = std::max(worst, ratio - 1.0);
    } else if (cur[i] > 0) {
      // Network empty at equilibrium but occupied now: measure the occupants'
      // best-response improvement onto an underloaded network.
      const double own = capacities[i] / static_cast<double>(cur[i]);
      double best_alternative = 0.0;
      for (size_t m = 0; m < cur.size(); ++m) {
        if (m == i || cur[m] >= eq[m]) continue;
        best_alternative =
            std::max(best_alternative, capacities[m] / static_cast<double>(cur[m] + 1));
      }
      if (best_alternative > own) worst = std::max(worst, best_alternative / own - 1.0);
    }
  }
  return 100.0 * worst;
}

std::string to_string(NetworkKind kind) {
  return kind == NetworkKind::wifi ? "wifi" : "cellular";
}

NetworkKind network_kind_from_string(const std::string& s) {
  if (s == "wifi") return NetworkKind::wifi;
  if (s == "cellular") return NetworkKind::cellular;
  throw std::invalid_argument("unknown network kind: " + s);
}

}  // namespace cobandit::game
