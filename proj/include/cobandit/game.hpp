#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cobandit::game {

enum class NetworkKind { wifi, cellular };

// A wireless network with a fixed aggregate data rate, equally shared
// among its clients. The kind only selects the switching-delay model.
struct NetworkSpec {
  int id = 0;
  double capacity_mbps = 0.0;
  NetworkKind kind = NetworkKind::wifi;
};

// Region whose devices see the same network set and hear each other.
struct ServiceArea {
  int id = 0;
  std::vector<int> networks;  // network ids, sorted, unique, non-empty
};

// Per-network client counts; sums to the number of active devices.
struct Allocation {
  std::vector<int> counts;
};

// Gains are scaled into [0, 1] by the largest capacity in the scenario,
// so a sole client on the best network scores exactly 1.
struct GainScale {
  double c_max = 1.0;
};

// Equal-share bit rate in Mbps. n_clients must be >= 1.
double raw_gain(const NetworkSpec& network, int n_clients);

// Gain in [0, 1] as a device perceives it: a device on the network sees the
// realized share C/n; a device elsewhere sees the hypothetical share C/(n+1)
// it would get by joining.
double scaled_gain(const NetworkSpec& network, int n_on_network, bool chosen,
                   const GainScale& scale);

// Loss of each network relative to the best *known* gain for the slot.
// Unknown gains contribute and receive zero loss.
std::vector<double> perceived_loss(const std::vector<std::optional<double>>& gains);

// Deterministic Nash equilibrium oracle for the equal-share congestion game:
// devices are placed one at a time on argmax_m C_m / (n_m + 1), ties broken
// by the lowest network index.
Allocation nash_allocation(const std::vector<double>& capacities, int n_devices);

// True when no device on an occupied network would gain by unilaterally
// moving: min over occupied C_i / n_i >= max over m of C_m / (n_m + 1)
// with the mover excluded from its own network's count.
bool is_nash(const std::vector<double>& capacities, const Allocation& allocation);

// Distance to Nash equilibrium as the maximum percentage higher gain any
// device would see at equilibrium counts: 100 * max_i (n_i/ne_i - 1) over
// overcrowded networks. Devices parked on a network that is empty at
// equilibrium are measured against their best-response move to an
// underloaded network.
double distance_to_ne(const Allocation& current, const Allocation& ne,
                      const std::vector<double>& capacities);

std::string to_string(NetworkKind kind);
NetworkKind network_kind_from_string(const std::string& s);

}  // namespace cobandit::game
