#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cobandit/delay_model.hpp"
#include "cobandit/game.hpp"
#include "cobandit/gossip.hpp"

namespace cobandit::sim {

enum class Algorithm { cobandit, ewa, exp3 };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct DeviceSpec {
  int id = 0;
  int area = 0;
  Algorithm algorithm = Algorithm::cobandit;
  bool initially_active = true;
};

struct EventSpec {
  enum class Type { join, leave, move, network_add, network_remove };
  Type type = Type::join;
  int slot = 0;     // applied at the beginning of this slot
  int device = 0;   // join / leave / move
  int area = 0;     // join / move
  int network = 0;  // network_add / network_remove
  std::vector<int> areas;  // network_add targets
};

struct Params {
  double eta = 10.0;
  double p_t = -1.0;  // < 0 means auto: 1 / (active device count)
  double p_l = 1.0 / 3.0;
  int d = 5;
  int x = 32;
  bool minimal_reset = false;
  gossip::GainMode gain_mode = gossip::GainMode::reconstruct;
  double reset_threshold = 0.75;  // "sufficiently high probability"
  double reset_margin = 0.025;
  bool sharing_enabled = true;
  bool always_listen = false;  // everyone hears every broadcast, senders included

  double effective_p_t(int active_devices) const {
    if (p_t >= 0.0) return p_t;
    return active_devices > 0 ? 1.0 / active_devices : 0.0;
  }
};

struct ScenarioConfig {
  std::vector<game::NetworkSpec> networks;
  std::vector<game::ServiceArea> areas;
  std::vector<DeviceSpec> devices;
  int horizon = 1200;
  double slot_duration_s = 15.0;
  Params params;
  JohnsonSuParams wifi_delay;
  StudentTParams cellular_delay;
  std::vector<EventSpec> events;
  uint64_t seed = 1;
  // Test hook: permute per-phase device processing order; the slot barrier
  // makes results independent of it.
  std::optional<uint64_t> debug_iteration_seed;

  double c_max() const;
  int network_index(int network_id) const;  // -1 when absent
  const game::ServiceArea* find_area(int area_id) const;

  // Empty when valid; otherwise one message per problem.
  std::vector<std::string> validate() const;

  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig load_file(const std::string& path);
};

// The static 20-device, five-network setup (18/8/13/16/10 Mbps) everything
// else is derived from.
ScenarioConfig baseline_scenario();

}  // namespace cobandit::sim
