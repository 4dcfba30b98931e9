#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cobandit::sim {

struct DeviceSlotRecord {
  int device = 0;
  int network = 0;
  bool exploring_unheard = false;
  double gain_scaled = 0.0;
  char comm_mode = '-';  // 'b' broadcast, 'l' listen, 'i' idle, '-' no comm phase
  int argmax_network = 0;
  double max_prob = 0.0;
  bool switched = false;
  double switch_delay_s = 0.0;
};

struct SlotRecord {
  int slot = 0;
  std::vector<DeviceSlotRecord> devices;  // sorted by device id
  std::vector<int> allocation;            // per scenario network index
  double distance_pct = 0.0;
};

struct StabilityVerdict {
  bool stable = false;
  std::optional<int> stabilization_slot;
  bool at_nash = false;
  // Devices that would have to switch for the stable allocation to match the
  // equilibrium (0 when at_nash); classifies near-miss stable states.
  int devices_to_move = 0;
  std::map<int, int> stable_networks;  // device -> network held at the end
};

struct RunRecord {
  uint64_t seed = 0;
  std::vector<SlotRecord> slots;
  std::map<int, double> download_bytes;  // per device
  std::map<int, int> switch_count;       // per device
  StabilityVerdict verdict;
};

// Compact per-run digest kept when full slot records are not needed.
struct RunSummary {
  uint64_t seed = 0;
  StabilityVerdict verdict;
  std::vector<double> distance_series;   // length = horizon
  std::map<int, double> download_bytes;
  std::map<int, int> switch_count;
};

std::string slot_csv_header();
std::string slot_csv_rows(const SlotRecord& record);

}  // namespace cobandit::sim
