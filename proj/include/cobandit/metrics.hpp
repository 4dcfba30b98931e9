#pragma once

#include <map>
#include <vector>

#include "cobandit/game.hpp"
#include "cobandit/records.hpp"

namespace cobandit::metrics {

struct ProbPoint {
  int argmax_network = 0;
  double max_prob = 0.0;
};

// Stability: a device is stable when its final argmax network is held with
// probability >= threshold from some slot s <= T - min_window through T.
// The run is stable when every device present at T is; stabilization slot is
// the slowest device's earliest such s. at_nash compares the stable
// allocation with the greedy equilibrium oracle.
sim::StabilityVerdict detect_stability(
    const std::map<int, std::vector<ProbPoint>>& series,  // device -> last slots, ending at T
    int T, double threshold, int min_window, const std::vector<int>& network_ids,
    const std::vector<double>& capacities);

// Convenience wrapper over a recorded run.
sim::StabilityVerdict detect_stability(const sim::RunRecord& run,
                                       const std::vector<int>& network_ids,
                                       const std::vector<double>& capacities,
                                       double threshold = 0.75, int min_window = 10);

// Per-slot distance to the equilibrium of the instantaneous active
// population; the equilibrium is recomputed whenever the device count
// changes.
std::vector<double> distance_series(const std::vector<std::vector<int>>& allocations,
                                    const std::vector<double>& capacities);

struct Report {
  int runs = 0;
  double pct_stable = 0.0;
  double pct_stable_at_nash = 0.0;  // share of stable runs that sit at the equilibrium
  double median_stabilization_slot = 0.0;  // over stable runs; NaN when none
  double median_download_gb = 0.0;         // over all (run, device) pairs
  std::vector<double> mean_distance;
  std::vector<double> distance_p10;
  std::vector<double> distance_p90;
};

Report aggregate(const std::vector<sim::RunSummary>& summaries);

double median(std::vector<double> values);
double percentile(std::vector<double> values, double pct);

}  // namespace cobandit::metrics
