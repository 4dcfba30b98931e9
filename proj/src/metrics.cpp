#include "cobandit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cobandit::metrics {

sim::StabilityVerdict detect_stability(const std::map<int, std::vector<ProbPoint>>& series,
                                       int T, double threshold, int min_window,
                                       const std::vector<int>& network_ids,
                                       const std::vector<double>& capacities) {
  if (series.empty()) throw std::invalid_argument("detect_stability: no probability series");
  if (network_ids.size() != capacities.size())
    throw std::invalid_argument("detect_stability: network/capacity size mismatch");

  sim::StabilityVerdict verdict;
  verdict.stable = true;
  int worst_start = 0;
  for (const auto& [device, points] : series) {
    if (points.empty()) throw std::invalid_argument("detect_stability: empty series");
    const int first_slot = T - static_cast<int>(points.size()) + 1;
    const int target = points.back().argmax_network;
    verdict.stable_networks[device] = target;
    // Scan backwards for the earliest slot from which the hold is unbroken.
    int start = T + 1;
    for (int idx = static_cast<int>(points.size()) - 1; idx >= 0; --idx) {
      if (points[idx].argmax_network == target && points[idx].max_prob >= threshold) {
        start = first_slot + idx;
      } else {
        break;
      }
    }
    if (start > T - min_window) {
      verdict.stable = false;
      verdict.stabilization_slot.reset();
      verdict.at_nash = false;
      return verdict;
    }
    worst_start = std::max(worst_start, start);
  }
  verdict.stabilization_slot = worst_start;

  std::vector<int> counts(network_ids.size(), 0);
  for (const auto& [device, network] : verdict.stable_networks) {
    const auto it = std::find(network_ids.begin(), network_ids.end(), network);
    if (it == network_ids.end())
      throw std::invalid_argument("detect_stability: series references unknown network");
    ++counts[it - network_ids.begin()];
  }
  const auto ne =
      game::nash_allocation(capacities, static_cast<int>(verdict.stable_networks.size()));
  verdict.at_nash = counts == ne.counts;
  for (size_t i = 0; i < counts.size(); ++i) {
    verdict.devices_to_move += std::max(0, counts[i] - ne.counts[i]);
  }
  return verdict;
}

sim::StabilityVerdict detect_stability(const sim::RunRecord& run,
                                       const std::vector<int>& network_ids,
                                       const std::vector<double>& capacities, double threshold,
                                       int min_window) {
  if (run.slots.empty()) throw std::invalid_argument("detect_stability: empty run");
  const int T = run.slots.back().slot;
  std::map<int, std::vector<ProbPoint>> series;
  for (const auto& rec : run.slots.back().devices) series[rec.device] = {};
  for (const auto& slot : run.slots) {
    for (const auto& rec : slot.devices) {
      const auto it = series.find(rec.device);
      if (it != series.end()) it->second.push_back({rec.argmax_network, rec.max_prob});
    }
  }
  return detect_stability(series, T, threshold, min_window, network_ids, capacities);
}

std::vector<double> distance_series(const std::vector<std::vector<int>>& allocations,
                                    const std::vector<double>& capacities) {
  std::vector<double> out;
  out.reserve(allocations.size());
  std::map<int, game::Allocation> ne_cache;
  for (const auto& counts : allocations) {
    if (counts.size() != capacities.size())
      throw std::invalid_argument("distance_series: allocation size mismatch");
    const int active = std::accumulate(counts.begin(), counts.end(), 0);
    if (active == 0) {
      out.push_back(0.0);
      continue;
    }
    auto it = ne_cache.find(active);
    if (it == ne_cache.end()) {
      it = ne_cache.emplace(active, game::nash_allocation(capacities, active)).first;
    }
    out.push_back(game::distance_to_ne(game::Allocation{counts}, it->second, capacities));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double percentile(std::vector<double> values, double pct) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double rank = pct / 100.0 * (values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(rank));
  const size_t hi = static_cast<size_t>(std::ceil(rank));
  const double frac = rank - lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

Report aggregate(const std::vector<sim::RunSummary>& summaries) {
  if (summaries.empty()) throw std::invalid_argument("aggregate: no runs");
  Report report;
  report.runs = static_cast<int>(summaries.size());

  int stable = 0;
  int stable_at_nash = 0;
  std::vector<double> stabilization;
  std::vector<double> downloads;
  size_t horizon = 0;
  for (const auto& s : summaries) horizon = std::max(horizon, s.distance_series.size());

  std::vector<std::vector<double>> per_slot(horizon);
  for (const auto& s : summaries) {
    if (s.verdict.stable) {
      ++stable;
      if (s.verdict.at_nash) ++stable_at_nash;
      if (s.verdict.stabilization_slot)
        stabilization.push_back(static_cast<double>(*s.verdict.stabilization_slot));
    }
    for (const auto& [device, bytes] : s.download_bytes) downloads.push_back(bytes / 1e9);
    for (size_t i = 0; i < s.distance_series.size(); ++i)
      per_slot[i].push_back(s.distance_series[i]);
  }

  report.pct_stable = 100.0 * stable / summaries.size();
  report.pct_stable_at_nash = stable > 0 ? 100.0 * stable_at_nash / stable : 0.0;
  report.median_stabilization_slot = median(stabilization);
  report.median_download_gb = median(downloads);
  report.mean_distance.reserve(horizon);
  report.distance_p10.reserve(horizon);
  report.distance_p90.reserve(horizon);
  for (auto& column : per_slot) {
    const double mean =
        std::accumulate(column.begin(), column.end(), 0.0) / std::max<size_t>(1, column.size());
    report.mean_distance.push_back(mean);
    report.distance_p10.push_back(percentile(column, 10.0));
    report.distance_p90.push_back(percentile(column, 90.0));
  }
  return report;
}

}  // namespace cobandit::metrics
