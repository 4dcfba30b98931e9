#pragma once

#include <functional>
#include <optional>

#include "cobandit/gossip.hpp"
#include "cobandit/records.hpp"
#include "cobandit/scenario.hpp"

namespace cobandit::sim {

// Optional tap receiving every observation message a device produces.
class MessageSink {
 public:
  virtual ~MessageSink() = default;
  virtual void on_message(const gossip::FeedbackMessage& msg) = 0;
};

// Bytes added by one slot: rate * (slot_duration - switch_delay).
double download_bytes_increment(double gain_scaled, double c_max, double delay_s,
                                double slot_duration_s);

// Executes the configured horizon. Phases per slot: scenario events,
// selection from the slot-start snapshot, simultaneous association and gain
// realization, communication, unheard update, learning updates (with the
// optional minimal reset), switching-delay and download accounting.
// Identical (config, seed) produces a bit-identical record.
RunRecord run(const ScenarioConfig& config, MessageSink* sink = nullptr);

RunSummary summarize(const RunRecord& record, const ScenarioConfig& config);

// Seeded batch: run r uses seed base_seed + r. Runs are dispatched to a
// bounded worker pool; aggregates are identical for any parallelism degree.
// The optional per-run hook fires inside the worker (e.g. to stream a trace
// to its own file) before the record is discarded.
using RunHook = std::function<void(int run_index, const RunRecord&, const ScenarioConfig&)>;
std::vector<RunSummary> run_many(const ScenarioConfig& base,
                                 std::optional<Algorithm> algorithm_override, int runs,
                                 uint64_t base_seed, int parallelism,
                                 const RunHook& hook = nullptr);

}  // namespace cobandit::sim
