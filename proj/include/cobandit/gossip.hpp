#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cobandit/game.hpp"
#include "cobandit/rng.hpp"

namespace cobandit::gossip {

// One device's observation for one slot; also the unit that is broadcast
// and forwarded. (slot, sender) is the dedup key.
struct FeedbackMessage {
  int slot = 0;
  int sender = 0;
  int network = 0;              // network chosen at `slot`
  double bitrate_mbps = 0.0;    // raw observed bit rate
  int client_count = 0;         // sender's estimate of devices on `network`
  std::vector<int> available;   // sorted network ids visible to the sender
  std::vector<double> distribution;  // selection distribution over `available`

  // Index of `network_id` within `available`, or -1.
  int available_index(int network_id) const;
};

// True when the message satisfies its schema: distribution is a simplex
// over `available` and the chosen network is in the available set.
bool message_well_formed(const FeedbackMessage& msg);

enum class CommMode { broadcast, listen, idle };

struct CommDecision {
  CommMode mode = CommMode::idle;
  bool forced_broadcast = false;  // set for exploring-unheard devices
};

// Per-slot communication gate. A device exploring an unheard network
// broadcasts with probability 1; otherwise it broadcasts with probability
// p_t, else listens with probability p_l. Broadcast and listen are
// mutually exclusive within a slot.
CommDecision decide_comm(bool exploring_unheard, double p_t, double p_l, Rng& rng);

// Store of everything a device has learned over the last d+1 slots,
// keyed by (slot, sender). Own observations live here too, so the buffer
// doubles as the device's knowledge set H.
class FeedbackBuffer {
 public:
  struct AbsorbStats {
    int inserted = 0;
    int duplicates = 0;
    int stale = 0;
    int malformed = 0;
  };

  explicit FeedbackBuffer(int horizon_d) : horizon_d_(horizon_d) {}

  // Inserts the incoming batch, dropping duplicates, messages older than
  // t - d, and malformed messages; then prunes everything stale at t.
  AbsorbStats absorb(std::span<const FeedbackMessage> incoming, int t);

  void prune(int t);

  // Drops messages from senders other than `self` (minimal reset).
  void drop_received(int self);

  std::vector<const FeedbackMessage*> for_slot(int slot) const;
  const FeedbackMessage* find(int slot, int sender) const;
  std::vector<const FeedbackMessage*> all() const;
  size_t size() const { return messages_.size(); }
  int horizon() const { return horizon_d_; }

 private:
  int horizon_d_;
  std::map<std::pair<int, int>, FeedbackMessage> messages_;  // (slot, sender)
};

// Tracks the last slot each network was heard about (own observation or
// any buffered mention); a network is unheard once silent for >= x slots.
struct UnheardTracker {
  std::map<int, int> last_heard;  // network id -> slot
  int x = 32;
};

// Marks the device's own chosen network and every network mentioned in
// the buffer as heard at t (absorption time, not observation age).
void update_unheard(UnheardTracker& tracker, const FeedbackBuffer& buffer,
                    int own_choice, int t);

std::vector<int> unheard_set(const UnheardTracker& tracker,
                             const std::vector<int>& available, int t);

enum class GainMode { reconstruct, literal };

// Scaled gain estimate for a network from neighbors' reports about one slot.
// reconstruct: rebuild capacity as mean(bitrate * client_count) and return
// the hypothetical joining share C/(n_max + 1), scaled; exact under truthful
// reports. literal: (sum of reported bitrates) / (n_max + 1), scaled, which
// matches the sharing-based estimate but underestimates with partial
// reporting.
double estimate_network_gain(std::span<const FeedbackMessage* const> reports,
                             const game::GainScale& scale, GainMode mode);

// A broadcasting device and its full payload (current observation plus
// buffer contents).
struct Broadcast {
  int device = 0;
  int area = 0;
  std::vector<FeedbackMessage> payload;
};

// Lossless, collision-free delivery within service areas: each listener
// receives the union of payloads of all broadcasters in its area
// (excluding itself). Returns incoming messages per listener id.
std::map<int, std::vector<FeedbackMessage>> deliver(
    const std::vector<Broadcast>& broadcasters,
    const std::vector<std::pair<int, int>>& listeners);

}  // namespace cobandit::gossip
