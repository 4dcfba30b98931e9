#include "cobandit/gossip.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <stdexcept>

namespace cobandit::gossip {

int FeedbackMessage::available_index(int network_id) const {
  const auto it = std::lower_bound(available.begin(), available.end(), network_id);
  if (it == available.end() || *it != network_id) return -1;
  return static_cast<int>(it - available.begin());
}

bool message_well_formed(const FeedbackMessage& msg) {
  if (msg.available.empty() || msg.distribution.size() != msg.available.size()) return false;
  if (!std::is_sorted(msg.available.begin(), msg.available.end())) return false;
  if (msg.available_index(msg.network) < 0) return false;
  if (msg.client_count < 1) return false;
  if (msg.bitrate_mbps < 0.0) return false;
  double sum = 0.0;
  for (double p : msg.distribution) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= 1e-9;
}

CommDecision decide_comm(bool exploring_unheard, double p_t, double p_l, Rng& rng) {
  if (p_t < 0.0 || p_t > 1.0 || p_l < 0.0 || p_l > 1.0)
    throw std::invalid_argument("decide_comm: probabilities must lie in [0,1]");
  CommDecision decision;
  if (exploring_unheard) {
    decision.mode = CommMode::broadcast;
    decision.forced_broadcast = true;
    return decision;
  }
  if (rng.bernoulli(p_t)) {
    decision.mode = CommMode::broadcast;
  } else if (rng.bernoulli(p_l)) {
    decision.mode = CommMode::listen;
  } else {
    decision.mode = CommMode::idle;
  }
  return decision;
}

FeedbackBuffer::AbsorbStats FeedbackBuffer::absorb(std::span<const FeedbackMessage> incoming,
                                                   int t) {
  AbsorbStats stats;
  for (const auto& msg : incoming) {
    if (!message_well_formed(msg)) {
      ++stats.malformed;
      continue;
    }
    if (msg.slot < t - horizon_d_ || msg.slot > t) {
      ++stats.stale;
      continue;
    }
    const auto [_, inserted] = messages_.try_emplace({msg.slot, msg.sender}, msg);
    if (inserted) {
      ++stats.inserted;
    } else {
      ++stats.duplicates;
    }
  }
  prune(t);
  return stats;
}

void FeedbackBuffer::prune(int t) {
  messages_.erase(messages_.begin(), messages_.lower_bound({t - horizon_d_, INT_MIN}));
}

void FeedbackBuffer::drop_received(int self) {
  for (auto it = messages_.begin(); it != messages_.end();) {
    if (it->first.second != self) {
      it = messages_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<const FeedbackMessage*> FeedbackBuffer::for_slot(int slot) const {
  std::vector<const FeedbackMessage*> out;
  for (auto it = messages_.lower_bound({slot, INT_MIN});
       it != messages_.end() && it->first.first == slot; ++it) {
    out.push_back(&it->second);
  }
  return out;
}

const FeedbackMessage* FeedbackBuffer::find(int slot, int sender) const {
  const auto it = messages_.find({slot, sender});
  return it == messages_.end() ? nullptr : &it->second;
}

std::vector<const FeedbackMessage*> FeedbackBuffer::all() const {
  std::vector<const FeedbackMessage*> out;
  out.reserve(messages_.size());
  for (const auto& [key, msg] : messages_) out.push_back(&msg);
  return out;
}

void update_unheard(UnheardTracker& tracker, const FeedbackBuffer& buffer, int own_choice,
                    int t) {
  tracker.last_heard[own_choice] = t;
  for (const FeedbackMessage* msg : buffer.all()) tracker.last_heard[msg->network] = t;
}

std::vector<int> unheard_set(const UnheardTracker& tracker, const std::vector<int>& available,
                             int t) {
  std::vector<int> out;
  for (int network : available) {
    const auto it = tracker.last_heard.find(network);
    const int last = it == tracker.last_heard.end() ? 0 : it->second;
    if (t - last >= tracker.x) out.push_back(network);
  }
  return out;
}

double estimate_network_gain(std::span<const FeedbackMessage* const> reports,
                             const game::GainScale& scale, GainMode mode) {
  if (reports.empty()) throw std::invalid_argument("estimate_network_gain: no reports");
  if (scale.c_max <= 0.0) throw std::invalid_argument("estimate_network_gain: bad scale");
  int n_max = 0;
  double capacity_sum = 0.0;
  double bitrate_sum = 0.0;
  for (const FeedbackMessage* msg : reports) {
    n_max = std::max(n_max, msg->client_count);
    capacity_sum += msg->bitrate_mbps * msg->client_count;
    bitrate_sum += msg->bitrate_mbps;
  }
  if (mode == GainMode::reconstruct) {
    const double capacity = capacity_sum / static_cast<double>(reports.size());
    return capacity / static_cast<double>(n_max + 1) / scale.c_max;
  }
  return bitrate_sum / static_cast<double>(n_max + 1) / scale.c_max;
}

std::map<int, std::vector<FeedbackMessage>> deliver(
    const std::vector<Broadcast>& broadcasters,
    const std::vector<std::pair<int, int>>& listeners) {
  std::map<int, std::vector<FeedbackMessage>> incoming;
  for (const auto& [listener, area] : listeners) {
    std::vector<FeedbackMessage> inbox;
    for (const auto& broadcast : broadcasters) {
      if (broadcast.area != area || broadcast.device == listener) continue;
      inbox.insert(inbox.end(), broadcast.payload.begin(), broadcast.payload.end());
    }
    if (!inbox.empty()) incoming.emplace(listener, std::move(inbox));
  }
  return incoming;
}

}  // namespace cobandit::gossip
