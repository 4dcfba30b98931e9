#include "cobandit/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "cobandit/bandit.hpp"
#include "cobandit/metrics.hpp"

namespace cobandit::sim {

namespace {

struct DeviceState {
  DeviceSpec spec;
  bool active = false;
  int area = 0;
  std::vector<int> available;
  bandit::WeightState weights{};
  bandit::Exp3State exp3{};
  gossip::FeedbackBuffer buffer;
  gossip::UnheardTracker tracker;
  Rng rng;
  std::optional<int> prev_network;
  int birth_slot = 1;
  double download_bytes = 0.0;
  int switches = 0;

  DeviceState(const DeviceSpec& s, int d, uint64_t seed)
      : spec(s), buffer(d), rng(seed, static_cast<uint64_t>(s.id)) {}
};

// Per-slot working values, indexed like the active-device list.
struct SlotWork {
  std::vector<double> p;
  int argmax_network = 0;
  double max_prob = 0.0;
  bandit::Selection selection{};
  double bitrate_mbps = 0.0;
  double gain_scaled = 0.0;
  gossip::CommMode mode = gossip::CommMode::idle;
  bool has_comm = false;
  gossip::FeedbackMessage own_message{};
  std::vector<gossip::FeedbackMessage> incoming;
};

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& config, MessageSink* sink)
      : cfg_(config),
        sink_(sink),
        scale_{config.c_max()},
        delay_model_(config.wifi_delay, config.cellular_delay, config.slot_duration_s) {
    const auto errors = cfg_.validate();
    if (!errors.empty()) {
      std::string joined = "invalid scenario:";
      for (const auto& e : errors) joined += "\n  " + e;
      throw std::invalid_argument(joined);
    }
    for (const auto& area : cfg_.areas) area_networks_[area.id] = area.networks;
    for (const auto& spec : cfg_.devices) {
      devices_.emplace(spec.id, DeviceState(spec, cfg_.params.d, cfg_.seed));
      if (spec.initially_active) activate(devices_.at(spec.id), spec.area, 1);
    }
  }

  RunRecord execute() {
    RunRecord record;
    record.seed = cfg_.seed;
    record.slots.reserve(cfg_.horizon);
    size_t next_event = 0;
    for (int t = 1; t <= cfg_.horizon; ++t) {
      while (next_event < cfg_.events.size() && cfg_.events[next_event].slot == t) {
        apply_event(cfg_.events[next_event], t);
        ++next_event;
      }
      record.slots.push_back(step(t));
    }
    for (const auto& [id, dev] : devices_) {
      record.download_bytes[id] = dev.download_bytes;
      record.switch_count[id] = dev.switches;
    }
    std::vector<int> ids;
    std::vector<double> caps;
    for (const auto& n : cfg_.networks) {
      ids.push_back(n.id);
      caps.push_back(n.capacity_mbps);
    }
    record.verdict = metrics::detect_stability(record, ids, caps);
    return record;
  }

 private:
  void activate(DeviceState& dev, int area, int t) {
    dev.active = true;
    dev.area = area;
    dev.available = area_networks_.at(area);
    dev.birth_slot = t;
    dev.prev_network.reset();
    dev.weights = bandit::WeightState::uniform(dev.available, cfg_.params.eta);
    dev.exp3 = bandit::Exp3State::uniform(dev.available);
    dev.buffer = gossip::FeedbackBuffer(cfg_.params.d);
    dev.tracker = gossip::UnheardTracker{{}, cfg_.params.x};
    for (int n : dev.available) dev.tracker.last_heard[n] = t - 1;
  }

  void apply_event(const EventSpec& event, int t) {
    switch (event.type) {
      case EventSpec::Type::join: {
        auto& dev = devices_.at(event.device);
        if (dev.active) throw std::invalid_argument("join event for active device");
        activate(dev, event.area, t);
        break;
      }
      case EventSpec::Type::leave: {
        auto& dev = devices_.at(event.device);
        if (!dev.active) throw std::invalid_argument("leave event for inactive device");
        dev.active = false;
        break;
      }
      case EventSpec::Type::move: {
        auto& dev = devices_.at(event.device);
        if (!dev.active) throw std::invalid_argument("move event for inactive device");
        move_device(dev, event.area, t);
        break;
      }
      case EventSpec::Type::network_add: {
        for (int aid : event.areas) {
          auto& nets = area_networks_.at(aid);
          if (std::find(nets.begin(), nets.end(), event.network) != nets.end()) continue;
          nets.insert(std::lower_bound(nets.begin(), nets.end(), event.network),
                      event.network);
          for (auto& [id, dev] : devices_) {
            if (!dev.active || dev.area != aid) continue;
            network_appeared(dev, event.network, t);
          }
        }
        ne_cache_.clear();
        break;
      }
      case EventSpec::Type::network_remove: {
        for (auto& [aid, nets] : area_networks_) {
          const auto it = std::find(nets.begin(), nets.end(), event.network);
          if (it == nets.end()) continue;
          nets.erase(it);
          for (auto& [id, dev] : devices_) {
            if (!dev.active || dev.area != aid) continue;
            network_disappeared(dev, event.network);
          }
        }
        ne_cache_.clear();
        break;
      }
    }
  }

  void move_device(DeviceState& dev, int new_area, int t) {
    const auto& nets = area_networks_.at(new_area);
    std::vector<int> gained;
    std::vector<int> lost;
    std::set_difference(nets.begin(), nets.end(), dev.available.begin(), dev.available.end(),
                        std::back_inserter(gained));
    std::set_difference(dev.available.begin(), dev.available.end(), nets.begin(), nets.end(),
                        std::back_inserter(lost));
    dev.area = new_area;
    for (int n : lost) network_disappeared(dev, n);
    for (int n : gained) network_appeared(dev, n, t);
  }

  void network_appeared(DeviceState& dev, int network, int t) {
    dev.available.insert(
        std::lower_bound(dev.available.begin(), dev.available.end(), network), network);
    bandit::on_network_discovered(dev.weights, network);
    if (dev.exp3.index_of(network) < 0) {
      const double w = dev.exp3.weights.empty()
                           ? 1.0
                           : *std::max_element(dev.exp3.weights.begin(), dev.exp3.weights.end());
      const auto it =
          std::lower_bound(dev.exp3.networks.begin(), dev.exp3.networks.end(), network);
      const auto offset = it - dev.exp3.networks.begin();
      dev.exp3.networks.insert(it, network);
      dev.exp3.weights.insert(dev.exp3.weights.begin() + offset, w);
    }
    dev.tracker.last_heard[network] = t - 1;
  }

  void network_disappeared(DeviceState& dev, int network) {
    const auto it = std::find(dev.available.begin(), dev.available.end(), network);
    if (it != dev.available.end()) dev.available.erase(it);
    bandit::on_network_lost(dev.weights, network, cfg_.params.reset_threshold);
    const int idx = dev.exp3.index_of(network);
    if (idx >= 0) {
      dev.exp3.networks.erase(dev.exp3.networks.begin() + idx);
      dev.exp3.weights.erase(dev.exp3.weights.begin() + idx);
    }
    dev.tracker.last_heard.erase(network);
    if (dev.prev_network && *dev.prev_network == network) dev.prev_network.reset();
  }

  std::vector<int> active_order(int t) {
    std::vector<int> order;
    for (const auto& [id, dev] : devices_) {
      if (dev.active) order.push_back(id);
    }
    if (cfg_.debug_iteration_seed) {
      Rng shuffle_rng(*cfg_.debug_iteration_seed, static_cast<uint64_t>(t));
      for (size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.uniform_int(static_cast<int>(i))]);
      }
    }
    return order;
  }

  const game::NetworkSpec& network(int id) const {
    const int idx = cfg_.network_index(id);
    if (idx < 0) throw std::logic_error("unknown network id");
    return cfg_.networks[idx];
  }

  SlotRecord step(int t) {
    const auto order = active_order(t);
    const int n_active = static_cast<int>(order.size());
    std::map<int, SlotWork> work;

    // Selection, from the slot-start snapshot.
    for (int id : order) {
      auto& dev = devices_.at(id);
      auto& w = work[id];
      switch (dev.spec.algorithm) {
        case Algorithm::cobandit: {
          w.p = bandit::probabilities(dev.weights);
          const auto unheard = gossip::unheard_set(dev.tracker, dev.available, t);
          w.selection =
              bandit::select_network(dev.available, w.p, unheard, n_active, dev.rng);
          break;
        }
        case Algorithm::ewa: {
          w.p = bandit::probabilities(dev.weights);
          w.selection.network = dev.available[dev.rng.sample(w.p)];
          break;
        }
        case Algorithm::exp3: {
          w.p = bandit::exp3_probabilities(dev.exp3);
          w.selection.network = dev.available[dev.rng.sample(w.p)];
          break;
        }
      }
      const auto& nets =
          dev.spec.algorithm == Algorithm::exp3 ? dev.exp3.networks : dev.weights.networks;
      const auto top = std::max_element(w.p.begin(), w.p.end());
      w.argmax_network = nets[top - w.p.begin()];
      w.max_prob = *top;
    }

    // Simultaneous association: realized allocation and gains.
    std::vector<int> allocation(cfg_.networks.size(), 0);
    for (int id : order) {
      ++allocation[cfg_.network_index(work[id].selection.network)];
    }
    for (int id : order) {
      auto& w = work[id];
      const auto& spec = network(w.selection.network);
      const int clients = allocation[cfg_.network_index(w.selection.network)];
      w.bitrate_mbps = game::raw_gain(spec, clients);
      w.gain_scaled = game::scaled_gain(spec, clients, true, scale_);
    }

    // Communication phase (Co-Bandit devices only).
    communicate(t, order, allocation, work);

    // Unheard tracking.
    for (int id : order) {
      auto& dev = devices_.at(id);
      if (dev.spec.algorithm != Algorithm::cobandit) continue;
      gossip::update_unheard(dev.tracker, dev.buffer, work[id].selection.network, t);
    }

    // Learning updates.
    for (int id : order) {
      auto& dev = devices_.at(id);
      auto& w = work[id];
      switch (dev.spec.algorithm) {
        case Algorithm::cobandit:
          cobandit_update(dev, w, t);
          break;
        case Algorithm::ewa:
          ewa_update(dev, w, allocation);
          break;
        case Algorithm::exp3:
          bandit::exp3_step(dev.exp3, w.selection.network, w.gain_scaled);
          break;
      }
    }

    // Switching cost and download accounting.
    SlotRecord record;
    record.slot = t;
    record.allocation = allocation;
    for (int id : order) {
      auto& dev = devices_.at(id);
      auto& w = work[id];
      const bool switched = dev.prev_network && *dev.prev_network != w.selection.network;
      const double delay =
          sample_switch_delay(dev.prev_network, w.selection.network,
                              network(w.selection.network).kind, delay_model_, dev.rng);
      if (switched) ++dev.switches;
      dev.download_bytes += download_bytes_increment(w.gain_scaled, scale_.c_max, delay,
                                                     cfg_.slot_duration_s);
      dev.prev_network = w.selection.network;

      DeviceSlotRecord row;
      row.device = id;
      row.network = w.selection.network;
      row.exploring_unheard = w.selection.exploring_unheard;
      row.gain_scaled = w.gain_scaled;
      row.comm_mode = !w.has_comm               ? '-'
                      : w.mode == gossip::CommMode::broadcast ? 'b'
                      : w.mode == gossip::CommMode::listen    ? 'l'
                                                              : 'i';
      row.argmax_network = w.argmax_network;
      row.max_prob = w.max_prob;
      row.switched = switched;
      row.switch_delay_s = delay;
      record.devices.push_back(row);
    }
    std::sort(record.devices.begin(), record.devices.end(),
              [](const DeviceSlotRecord& a, const DeviceSlotRecord& b) {
                return a.device < b.device;
              });
    record.distance_pct = slot_distance(order, work);
    return record;
  }

  void communicate(int t, const std::vector<int>& order, const std::vector<int>& allocation,
                   std::map<int, SlotWork>& work) {
    std::vector<gossip::Broadcast> broadcasters;
    std::vector<std::pair<int, int>> listeners;
    for (int id : order) {
      auto& dev = devices_.at(id);
      auto& w = work[id];
      if (dev.spec.algorithm != Algorithm::cobandit) continue;

      w.own_message.slot = t;
      w.own_message.sender = id;
      w.own_message.network = w.selection.network;
      w.own_message.bitrate_mbps = w.bitrate_mbps;
      w.own_message.client_count = allocation[cfg_.network_index(w.selection.network)];
      w.own_message.available = dev.available;
      w.own_message.distribution = w.p;
      if (sink_ != nullptr) sink_->on_message(w.own_message);

      if (!cfg_.params.sharing_enabled) continue;
      w.has_comm = true;
      const double p_t = cfg_.params.effective_p_t(static_cast<int>(order.size()));
      const double p_l = cfg_.params.always_listen ? 1.0 : cfg_.params.p_l;
      const auto decision =
          gossip::decide_comm(w.selection.exploring_unheard, p_t, p_l, dev.rng);
      w.mode = decision.mode;
      if (decision.mode == gossip::CommMode::broadcast) {
        gossip::Broadcast b;
        b.device = id;
        b.area = dev.area;
        b.payload.push_back(w.own_message);
        for (const auto* msg : dev.buffer.all()) b.payload.push_back(*msg);
        broadcasters.push_back(std::move(b));
        if (cfg_.params.always_listen) listeners.emplace_back(id, dev.area);
      } else if (decision.mode == gossip::CommMode::listen) {
        listeners.emplace_back(id, dev.area);
      }
    }

    auto deliveries = gossip::deliver(broadcasters, listeners);
    for (int id : order) {
      auto& dev = devices_.at(id);
      auto& w = work[id];
      if (dev.spec.algorithm != Algorithm::cobandit) continue;
      const auto it = deliveries.find(id);
      if (it != deliveries.end()) w.incoming = std::move(it->second);
      std::vector<gossip::FeedbackMessage> batch;
      batch.reserve(w.incoming.size() + 1);
      batch.push_back(w.own_message);
      batch.insert(batch.end(), w.incoming.begin(), w.incoming.end());
      dev.buffer.absorb(batch, t);
    }
  }

  void cobandit_update(DeviceState& dev, SlotWork& w, int t) {
    bandit::EstimatorWindow window;
    const int d_prime = std::min(cfg_.params.d, t - dev.birth_slot);
    window.lags.reserve(d_prime + 1);
    for (int lag = 0; lag <= d_prime; ++lag) {
      window.lags.push_back(dev.buffer.for_slot(t - lag));
    }
    const auto losses = bandit::window_losses(dev.available, window, dev.spec.id, scale_,
                                              cfg_.params.gain_mode);
    const auto estimates =
        bandit::loss_estimate_core(dev.available, window, losses, dev.spec.id);
    bandit::weight_update(dev.weights, estimates);

    if (cfg_.params.minimal_reset) minimal_reset(dev, w, window, t);
  }

  // Reference gain of the anchor network: the best share the device itself
  // observed on it over the window, so one slot of stray traffic does not
  // make the anchor look degraded. Falls back to the most recent neighbor
  // estimate when the device has no own observation of it.
  std::optional<double> anchor_gain_estimate(const DeviceState& dev,
                                             const bandit::EstimatorWindow& window,
                                             int network) const {
    std::optional<double> own_best;
    for (const auto& lag : window.lags) {
      for (const auto* msg : lag) {
        if (msg->sender == dev.spec.id && msg->network == network) {
          const double g = msg->bitrate_mbps / scale_.c_max;
          if (!own_best || g > *own_best) own_best = g;
        }
      }
    }
    if (own_best) return own_best;
    std::vector<const gossip::FeedbackMessage*> reports;
    for (const auto& lag : window.lags) {
      reports.clear();
      for (const auto* msg : lag) {
        if (msg->sender != dev.spec.id && msg->network == network) reports.push_back(msg);
      }
      if (!reports.empty())
        return gossip::estimate_network_gain(reports, scale_, cfg_.params.gain_mode);
    }
    return std::nullopt;
  }

  void minimal_reset(DeviceState& dev, SlotWork& w, const bandit::EstimatorWindow& window,
                     int t) {
    const auto top = std::max_element(w.p.begin(), w.p.end());
    if (*top < cfg_.params.reset_threshold) return;
    const int anchor = dev.available[top - w.p.begin()];

    bool fired = false;
    if (w.selection.exploring_unheard && w.selection.network != anchor) {
      fired = bandit::minimal_reset_explore(dev.weights, w.p, w.selection.network,
                                            w.gain_scaled,
                                            anchor_gain_estimate(dev, window, anchor),
                                            cfg_.params.reset_threshold);
    } else if (!w.incoming.empty()) {
      // Best candidate this slot's received feedback puts ahead of the
      // anchor. "Constantly learns" is read as persistence: all reports
      // about the candidate across the payload's slots are pooled (so the
      // client count is the maximum seen, not a one-slot dip) and at least
      // two distinct slots must corroborate it.
      int candidate = -1;
      double candidate_gain = 0.0;
      for (int m : dev.available) {
        if (m == anchor) continue;
        std::vector<const gossip::FeedbackMessage*> reports;
        std::set<std::pair<int, int>> seen;
        std::set<int> slots;
        for (const auto& msg : w.incoming) {
          if (msg.network == m && seen.insert({msg.slot, msg.sender}).second) {
            reports.push_back(&msg);
            slots.insert(msg.slot);
          }
        }
        if (slots.size() < 2) continue;
        const double g =
            gossip::estimate_network_gain(reports, scale_, cfg_.params.gain_mode);
        if (g > candidate_gain) {
          candidate_gain = g;
          candidate = m;
        }
      }
      if (candidate >= 0) {
        const auto anchor_gain = anchor_gain_estimate(dev, window, anchor);
        const int own_clients = std::max(1, w.own_message.client_count);
        fired = bandit::minimal_reset_feedback(dev.weights, w.p, candidate, candidate_gain,
                                               anchor_gain, cfg_.params.reset_threshold,
                                               cfg_.params.reset_margin, own_clients, dev.rng);
      }
    }
    if (fired) dev.buffer.drop_received(dev.spec.id);
  }

  void ewa_update(DeviceState& dev, const SlotWork& w, const std::vector<int>& allocation) {
    std::vector<double> gains(dev.available.size());
    for (size_t i = 0; i < dev.available.size(); ++i) {
      const auto& spec = network(dev.available[i]);
      const int count = allocation[cfg_.network_index(dev.available[i])];
      const bool chosen = dev.available[i] == w.selection.network;
      gains[i] = game::scaled_gain(spec, count, chosen, scale_);
    }
    const double best = *std::max_element(gains.begin(), gains.end());
    std::vector<double> losses(gains.size());
    for (size_t i = 0; i < gains.size(); ++i) losses[i] = best - gains[i];
    bandit::ewa_step(dev.weights, losses);
  }

  double slot_distance(const std::vector<int>& order, std::map<int, SlotWork>& work) {
    // Distance of each populated area against its own equilibrium; shared
    // networks make this an area-local approximation, exact for single-area
    // scenarios.
    std::map<int, std::vector<int>> area_devices;
    for (int id : order) area_devices[devices_.at(id).area].push_back(id);
    double worst = 0.0;
    for (const auto& [aid, ids] : area_devices) {
      const auto& nets = area_networks_.at(aid);
      std::vector<double> caps;
      caps.reserve(nets.size());
      for (int n : nets) caps.push_back(network(n).capacity_mbps);
      std::vector<int> counts(nets.size(), 0);
      for (int id : ids) {
        const auto it = std::find(nets.begin(), nets.end(), work[id].selection.network);
        if (it != nets.end()) ++counts[it - nets.begin()];
      }
      const auto key = std::make_pair(aid, static_cast<int>(ids.size()));
      auto cached = ne_cache_.find(key);
      if (cached == ne_cache_.end()) {
        cached =
            ne_cache_.emplace(key, game::nash_allocation(caps, static_cast<int>(ids.size())))
                .first;
      }
      worst = std::max(worst,
                       game::distance_to_ne(game::Allocation{counts}, cached->second, caps));
    }
    return worst;
  }

  ScenarioConfig cfg_;
  MessageSink* sink_;
  game::GainScale scale_;
  DelayModel delay_model_;
  std::map<int, DeviceState> devices_;
  std::map<int, std::vector<int>> area_networks_;
  std::map<std::pair<int, int>, game::Allocation> ne_cache_;
};

}  // namespace

double download_bytes_increment(double gain_scaled, double c_max, double delay_s,
                                double slot_duration_s) {
  if (delay_s < 0.0 || delay_s > slot_duration_s)
    throw std::invalid_argument("download increment: delay outside [0, slot duration]");
  const double mbps = gain_scaled * c_max;
  return mbps * 1e6 / 8.0 * (slot_duration_s - delay_s);
}

RunRecord run(const ScenarioConfig& config, MessageSink* sink) {
  Simulation sim(config, sink);
  return sim.execute();
}

RunSummary summarize(const RunRecord& record, const ScenarioConfig& config) {
  RunSummary summary;
  summary.seed = record.seed;
  summary.verdict = record.verdict;
  summary.download_bytes = record.download_bytes;
  summary.switch_count = record.switch_count;
  summary.distance_series.reserve(record.slots.size());
  for (const auto& slot : record.slots) summary.distance_series.push_back(slot.distance_pct);
  (void)config;
  return summary;
}

std::vector<RunSummary> run_many(const ScenarioConfig& base,
                                 std::optional<Algorithm> algorithm_override, int runs,
                                 uint64_t base_seed, int parallelism, const RunHook& hook) {
  if (runs < 1) throw std::invalid_argument("run_many: runs must be >= 1");
  ScenarioConfig cfg = base;
  if (algorithm_override) {
    for (auto& dev : cfg.devices) dev.algorithm = *algorithm_override;
  }
  std::vector<RunSummary> summaries(runs);
  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int r = next.fetch_add(1);
      if (r >= runs) break;
      ScenarioConfig local = cfg;
      local.seed = base_seed + static_cast<uint64_t>(r);
      const RunRecord record = run(local);
      if (hook) hook(r, record, local);
      summaries[r] = summarize(record, local);
    }
  };
  const int threads = std::max(1, parallelism);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return summaries;
}

}  // namespace cobandit::sim
