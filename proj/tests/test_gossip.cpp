#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cobandit/gossip.hpp"
#include "cobandit/rng.hpp"
#include "cobandit/theory.hpp"

using namespace cobandit;

namespace {

gossip::FeedbackMessage make_msg(int slot, int sender, int network, double bitrate,
                                 int clients, std::vector<int> available,
                                 std::vector<double> dist) {
  gossip::FeedbackMessage m;
  m.slot = slot;
  m.sender = sender;
  m.network = network;
  m.bitrate_mbps = bitrate;
  m.client_count = clients;
  m.available = std::move(available);
  m.distribution = std::move(dist);
  return m;
}

}  // namespace

TEST_CASE("decide_comm gates") {
  Rng rng(11);
  SUBCASE("exploring forces broadcast") {
    for (int i = 0; i < 100; ++i) {
      const auto d = gossip::decide_comm(true, 0.0, 0.0, rng);
      CHECK(d.mode == gossip::CommMode::broadcast);
      CHECK(d.forced_broadcast);
    }
  }
  SUBCASE("degenerate gates listen always") {
    for (int i = 0; i < 100; ++i) {
      CHECK(gossip::decide_comm(false, 0.0, 1.0, rng).mode == gossip::CommMode::listen);
    }
  }
  SUBCASE("frequencies match p_t and (1-p_t) p_l within 3 sigma") {
    const double p_t = 1.0 / 20.0;
    const double p_l = 1.0 / 3.0;
    const int draws = 40000;
    int broadcast = 0;
    int listen = 0;
    for (int i = 0; i < draws; ++i) {
      const auto d = gossip::decide_comm(false, p_t, p_l, rng);
      broadcast += d.mode == gossip::CommMode::broadcast;
      listen += d.mode == gossip::CommMode::listen;
    }
    const double pb = p_t;
    const double pl = (1.0 - p_t) * p_l;
    CHECK(std::abs(broadcast / double(draws) - pb) < 3.0 * std::sqrt(pb * (1 - pb) / draws));
    CHECK(std::abs(listen / double(draws) - pl) < 3.0 * std::sqrt(pl * (1 - pl) / draws));
  }
}

TEST_CASE("deliver unions payloads within an area") {
  gossip::Broadcast b;
  b.device = 1;
  b.area = 1;
  b.payload.push_back(make_msg(5, 1, 1, 3.0, 6, {1, 2}, {0.5, 0.5}));
  for (int s = 2; s <= 4; ++s)
    b.payload.push_back(make_msg(s, s, 2, 4.0, 2, {1, 2}, {0.5, 0.5}));

  SUBCASE("same-area listener receives everything") {
    const auto incoming = gossip::deliver({b}, {{7, 1}});
    CHECK(incoming.at(7).size() == 4);
  }
  SUBCASE("different area receives nothing") {
    const auto incoming = gossip::deliver({b}, {{7, 2}});
    CHECK(incoming.find(7) == incoming.end());
  }
  SUBCASE("no listeners, no deliveries") {
    gossip::Broadcast b2 = b;
    b2.device = 2;
    const auto incoming = gossip::deliver({b, b2}, {});
    CHECK(incoming.empty());
  }
  SUBCASE("a broadcaster never hears itself") {
    const auto incoming = gossip::deliver({b}, {{1, 1}});
    CHECK(incoming.find(1) == incoming.end());
  }
}

TEST_CASE("absorb dedups, rejects stale and malformed, is idempotent") {
  gossip::FeedbackBuffer buf(5);
  const auto own = make_msg(10, 1, 1, 3.0, 6, {1, 2}, {0.7, 0.3});
  const auto dup = make_msg(10, 2, 2, 4.0, 2, {1, 2}, {0.5, 0.5});
  const auto stale = make_msg(4, 3, 1, 3.0, 6, {1, 2}, {0.5, 0.5});
  auto malformed = dup;
  malformed.sender = 4;
  malformed.distribution = {0.9, 0.3};  // not a simplex

  const std::vector<gossip::FeedbackMessage> batch{own, dup, dup, stale, malformed};
  const auto stats = buf.absorb(batch, 10);
  CHECK(stats.inserted == 2);
  CHECK(stats.duplicates == 1);
  CHECK(stats.stale == 1);
  CHECK(stats.malformed == 1);
  CHECK(buf.size() == 2);

  // Absorbing the same batch again changes nothing.
  buf.absorb(batch, 10);
  CHECK(buf.size() == 2);
  CHECK(buf.find(10, 1) != nullptr);
  CHECK(buf.find(10, 2) != nullptr);

  // Boundary: slot t - d - 1 is stale, slot t - d survives.
  gossip::FeedbackBuffer edge(5);
  const std::vector<gossip::FeedbackMessage> pair{
      make_msg(4, 1, 1, 3.0, 6, {1}, {1.0}), make_msg(5, 2, 1, 3.0, 6, {1}, {1.0})};
  edge.absorb(pair, 10);
  CHECK(edge.size() == 1);
  CHECK(edge.find(5, 2) != nullptr);
}

TEST_CASE("buffer stays within the staleness window as time advances") {
  Rng rng(3);
  gossip::FeedbackBuffer buf(5);
  for (int t = 1; t <= 60; ++t) {
    std::vector<gossip::FeedbackMessage> batch;
    for (int sender = 1; sender <= 8; ++sender) {
      if (rng.bernoulli(0.6))
        batch.push_back(make_msg(t - rng.uniform_int(8), sender, 1 + rng.uniform_int(2), 3.0,
                                 2, {1, 2}, {0.5, 0.5}));
    }
    buf.absorb(batch, t);
    CHECK(buf.size() <= 6u * 8u);
    for (const auto* m : buf.all()) {
      CHECK(m->slot >= t - 5);
      CHECK(m->slot <= t);
    }
  }
}

TEST_CASE("drop_received keeps own observations only") {
  gossip::FeedbackBuffer buf(5);
  buf.absorb(std::vector<gossip::FeedbackMessage>{
                 make_msg(9, 1, 1, 3.0, 6, {1}, {1.0}),
                 make_msg(10, 1, 1, 3.0, 6, {1}, {1.0}),
                 make_msg(10, 2, 1, 3.0, 6, {1}, {1.0}),
             },
             10);
  buf.drop_received(1);
  CHECK(buf.size() == 2);
  CHECK(buf.find(10, 2) == nullptr);
  CHECK(buf.find(9, 1) != nullptr);
}

TEST_CASE("unheard tracking distinguishes mentioned and silent networks") {
  gossip::UnheardTracker tracker{{}, 4};
  for (int n : {1, 2, 3}) tracker.last_heard[n] = 0;
  gossip::FeedbackBuffer buf(2);

  // Own choice at t=1 marks network 1; a relayed slot-1 report about 2
  // absorbed at t=3 marks network 2 at absorption time.
  gossip::update_unheard(tracker, buf, 1, 1);
  buf.absorb(std::vector<gossip::FeedbackMessage>{make_msg(1, 9, 2, 4.0, 2, {1, 2, 3},
                                                           {0.2, 0.5, 0.3})},
             3);
  gossip::update_unheard(tracker, buf, 1, 3);
  CHECK(tracker.last_heard[2] == 3);

  // Network 3 has been silent since slot 0: unheard once t - 0 >= x.
  CHECK(gossip::unheard_set(tracker, {1, 2, 3}, 3).empty());
  CHECK(gossip::unheard_set(tracker, {1, 2, 3}, 4) == std::vector<int>{3});
  CHECK(gossip::unheard_set(tracker, {1, 2, 3}, 6) == std::vector<int>{3});
  // By t = 7 networks 1 and 2 (last heard at 3) go quiet as well.
  CHECK(gossip::unheard_set(tracker, {1, 2, 3}, 7) == std::vector<int>{1, 2, 3});
}

TEST_CASE("gain estimation from reports") {
  const game::GainScale scale{18.0};
  SUBCASE("single truthful report reconstructs the joining share") {
    const auto msg = make_msg(5, 2, 3, 3.0, 6, {1, 2, 3}, {0.2, 0.3, 0.5});
    const gossip::FeedbackMessage* reports[] = {&msg};
    const double est =
        gossip::estimate_network_gain(reports, scale, gossip::GainMode::reconstruct);
    CHECK(est == doctest::Approx((18.0 / 7.0) / 18.0).epsilon(1e-9));
  }
  SUBCASE("all clients reporting agree") {
    std::vector<gossip::FeedbackMessage> msgs;
    std::vector<const gossip::FeedbackMessage*> ptrs;
    for (int s = 1; s <= 6; ++s) msgs.push_back(make_msg(5, s, 3, 3.0, 6, {3}, {1.0}));
    for (const auto& m : msgs) ptrs.push_back(&m);
    const double est =
        gossip::estimate_network_gain(ptrs, scale, gossip::GainMode::reconstruct);
    CHECK(est == doctest::Approx((18.0 / 7.0) / 18.0).epsilon(1e-9));
  }
  SUBCASE("literal mode underestimates with one of six reporting") {
    const auto msg = make_msg(5, 2, 3, 3.0, 6, {3}, {1.0});
    const gossip::FeedbackMessage* reports[] = {&msg};
    const double est = gossip::estimate_network_gain(reports, scale, gossip::GainMode::literal);
    CHECK(est * 18.0 == doctest::Approx(3.0 / 7.0).epsilon(1e-9));  // 0.42857 Mbps unscaled
  }
}

// Fact 1 regime: one tagged observation, relays forward in the slot after
// receipt. The empirical reach fraction sits between the direct-path lower
// bound b0 and the permutation-counting upper bound b_t.
TEST_CASE("reachability bounded by the closed-form hearing probability") {
  const int n = 20;
  const double p_t = 0.25;
  const double p_l = 1.0 / 3.0;
  const double b0 = p_t * (1.0 - p_t) * p_l;  // broadcast and listen gates
  const int trials = 2000;
  const int max_delay = 5;

  Rng rng(424242);
  std::vector<int> heard_by(max_delay + 1, 0);  // device 1's tally, lag-indexed
  for (int trial = 0; trial < trials; ++trial) {
    // frontier holds devices that learned the tag in the previous slot and
    // may forward it exactly once, matching the path-counting model.
    std::set<int> knows{0};
    std::set<int> frontier{0};
    for (int lag = 0; lag <= max_delay; ++lag) {
      std::set<int> next_frontier;
      std::vector<int> broadcasting;
      for (int dev : frontier) {
        if (rng.bernoulli(p_t)) broadcasting.push_back(dev);
      }
      if (!broadcasting.empty()) {
        for (int dev = 0; dev < n; ++dev) {
          if (knows.count(dev)) continue;
          const bool listens = !rng.bernoulli(p_t) && rng.bernoulli(p_l);
          if (listens) {
            knows.insert(dev);
            next_frontier.insert(dev);
          }
        }
      }
      frontier = std::move(next_frontier);
      if (knows.count(1)) {
        for (int l = lag; l <= max_delay; ++l) ++heard_by[l];
        break;
      }
    }
  }

  for (int lag = 0; lag <= max_delay; ++lag) {
    const double frac = heard_by[lag] / double(trials);
    const double upper = theory::hear_probability(n, b0, lag);
    const double sigma = std::sqrt(std::max(upper * (1 - upper), 0.25 / trials) / trials);
    CHECK(frac <= upper + 3.0 * sigma);
    const double lower = b0;
    CHECK(frac >= lower - 3.0 * std::sqrt(lower * (1 - lower) / trials));
  }
}
