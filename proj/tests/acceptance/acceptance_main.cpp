// Acceptance suite: one line per criterion, exit 0 only when all pass.
// Stochastic criteria use 100 seeded runs; the whole suite is deterministic
// for a fixed build.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cobandit/bandit.hpp"
#include "cobandit/engine.hpp"
#include "cobandit/metrics.hpp"
#include "cobandit/theory.hpp"

using namespace cobandit;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %-26s %s\n", pass ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

struct BatchStats {
  double pct_stable = 0.0;
  double pct_stable_at_nash = 0.0;  // of stable runs
  double frac_runs_at_nash = 0.0;   // of all runs
  double median_slot = 0.0;
  double median_download_gb = 0.0;
  std::vector<double> mean_distance;
};

BatchStats run_batch(const sim::ScenarioConfig& cfg, sim::Algorithm algo, int runs,
                     uint64_t seed) {
  const auto summaries = sim::run_many(cfg, algo, runs, seed, 1);
  const auto rep = metrics::aggregate(summaries);
  BatchStats out;
  out.pct_stable = rep.pct_stable;
  out.pct_stable_at_nash = rep.pct_stable_at_nash;
  out.median_slot = rep.median_stabilization_slot;
  out.median_download_gb = rep.median_download_gb;
  out.mean_distance = rep.mean_distance;
  int at_nash = 0;
  for (const auto& s : summaries) at_nash += s.verdict.stable && s.verdict.at_nash;
  out.frac_runs_at_nash = static_cast<double>(at_nash) / runs;
  return out;
}

sim::ScenarioConfig leave600_scenario() {
  auto cfg = sim::baseline_scenario();
  for (int id = 11; id <= 20; ++id)
    cfg.events.push_back({sim::EventSpec::Type::leave, 601, id, 0, 0, {}});
  return cfg;
}

std::string fingerprint(const sim::RunRecord& record) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& slot : record.slots) {
    out << slot.slot << '|' << slot.distance_pct << '|';
    for (int c : slot.allocation) out << c << ',';
    for (const auto& d : slot.devices) {
      out << d.device << ':' << d.network << ':' << d.comm_mode << ':' << d.max_prob << ':'
          << d.gain_scaled << ':' << d.switch_delay_s << ';';
    }
  }
  for (const auto& [id, bytes] : record.download_bytes) out << id << '=' << bytes << ';';
  return out.str();
}

// ---- criteria 1 and 2: baseline stabilization and download ordering -------

void criteria_baseline() {
  const auto cfg = sim::baseline_scenario();
  const int runs = 100;
  const auto cob = run_batch(cfg, sim::Algorithm::cobandit, runs, 10'000);
  const auto ewa = run_batch(cfg, sim::Algorithm::ewa, runs, 20'000);
  const auto exp = run_batch(cfg, sim::Algorithm::exp3, runs, 30'000);

  const bool cob_ok = cob.pct_stable >= 90.0 && cob.pct_stable_at_nash >= 80.0 &&
                      cob.median_slot >= 70.0 && cob.median_slot <= 270.0;
  const bool ewa_ok = ewa.pct_stable == 100.0 && ewa.pct_stable_at_nash == 100.0 &&
                      ewa.median_slot >= 25.0 && ewa.median_slot <= 100.0;
  const bool exp_ok = exp.pct_stable == 0.0;
  report(1, "baseline stabilization", cob_ok && ewa_ok && exp_ok,
         fmt("cobandit stable=%.0f%% atNE=%.0f%% med=%.1f | ewa stable=%.0f%% atNE=%.0f%% "
             "med=%.1f | exp3 stable=%.0f%%",
             cob.pct_stable, cob.pct_stable_at_nash, cob.median_slot, ewa.pct_stable,
             ewa.pct_stable_at_nash, ewa.median_slot, exp.pct_stable));

  const bool order = ewa.median_download_gb >= cob.median_download_gb;
  const bool close = cob.median_download_gb >= 0.9 * ewa.median_download_gb;
  const bool beats_exp3 = cob.median_download_gb >= 1.30 * exp.median_download_gb;
  report(2, "download ordering", order && close && beats_exp3,
         fmt("ewa=%.3f GB cobandit=%.3f GB exp3=%.3f GB (cobandit/exp3=%.2fx)",
             ewa.median_download_gb, cob.median_download_gb, exp.median_download_gb,
             cob.median_download_gb / exp.median_download_gb));
}

// ---- criterion 3: cooperation monotonicity --------------------------------

void criterion_cooperation() {
  const int runs = 100;
  auto sweep_cfg = [&](double p_t) {
    auto cfg = sim::baseline_scenario();
    cfg.params.d = 0;
    cfg.params.always_listen = true;
    cfg.params.p_t = p_t;
    return cfg;
  };
  const auto at0 = run_batch(sweep_cfg(0.0), sim::Algorithm::cobandit, runs, 40'000);
  const auto at05 = run_batch(sweep_cfg(0.05), sim::Algorithm::cobandit, runs, 41'000);
  const auto at25 = run_batch(sweep_cfg(0.25), sim::Algorithm::cobandit, runs, 42'000);
  const auto at50 = run_batch(sweep_cfg(0.5), sim::Algorithm::cobandit, runs, 43'000);

  const bool decreasing =
      at05.median_slot > at25.median_slot && at25.median_slot > at50.median_slot;
  const bool silent_gap = at0.median_slot >= 3.0 * at05.median_slot;

  // Sharing fully disabled: distributions must stay uniform to 1e-9.
  bool uniform_ok = true;
  for (uint64_t seed = 44'000; seed < 44'005; ++seed) {
    auto cfg = sim::baseline_scenario();
    cfg.params.sharing_enabled = false;
    cfg.seed = seed;
    const auto record = sim::run(cfg);
    for (const auto& slot : record.slots) {
      for (const auto& d : slot.devices) {
        if (std::abs(d.max_prob - 0.2) > 1e-9) uniform_ok = false;
      }
    }
  }
  report(3, "cooperation monotonicity", decreasing && silent_gap && uniform_ok,
         fmt("medians p_t 0/0.05/0.25/0.5 = %.1f/%.1f/%.1f/%.1f, no-sharing uniform=%s",
             at0.median_slot, at05.median_slot, at25.median_slot, at50.median_slot,
             uniform_ok ? "yes" : "no"));
}

// ---- criterion 4: delay helps ----------------------------------------------

void criterion_delay() {
  const int runs = 100;
  const std::vector<int> delays{0, 1, 3, 5};
  std::vector<double> frac;
  for (size_t i = 0; i < delays.size(); ++i) {
    auto cfg = sim::baseline_scenario();
    cfg.params.d = delays[i];
    frac.push_back(
        run_batch(cfg, sim::Algorithm::cobandit, runs, 50'000 + 1'000 * i).frac_runs_at_nash);
  }
  // Nondecreasing within 3-sigma binomial noise, endpoints strictly ordered.
  const double slack = 3.0 * std::sqrt(0.25 / runs);
  bool ok = frac.back() >= frac.front();
  for (size_t i = 1; i < frac.size(); ++i) {
    if (frac[i] < frac[i - 1] - slack) ok = false;
  }
  report(4, "delay helps", ok,
         fmt("fraction of runs stable at NE for d=0/1/3/5: %.2f/%.2f/%.2f/%.2f", frac[0],
             frac[1], frac[2], frac[3]));
}

// ---- criterion 5: uniform-capacity speedup ---------------------------------

void criterion_uniform() {
  const int runs = 100;
  auto uniform_cfg = sim::baseline_scenario();
  for (auto& n : uniform_cfg.networks) n.capacity_mbps = 13.0;

  const auto summaries =
      sim::run_many(uniform_cfg, sim::Algorithm::cobandit, runs, 60'000, 1);
  std::vector<double> slots;
  bool all_symmetric = true;
  int stable = 0;
  for (const auto& s : summaries) {
    if (!s.verdict.stable) continue;
    ++stable;
    slots.push_back(static_cast<double>(*s.verdict.stabilization_slot));
    std::vector<int> counts(5, 0);
    for (const auto& [dev, net] : s.verdict.stable_networks) ++counts[net - 1];
    if (counts != std::vector<int>{4, 4, 4, 4, 4}) all_symmetric = false;
  }
  const double uniform_median = metrics::median(slots);

  const auto baseline =
      run_batch(sim::baseline_scenario(), sim::Algorithm::cobandit, runs, 61'000);
  const bool ok = stable > 0 && all_symmetric && uniform_median < baseline.median_slot;
  report(5, "uniform-capacity speedup", ok,
         fmt("uniform med=%.1f < baseline med=%.1f, stable=%d/100, all at [4,4,4,4,4]=%s",
             uniform_median, baseline.median_slot, stable, all_symmetric ? "yes" : "no"));
}

// ---- criterion 6: dynamic adaptation ---------------------------------------

void criterion_dynamic() {
  const int runs = 100;
  auto reset_cfg = leave600_scenario();
  reset_cfg.params.minimal_reset = true;
  const auto cob = run_batch(reset_cfg, sim::Algorithm::cobandit, runs, 70'000);
  const auto exp = run_batch(leave600_scenario(), sim::Algorithm::exp3, runs, 71'000);

  double best = 1e300;
  int best_slot = -1;
  for (int t = 601; t <= 800; ++t) {
    if (cob.mean_distance[t - 1] < best) {
      best = cob.mean_distance[t - 1];
      best_slot = t;
    }
  }
  const bool recovers = best < 7.5;

  bool exp_above = true;
  int first_violation = -1;
  for (int t = 700; t <= 1200; ++t) {
    if (exp.mean_distance[t - 1] < cob.mean_distance[t - 1]) {
      exp_above = false;
      first_violation = t;
      break;
    }
  }
  std::string detail =
      fmt("min mean distance in (600,800] = %.2f at slot %d (eps 7.5); exp3 above cobandit "
          "on [700,1200]=%s",
          best, best_slot, exp_above ? "yes" : "no");
  if (!exp_above) detail += fmt(" (violated at %d)", first_violation);
  report(6, "dynamic adaptation", recovers && exp_above, detail);
}

// ---- criterion 7: property suite -------------------------------------------

bool prop_simplex_and_max_weight() {
  Rng rng(123);
  auto state = bandit::WeightState::uniform({1, 2, 3, 4, 5}, 10.0);
  for (int step = 0; step < 2000; ++step) {
    std::vector<double> losses(5);
    for (auto& l : losses) l = rng.bernoulli(0.4) ? rng.uniform() * 2.5 : 0.0;
    bandit::weight_update(state, losses);
    const double top = *std::max_element(state.weights.begin(), state.weights.end());
    if (std::abs(top - 1.0) > 1e-12) return false;
    const auto p = bandit::probabilities(state);
    double sum = 0.0;
    for (double v : p) {
      if (v < 0.0) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) return false;
  }
  return true;
}

bool prop_estimator_unbiased() {
  const std::vector<int> networks{1, 2};
  const std::vector<std::vector<double>> dists{{0.6, 0.4}, {0.3, 0.7}, {0.5, 0.5}};
  const std::vector<std::vector<double>> losses{{0.3, 0.1}, {0.0, 0.5}, {0.4, 0.2}};
  const int draws = 100000;
  Rng rng(777);
  std::vector<double> mean(2, 0.0);
  std::vector<gossip::FeedbackMessage> storage;
  for (int it = 0; it < draws; ++it) {
    storage.clear();
    std::vector<std::vector<size_t>> members(3);
    for (int lag = 0; lag < 3; ++lag) {
      for (int dev = 1; dev <= 3; ++dev) {
        if (dev != 1 && !rng.bernoulli(0.7)) continue;
        gossip::FeedbackMessage m;
        m.slot = 10 - lag;
        m.sender = dev;
        m.available = networks;
        m.distribution = dists[dev - 1];
        m.network = rng.bernoulli(dists[dev - 1][0]) ? 1 : 2;
        m.bitrate_mbps = 1.0;
        m.client_count = 1;
        storage.push_back(m);
        members[lag].push_back(storage.size() - 1);
      }
    }
    bandit::EstimatorWindow window;
    for (int lag = 0; lag < 3; ++lag) {
      window.lags.emplace_back();
      for (size_t idx : members[lag]) window.lags.back().push_back(&storage[idx]);
    }
    const auto lhat = bandit::loss_estimate_core(networks, window, losses, 1);
    mean[0] += lhat[0];
    mean[1] += lhat[1];
  }
  for (auto& v : mean) v /= draws;
  for (size_t ni = 0; ni < 2; ++ni) {
    const double expected = (losses[0][ni] + losses[1][ni] + losses[2][ni]) / 3.0;
    if (std::abs(mean[ni] - expected) > 0.01 * expected) return false;
  }
  return true;
}

bool prop_coincides_with_ewa() {
  const std::vector<int> networks{1, 2, 3};
  auto cob = bandit::WeightState::uniform(networks, 10.0);
  auto ewa = bandit::WeightState::uniform(networks, 10.0);
  Rng rng(4242);
  const game::GainScale scale{10.0};
  std::vector<gossip::FeedbackMessage> msgs;
  for (int t = 1; t <= 200; ++t) {
    std::vector<double> gains(3);
    for (auto& g : gains) g = rng.uniform() * 10.0;
    msgs.clear();
    for (int i = 0; i < 3; ++i) {
      gossip::FeedbackMessage m;
      m.slot = t;
      m.sender = 100 + i;
      m.network = networks[i];
      m.bitrate_mbps = gains[i];
      m.client_count = 1;
      m.available = networks;
      m.distribution = {0, 0, 0};
      m.distribution[i] = 1.0;
      msgs.push_back(m);
    }
    const auto p = bandit::probabilities(cob);
    const int own = networks[rng.sample(p)];
    gossip::FeedbackMessage self;
    self.slot = t;
    self.sender = 1;
    self.network = own;
    self.bitrate_mbps = gains[own - 1];
    self.client_count = 2;
    self.available = networks;
    self.distribution = p;
    msgs.push_back(self);

    bandit::EstimatorWindow window;
    window.lags.emplace_back();
    for (const auto& m : msgs) window.lags.back().push_back(&m);
    const auto losses =
        bandit::window_losses(networks, window, 1, scale, gossip::GainMode::reconstruct);
    bandit::weight_update(cob, bandit::loss_estimate_core(networks, window, losses, 1));

    std::vector<std::optional<double>> known(3);
    for (int i = 0; i < 3; ++i) {
      known[i] = networks[i] == own ? gains[i] / scale.c_max : gains[i] / 2.0 / scale.c_max;
    }
    bandit::ewa_step(ewa, game::perceived_loss(known));
    for (int i = 0; i < 3; ++i) {
      if (std::abs(cob.weights[i] - ewa.weights[i]) > 1e-10) return false;
    }
  }
  return true;
}

bool prop_ne_bruteforce() {
  for (int k = 1; k <= 3; ++k) {
    std::vector<int> caps_idx(k, 1);
    while (true) {
      const std::vector<double> caps(caps_idx.begin(), caps_idx.end());
      for (int n = 1; n <= 6; ++n) {
        if (!game::is_nash(caps, game::nash_allocation(caps, n))) return false;
      }
      int pos = k - 1;
      while (pos >= 0 && caps_idx[pos] == 5) caps_idx[pos--] = 1;
      if (pos < 0) break;
      ++caps_idx[pos];
    }
  }
  return true;
}

bool prop_buffer_rules() {
  gossip::FeedbackBuffer buf(5);
  auto msg = [](int slot, int sender) {
    gossip::FeedbackMessage m;
    m.slot = slot;
    m.sender = sender;
    m.network = 1;
    m.bitrate_mbps = 3.0;
    m.client_count = 2;
    m.available = {1};
    m.distribution = {1.0};
    return m;
  };
  const std::vector<gossip::FeedbackMessage> batch{msg(10, 1), msg(10, 1), msg(4, 2),
                                                   msg(9, 3)};
  buf.absorb(batch, 10);
  if (buf.size() != 2) return false;  // dedup + staleness
  buf.absorb(batch, 10);
  if (buf.size() != 2) return false;  // idempotent
  Rng rng(8);
  for (int t = 11; t <= 80; ++t) {
    std::vector<gossip::FeedbackMessage> more;
    for (int s = 1; s <= 6; ++s) {
      if (rng.bernoulli(0.5)) more.push_back(msg(t - rng.uniform_int(9), s));
    }
    buf.absorb(more, t);
    for (const auto* m : buf.all()) {
      if (m->slot < t - 5 || m->slot > t) return false;
    }
    if (buf.size() > 6u * 6u) return false;
  }
  return true;
}

bool prop_rng_reproducible() {
  auto cfg = sim::baseline_scenario();
  cfg.horizon = 150;
  cfg.seed = 987654321;
  return fingerprint(sim::run(cfg)) == fingerprint(sim::run(cfg));
}

void criterion_properties() {
  struct Prop {
    const char* name;
    bool ok;
  };
  const Prop props[] = {
      {"simplex+max-weight", prop_simplex_and_max_weight()},
      {"estimator-unbiased", prop_estimator_unbiased()},
      {"ewa-coincidence", prop_coincides_with_ewa()},
      {"ne-bruteforce", prop_ne_bruteforce()},
      {"buffer-rules", prop_buffer_rules()},
      {"rng-reproducible", prop_rng_reproducible()},
  };
  bool all = true;
  std::string detail;
  for (const auto& p : props) {
    all = all && p.ok;
    detail += fmt("%s=%s ", p.name, p.ok ? "ok" : "FAIL");
  }
  report(7, "property suite", all, detail);
}

// ---- criterion 8: theory values --------------------------------------------

void criterion_theory() {
  const bool hear_ok = std::abs(theory::hear_probability(20, 0.05, 1) - 0.09275) <= 1e-9;

  theory::TheoryInputs in;
  in.k = 5;
  in.d = 0;
  in.b0 = 0.0;
  in.T = 100;
  const auto out = theory::regret_bound(in);
  const long double e = 2.718281828459045235360287471352662498L;
  const long double oracle = 2.0L * e * std::sqrt(1.0L * std::log(5.0L) * 100.0L / 0.2L);
  const bool bound_ok = std::abs(out.bound - static_cast<double>(oracle)) <= 1e-9;

  bool monotone = true;
  double prev = 1e300;
  for (int i = 0; i <= 19; ++i) {
    theory::TheoryInputs grid = in;
    grid.T = 5000;
    grid.b0 = 0.2 + (1.0 - std::exp(-1.0) - 0.2) * i / 19.0;  // strictly above 1/k
    const double b = theory::regret_bound(grid).bound;
    if (b >= prev) monotone = false;
    prev = b;
  }
  report(8, "theory values", hear_ok && bound_ok && monotone,
         fmt("b1=%.7f (=0.09275), bound=%.9f (oracle to 1e-9: %s), monotone in b0: %s",
             theory::hear_probability(20, 0.05, 1), out.bound, bound_ok ? "yes" : "no",
             monotone ? "yes" : "no"));
}

}  // namespace

int main() {
  criteria_baseline();
  criterion_cooperation();
  criterion_delay();
  criterion_uniform();
  criterion_dynamic();
  criterion_properties();
  criterion_theory();
  if (failures == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", failures);
  return 1;
}
