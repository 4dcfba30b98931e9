#pragma once

#include <optional>
#include <vector>

#include "cobandit/game.hpp"
#include "cobandit/gossip.hpp"
#include "cobandit/rng.hpp"

namespace cobandit::bandit {

// Numeric floor keeping weights strictly positive under eta * l_hat spikes
// (the loss estimate is importance-weighted and can be large).
inline constexpr double kWeightFloor = 1e-12;

// Max-normalized multiplicative weights over the device's available
// networks: max weight is exactly 1 after every update.
struct WeightState {
  std::vector<int> networks;
  std::vector<double> weights;
  double eta = 10.0;

  static WeightState uniform(std::vector<int> network_ids, double eta);
  int index_of(int network_id) const;  // -1 when absent
};

// p_i = w_i / sum(w). Throws on an empty network set.
std::vector<double> probabilities(const WeightState& state);

struct Selection {
  int network = 0;
  bool exploring_unheard = false;
};

// Algorithm gate: with probability |unheard| / n_devices pick a uniform
// member of the unheard set (so each unheard network is explored with
// probability 1/n); otherwise sample from p.
Selection select_network(const std::vector<int>& networks, const std::vector<double>& p,
                         const std::vector<int>& unheard, int n_devices, Rng& rng);

// Estimator window: lags[0] holds the messages known for the current slot t,
// lags[k] those for slot t-k, up to d' = min(d, age-1). The device's own
// observation is present at every lag it was active for, so the window is
// also H_j(t - lag, t).
struct EstimatorWindow {
  std::vector<std::vector<const gossip::FeedbackMessage*>> lags;
};

// Per-lag perceived losses over the gains known by now. The device's own
// report pins the actual share of its chosen network; other networks use
// the hypothetical joining share estimated from neighbors' reports.
std::vector<std::vector<double>> window_losses(const std::vector<int>& networks,
                                               const EstimatorWindow& window, int self,
                                               const game::GainScale& scale,
                                               gossip::GainMode mode);

// Loss estimate rule:
//   l_hat_i = 1/(d'+1) * sum_lag [ l_i(lag) / q_i(lag) ] * I_i(lag)
// with I_i = 1 iff some known device chose i at that lag and
// q_i = 1 - prod over known devices of (1 - p_i at that lag); devices whose
// available set lacks i are excluded from the product. Terms with I = 0
// contribute zero and never evaluate the division.
std::vector<double> loss_estimate_core(const std::vector<int>& networks,
                                       const EstimatorWindow& window,
                                       const std::vector<std::vector<double>>& losses,
                                       int self);

// window_losses followed by loss_estimate_core.
std::vector<double> loss_estimate(const std::vector<int>& networks,
                                  const EstimatorWindow& window, int self,
                                  const game::GainScale& scale, gossip::GainMode mode);

// w_i <- w_i * exp(-eta * l_hat_i) / max_m (w_m * exp(-eta * l_hat_m)).
void weight_update(WeightState& state, const std::vector<double>& loss_estimates);

// EWA step: identical rule applied to full-information losses; every
// network's loss must be present and finite.
void ewa_step(WeightState& state, const std::vector<double>& losses);

// New network enters with the maximum weight so it gets explored.
void on_network_discovered(WeightState& state, int network);

// Removes a network; if it was held with selection probability >= threshold
// all remaining weights reset to 1, else they are re-normalized to max 1.
void on_network_lost(WeightState& state, int network, double threshold);

// Classic EXP3 with gamma_t = min(1, t^(-1/3)).
struct Exp3State {
  std::vector<int> networks;
  std::vector<double> weights;
  long long t = 1;

  static Exp3State uniform(std::vector<int> network_ids);
  int index_of(int network_id) const;
};

double exp3_gamma(long long t);

// Mixture distribution p_i = (1 - gamma) w_i / sum(w) + gamma / k.
std::vector<double> exp3_probabilities(const Exp3State& state);

// Importance-weighted gain update for the chosen network, then advances t.
// Returns the next slot's distribution.
std::vector<double> exp3_step(Exp3State& state, int chosen_network, double gain01);

// Minimal reset, trigger A: the device explored an unheard network and saw
// a better gain than its anchor (the network held with probability >=
// threshold). Resets the explored network's weight to 1. Returns whether a
// reset fired; the caller is responsible for dropping buffered feedback.
bool minimal_reset_explore(WeightState& state, const std::vector<double>& p,
                           int explored_network, double explored_gain,
                           std::optional<double> anchor_gain, double threshold);

// Minimal reset, trigger B: this slot's feedback shows `candidate_network`
// beating the anchor's gain by more than `margin`; with probability
// 1/own_clients the candidate's weight resets to 1.
bool minimal_reset_feedback(WeightState& state, const std::vector<double>& p,
                            int candidate_network, double candidate_gain,
                            std::optional<double> anchor_gain, double threshold,
                            double margin, int own_clients, Rng& rng);

}  // namespace cobandit::bandit
