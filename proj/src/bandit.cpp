#include "cobandit/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cobandit::bandit {

namespace {

void check_simplex(const std::vector<double>& p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::logic_error("distribution entry negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::logic_error("distribution does not sum to 1");
}

}  // namespace

WeightState WeightState::uniform(std::vector<int> network_ids, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("WeightState: eta must be positive");
  std::sort(network_ids.begin(), network_ids.end());
  WeightState state;
  state.networks = std::move(network_ids);
  state.weights.assign(state.networks.size(), 1.0);
  state.eta = eta;
  return state;
}

int WeightState::index_of(int network_id) const {
  const auto it = std::lower_bound(networks.begin(), networks.end(), network_id);
  if (it == networks.end() || *it != network_id) return -1;
  return static_cast<int>(it - networks.begin());
}

std::vector<double> probabilities(const WeightState& state) {
  if (state.networks.empty()) throw std::invalid_argument("probabilities: no networks");
  const double total = std::accumulate(state.weights.begin(), state.weights.end(), 0.0);
  std::vector<double> p(state.weights.size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = state.weights[i] / total;
  return p;
}

Selection select_network(const std::vector<int>& networks, const std::vector<double>& p,
                         const std::vector<int>& unheard, int n_devices, Rng& rng) {
  if (networks.empty()) throw std::invalid_argument("select_network: no networks");
  if (p.size() != networks.size())
    throw std::invalid_argument("select_network: distribution size mismatch");
  Selection sel;
  if (!unheard.empty() && n_devices >= 1) {
    const double gate = std::min(1.0, static_cast<double>(unheard.size()) / n_devices);
    if (rng.bernoulli(gate)) {
      sel.network = unheard[rng.uniform_int(static_cast<int>(unheard.size()))];
      sel.exploring_unheard = true;
      return sel;
    }
  }
  sel.network = networks[rng.sample(p)];
  return sel;
}

std::vector<std::vector<double>> window_losses(const std::vector<int>& networks,
                                               const EstimatorWindow& window, int self,
                                               const game::GainScale& scale,
                                               gossip::GainMode mode) {
  std::vector<std::vector<double>> losses;
  losses.reserve(window.lags.size());
  std::vector<const gossip::FeedbackMessage*> reports;
  for (const auto& lag : window.lags) {
    const gossip::FeedbackMessage* own = nullptr;
    for (const gossip::FeedbackMessage* msg : lag) {
      if (msg->sender == self) {
        own = msg;
        break;
      }
    }
    std::vector<std::optional<double>> gains(networks.size());
    for (size_t ni = 0; ni < networks.size(); ++ni) {
      const int network = networks[ni];
      if (own != nullptr && own->network == network) {
        // Own chosen network: the realized share, already known exactly.
        gains[ni] = own->bitrate_mbps / scale.c_max;
        continue;
      }
      reports.clear();
      for (const gossip::FeedbackMessage* msg : lag) {
        if (msg->network == network && msg->sender != self) reports.push_back(msg);
      }
      if (!reports.empty()) gains[ni] = gossip::estimate_network_gain(reports, scale, mode);
    }
    losses.push_back(game::perceived_loss(gains));
  }
  return losses;
}

std::vector<double> loss_estimate_core(const std::vector<int>& networks,
                                       const EstimatorWindow& window,
                                       const std::vector<std::vector<double>>& losses,
                                       int self) {
  if (window.lags.empty()) throw std::invalid_argument("loss_estimate_core: empty window");
  if (losses.size() != window.lags.size())
    throw std::invalid_argument("loss_estimate_core: losses/window size mismatch");

  std::vector<double> estimate(networks.size(), 0.0);
  for (size_t lag = 0; lag < window.lags.size(); ++lag) {
    const auto& members = window.lags[lag];
    for (size_t ni = 0; ni < networks.size(); ++ni) {
      const int network = networks[ni];
      bool chosen_by_someone = false;
      for (const gossip::FeedbackMessage* msg : members) {
        if (msg->network == network) {
          chosen_by_someone = true;
          break;
        }
      }
      if (!chosen_by_someone) continue;  // I = 0: the division is never evaluated

      // q through log1p/expm1: with tiny probabilities 1 - p rounds to 1
      // and the plain product would report q = 0 for a network someone chose.
      double log_miss = 0.0;
      double self_p = 0.0;
      for (const gossip::FeedbackMessage* msg : members) {
        const int idx = msg->available_index(network);
        if (idx < 0) continue;  // network unavailable to this sender
        log_miss += std::log1p(-std::min(msg->distribution[idx], 1.0));
        if (msg->sender == self) self_p = msg->distribution[idx];
      }
      const double q = -std::expm1(log_miss);
      if (!(q > 0.0))
        throw std::logic_error("loss_estimate: q = 0 with I = 1 (inconsistent window)");
      if (q < self_p - 1e-12)
        throw std::logic_error("loss_estimate: q below own selection probability");
      estimate[ni] += losses[lag][ni] / q;
    }
  }
  const double window_size = static_cast<double>(window.lags.size());
  for (double& v : estimate) v /= window_size;
  return estimate;
}

std::vector<double> loss_estimate(const std::vector<int>& networks,
                                  const EstimatorWindow& window, int self,
                                  const game::GainScale& scale, gossip::GainMode mode) {
  return loss_estimate_core(networks, window, window_losses(networks, window, self, scale, mode),
                            self);
}

void weight_update(WeightState& state, const std::vector<double>& loss_estimates) {
  if (loss_estimates.size() != state.weights.size())
    throw std::invalid_argument("weight_update: loss vector size mismatch");
  for (double l : loss_estimates) {
    if (!(l >= 0.0)) throw std::invalid_argument("weight_update: losses must be >= 0");
  }
  // Log-space keeps eta * l_hat spikes from underflowing before the
  // max-normalization; the max weight comes out exactly 1.
  std::vector<double> log_w(state.weights.size());
  double top = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < state.weights.size(); ++i) {
    log_w[i] = std::log(state.weights[i]) - state.eta * loss_estimates[i];
    top = std::max(top, log_w[i]);
  }
  for (size_t i = 0; i < state.weights.size(); ++i) {
    state.weights[i] = std::max(std::exp(log_w[i] - top), kWeightFloor);
  }
}

void ewa_step(WeightState& state, const std::vector<double>& losses) {
  if (losses.size() != state.networks.size())
    throw std::invalid_argument("ewa_step: EWA requires a loss for every network");
  for (double l : losses) {
    if (!std::isfinite(l)) throw std::invalid_argument("ewa_step: missing or non-finite loss");
  }
  weight_update(state, losses);
}

void on_network_discovered(WeightState& state, int network) {
  if (state.index_of(network) >= 0)
    throw std::invalid_argument("on_network_discovered: network already present");
  const auto it = std::lower_bound(state.networks.begin(), state.networks.end(), network);
  const auto offset = it - state.networks.begin();
  state.networks.insert(it, network);
  state.weights.insert(state.weights.begin() + offset, 1.0);
}

void on_network_lost(WeightState& state, int network, double threshold) {
  const int idx = state.index_of(network);
  if (idx < 0) throw std::invalid_argument("on_network_lost: unknown network");
  const double total = std::accumulate(state.weights.begin(), state.weights.end(), 0.0);
  const double lost_probability = state.weights[idx] / total;
  state.networks.erase(state.networks.begin() + idx);
  state.weights.erase(state.weights.begin() + idx);
  if (state.weights.empty()) return;
  if (lost_probability >= threshold) {
    std::fill(state.weights.begin(), state.weights.end(), 1.0);
  } else {
    const double top = *std::max_element(state.weights.begin(), state.weights.end());
    for (double& w : state.weights) w = std::max(w / top, kWeightFloor);
  }
}

Exp3State Exp3State::uniform(std::vector<int> network_ids) {
  std::sort(network_ids.begin(), network_ids.end());
  Exp3State state;
  state.networks = std::move(network_ids);
  state.weights.assign(state.networks.size(), 1.0);
  return state;
}

int Exp3State::index_of(int network_id) const {
  const auto it = std::lower_bound(networks.begin(), networks.end(), network_id);
  if (it == networks.end() || *it != network_id) return -1;
  return static_cast<int>(it - networks.begin());
}

double exp3_gamma(long long t) {
  if (t < 1) throw std::invalid_argument("exp3_gamma: t starts at 1");
  return std::min(1.0, std::pow(static_cast<double>(t), -1.0 / 3.0));
}

std::vector<double> exp3_probabilities(const Exp3State& state) {
  if (state.networks.empty()) throw std::invalid_argument("exp3_probabilities: no networks");
  const double gamma = exp3_gamma(state.t);
  const double total = std::accumulate(state.weights.begin(), state.weights.end(), 0.0);
  const double k = static_cast<double>(state.networks.size());
  std::vector<double> p(state.weights.size());
  for (size_t i = 0; i < p.size(); ++i) {
    p[i] = (1.0 - gamma) * state.weights[i] / total + gamma / k;
  }
  return p;
}

std::vector<double> exp3_step(Exp3State& state, int chosen_network, double gain01) {
  if (gain01 < 0.0 || gain01 > 1.0)
    throw std::invalid_argument("exp3_step: gain must lie in [0,1]");
  const int idx = state.index_of(chosen_network);
  if (idx < 0) throw std::invalid_argument("exp3_step: unknown network");
  const double gamma = exp3_gamma(state.t);
  const double k = static_cast<double>(state.networks.size());
  const auto p = exp3_probabilities(state);
  if (p[idx] > 0.0) {  // gamma/k floor keeps this positive; guarded anyway
    const double gain_hat = gain01 / p[idx];
    state.weights[idx] *= std::exp(gamma * gain_hat / k);
  }
  // Rescaling leaves the mixture distribution unchanged and avoids overflow.
  const double top = *std::max_element(state.weights.begin(), state.weights.end());
  if (top > 1e100) {
    for (double& w : state.weights) w /= top;
  }
  ++state.t;
  return exp3_probabilities(state);
}

bool minimal_reset_explore(WeightState& state, const std::vector<double>& p,
                           int explored_network, double explored_gain,
                           std::optional<double> anchor_gain, double threshold) {
  check_simplex(p);
  const double top = *std::max_element(p.begin(), p.end());
  if (top < threshold) return false;
  if (!anchor_gain.has_value()) return false;
  if (!(explored_gain > *anchor_gain)) return false;
  const int idx = state.index_of(explored_network);
  if (idx < 0) throw std::invalid_argument("minimal_reset_explore: unknown network");
  state.weights[idx] = 1.0;
  return true;
}

bool minimal_reset_feedback(WeightState& state, const std::vector<double>& p,
                            int candidate_network, double candidate_gain,
                            std::optional<double> anchor_gain, double threshold,
                            double margin, int own_clients, Rng& rng) {
  check_simplex(p);
  const double top = *std::max_element(p.begin(), p.end());
  if (top < threshold) return false;
  if (!anchor_gain.has_value() || *anchor_gain <= 0.0) return false;
  if (!(candidate_gain / *anchor_gain > 1.0 + margin)) return false;
  if (own_clients < 1) throw std::invalid_argument("minimal_reset_feedback: bad client count");
  if (!rng.bernoulli(1.0 / static_cast<double>(own_clients))) return false;
  const int idx = state.index_of(candidate_network);
  if (idx < 0) throw std::invalid_argument("minimal_reset_feedback: unknown network");
  state.weights[idx] = 1.0;
  return true;
}

}  // namespace cobandit::bandit
