#pragma once

#include <optional>

#include "cobandit/game.hpp"
#include "cobandit/rng.hpp"

namespace cobandit::sim {

// Johnson's SU switching-delay fit for WiFi: x = xi + lambda * sinh((z - gamma) / delta)
// with z standard normal. lambda <= 0 degenerates to a point mass at xi.
// Defaults are placeholders (mean ~4.5 s) standing in for the unpublished
// real-world fit; override them in the scenario file.
struct JohnsonSuParams {
  double gamma = -1.0;
  double delta = 1.5;
  double lambda = 1.0;
  double xi = 3.6;
};

// Location-scale Student's t fit for cellular (placeholder, mean ~7 s).
// scale <= 0 degenerates to a point mass at loc.
struct StudentTParams {
  double nu = 4.0;
  double loc = 7.0;
  double scale = 1.5;
};

// Switching-cost model, truncated to [0, slot_duration_s]. Sampling takes a
// single uniform draw through the inverse CDF of the truncated law, so the
// per-device stream consumption is fixed.
class DelayModel {
 public:
  DelayModel(JohnsonSuParams wifi, StudentTParams cellular, double slot_duration_s);

  double sample(game::NetworkKind kind, Rng& rng) const;
  double cdf(game::NetworkKind kind, double x) const;
  double quantile(game::NetworkKind kind, double u) const;

  const JohnsonSuParams& wifi() const { return wifi_; }
  const StudentTParams& cellular() const { return cellular_; }
  double slot_duration() const { return slot_duration_s_; }

 private:
  JohnsonSuParams wifi_;
  StudentTParams cellular_;
  double slot_duration_s_;
};

// Zero when the device stays (or associates for the first time); otherwise a
// truncated draw from the target network kind's distribution.
double sample_switch_delay(std::optional<int> prev_network, int next_network,
                           game::NetworkKind next_kind, const DelayModel& model, Rng& rng);

}  // namespace cobandit::sim
