#include "cobandit/delay_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace cobandit::sim {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
}

DelayModel::DelayModel(JohnsonSuParams wifi, StudentTParams cellular, double slot_duration_s)
    : wifi_(wifi), cellular_(cellular), slot_duration_s_(slot_duration_s) {
  if (slot_duration_s_ <= 0.0)
    throw std::invalid_argument("DelayModel: slot duration must be positive");
  if (wifi_.delta <= 0.0 && wifi_.lambda > 0.0)
    throw std::invalid_argument("DelayModel: Johnson SU delta must be positive");
  if (cellular_.nu <= 0.0 && cellular_.scale > 0.0)
    throw std::invalid_argument("DelayModel: Student t nu must be positive");
}

double DelayModel::cdf(game::NetworkKind kind, double x) const {
  if (kind == game::NetworkKind::wifi) {
    if (wifi_.lambda <= 0.0) return x < wifi_.xi ? 0.0 : 1.0;
    const double z = wifi_.gamma + wifi_.delta * std::asinh((x - wifi_.xi) / wifi_.lambda);
    return boost::math::cdf(kStdNormal, z);
  }
  if (cellular_.scale <= 0.0) return x < cellular_.loc ? 0.0 : 1.0;
  const boost::math::students_t_distribution<double> t(cellular_.nu);
  return boost::math::cdf(t, (x - cellular_.loc) / cellular_.scale);
}

double DelayModel::quantile(game::NetworkKind kind, double u) const {
  u = std::clamp(u, 1e-15, 1.0 - 1e-15);
  if (kind == game::NetworkKind::wifi) {
    if (wifi_.lambda <= 0.0) return wifi_.xi;
    const double z = boost::math::quantile(kStdNormal, u);
    return wifi_.xi + wifi_.lambda * std::sinh((z - wifi_.gamma) / wifi_.delta);
  }
  if (cellular_.scale <= 0.0) return cellular_.loc;
  const boost::math::students_t_distribution<double> t(cellular_.nu);
  return cellular_.loc + cellular_.scale * boost::math::quantile(t, u);
}

double DelayModel::sample(game::NetworkKind kind, Rng& rng) const {
  // Point-mass cases short-circuit but still consume one draw, keeping the
  // stream layout independent of the parameters.
  const double u = rng.uniform();
  if (kind == game::NetworkKind::wifi && wifi_.lambda <= 0.0)
    return std::clamp(wifi_.xi, 0.0, slot_duration_s_);
  if (kind == game::NetworkKind::cellular && cellular_.scale <= 0.0)
    return std::clamp(cellular_.loc, 0.0, slot_duration_s_);

  const double lo = cdf(kind, 0.0);
  const double hi = cdf(kind, slot_duration_s_);
  if (!(hi > lo)) return 0.0;  // distribution has no mass in the slot window
  const double x = quantile(kind, lo + u * (hi - lo));
  return std::clamp(x, 0.0, slot_duration_s_);
}

double sample_switch_delay(std::optional<int> prev_network, int next_network,
                           game::NetworkKind next_kind, const DelayModel& model, Rng& rng) {
  if (!prev_network.has_value() || *prev_network == next_network) return 0.0;
  return model.sample(next_kind, rng);
}

}  // namespace cobandit::sim
