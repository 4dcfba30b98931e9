#include "cobandit/theory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cobandit::theory {

namespace {
constexpr double kE = 2.718281828459045235360287471352662498;
}

RegretBound regret_bound(const TheoryInputs& inputs) {
  if (inputs.k < 2) throw std::invalid_argument("regret_bound: k must be >= 2");
  if (inputs.d < 0) throw std::invalid_argument("regret_bound: d must be >= 0");
  const double b0_max = 1.0 - 1.0 / kE;
  if (inputs.b0 < 0.0 || inputs.b0 > b0_max)
    throw std::invalid_argument("regret_bound: b0 must lie in [0, 1 - e^-1], got " +
                                std::to_string(inputs.b0));
  const double k = static_cast<double>(inputs.k);
  const double log_k = std::log(k);
  const double min_T = (inputs.d + 1) * k * log_k;
  if (static_cast<double>(inputs.T) <= min_T)
    throw std::invalid_argument("regret_bound: requires T > (d+1) k ln k = " +
                                std::to_string(min_T));

  const double share = std::max(1.0 / k, inputs.b0);
  const double T = static_cast<double>(inputs.T);
  RegretBound out;
  out.eta_star = std::sqrt(share * log_k / (kE * kE * (inputs.d + 1) * T));
  out.bound = 2.0 * kE * std::sqrt((inputs.d + 1) * log_k * T / share) +
              static_cast<double>(inputs.d);
  return out;
}

double hear_probability(int n, double b0, int t_delay) {
  if (n < 2) throw std::invalid_argument("hear_probability: n must be >= 2");
  if (b0 < 0.0 || b0 > 1.0) throw std::invalid_argument("hear_probability: b0 not in [0,1]");
  if (t_delay < 0) throw std::invalid_argument("hear_probability: negative delay");

  double miss_all = 1.0;
  double falling = 1.0;  // (n-2)(n-3)...(n-1-t'), as a falling product
  // Paths cannot repeat vertices, so no new path appears beyond t' = n-2 and
  // the probability stays constant from there on.
  const int last = std::min(t_delay, n - 2);
  for (int tp = 0; tp <= last; ++tp) {
    if (tp >= 1) falling *= static_cast<double>(n - 1 - tp);
    const double paths = std::min(falling * std::pow(b0, tp + 1), 1.0);
    miss_all *= (1.0 - paths);
  }
  return 1.0 - miss_all;
}

std::vector<double> replicator_field(const std::vector<double>& p,
                                     const std::vector<double>& losses,
                                     const std::vector<double>& q) {
  if (p.size() != losses.size() || p.size() != q.size())
    throw std::invalid_argument("replicator_field: size mismatch");
  double sum = 0.0;
  for (double pi : p) {
    if (pi < 0.0) throw std::invalid_argument("replicator_field: negative probability");
    sum += pi;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("replicator_field: p is not a simplex");

  std::vector<double> xi(p.size(), 0.0);
  for (size_t i = 0; i < p.size(); ++i) {
    double acc = 0.0;
    for (size_t m = 0; m < p.size(); ++m) {
      if (m == i) continue;
      acc += p[m] * (losses[m] - q[i] * losses[i]);
    }
    xi[i] = p[i] * acc;
  }
  return xi;
}

}  // namespace cobandit::theory
