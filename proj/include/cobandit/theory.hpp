#pragma once

#include <vector>

namespace cobandit::theory {

// Parameters of the closed-form analysis: k networks, maximum feedback
// delay d, horizon T, direct-hearing probability b0, n devices, and an
// optional learning rate (defaults to the optimizing eta_star).
struct TheoryInputs {
  int k = 0;
  int d = 0;
  long long T = 0;
  double b0 = 0.0;
  int n = 0;
  double eta = -1.0;  // < 0 means "use eta_star"
};

struct RegretBound {
  double eta_star = 0.0;
  double bound = 0.0;
};

// Upper bound on expected weak regret,
//   2e * sqrt((d+1) * ln k * T / max{1/k, b0}) + d,
// together with the learning rate that attains it,
//   eta* = sqrt(max{1/k, b0} * ln k / (e^2 (d+1) T)).
// Preconditions: T > (d+1) k ln k and b0 in [0, 1 - 1/e].
RegretBound regret_bound(const TheoryInputs& inputs);

// Probability of learning an observation within a delay of t_delay slots
// when feedback is forwarded:
//   b_t = 1 - prod_{t'=0}^{t} (1 - min{(n-2)(n-3)...(n-1-t') * b0^(t'+1), 1}).
// The falling product saturates once t' exceeds n-2 (all paths counted).
double hear_probability(int n, double b0, int t_delay);

// Replicator field xi_i = p_i * sum_{m != i} p_m * (l_m - q_i * l_i).
// Numeric diagnostic only; with q = 1 the field conserves total probability.
std::vector<double> replicator_field(const std::vector<double>& p,
                                     const std::vector<double>& losses,
                                     const std::vector<double>& q);

}  // namespace cobandit::theory
