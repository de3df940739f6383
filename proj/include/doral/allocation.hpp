#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "doral/env.hpp"

namespace doral {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-round budget ratio rule. Remaining spreads the remaining budget over
// the remaining rounds; AsPrinted is the literal b_t / t form.
enum class RatioMode { Remaining, AsPrinted };

// Input of the delay-oriented LP: context weights pi, per-context best
// expected delayed rewards eta, and the round's budget ratio rho.
struct LpInput {
  std::vector<double> pi;
  std::vector<double> eta;
  double rho = 0.0;
};

// Threshold-form optimum: serve the top-eta contexts fully, one context
// fractionally, skip the rest.
struct LpSolution {
  std::vector<int> order;  // context indices sorted by eta descending
  int threshold = 0;       // number of fully served ranks, j(rho)
  std::vector<double> p;   // per-context serve probability, original indexing
  double value = 0.0;      // optimal objective v(rho)
};

inline LpSolution solve_lp(const LpInput& input) {
  const std::size_t n = input.pi.size();
  if (input.eta.size() != n)
    throw ConfigError("solve_lp: pi and eta sizes differ");
  LpSolution sol;
  sol.order.resize(n);
  std::iota(sol.order.begin(), sol.order.end(), 0);
  std::stable_sort(sol.order.begin(), sol.order.end(), [&](int a, int b) {
    return input.eta[static_cast<std::size_t>(a)] > input.eta[static_cast<std::size_t>(b)];
  });
  sol.p.assign(n, 0.0);
  const double rho = std::max(0.0, input.rho);
  double served = 0.0;  // pi mass fully served so far
  std::size_t rank = 0;
  for (; rank < n; ++rank) {
    const auto j = static_cast<std::size_t>(sol.order[rank]);
    if (served + input.pi[j] > rho) break;
    served += input.pi[j];
    sol.p[j] = 1.0;
    sol.value += input.pi[j] * input.eta[j];
  }
  sol.threshold = static_cast<int>(rank);
  if (rank < n) {
    const auto j = static_cast<std::size_t>(sol.order[rank]);
    if (input.pi[j] > 0.0) {
      const double frac = std::min(1.0, (rho - served) / input.pi[j]);
      sol.p[j] = frac;
      sol.value += frac * input.pi[j] * input.eta[j];
    }
  }
  return sol;
}

// argmax over the candidate arms of tau_a * score_a, ties broken by lowest
// arm index. Returns the arm and the attained value eta*.
struct BestArm {
  int arm = -1;
  double eta = 0.0;
};

inline BestArm best_delayed_arm(const std::vector<int>& arms,
                                const std::vector<double>& scores,
                                const std::vector<double>& taus) {
  if (arms.empty())
    throw ConfigError("best_delayed_arm: empty candidate arm set");
  BestArm best;
  for (int a : arms) {
    const auto ai = static_cast<std::size_t>(a);
    const double v = taus[ai] * scores[ai];
    if (best.arm < 0 || v > best.eta) {
      best.arm = a;
      best.eta = v;
    }
  }
  return best;
}

// Budget ratio for round t of T with remaining budget b, clamped to [0, 1].
inline double adaptive_ratio(double remaining_budget, long t, long horizon,
                             RatioMode mode = RatioMode::Remaining) {
  if (t >= horizon) throw ConfigError("adaptive_ratio: t must be < horizon");
  double rho;
  if (mode == RatioMode::Remaining) {
    rho = remaining_budget / static_cast<double>(horizon - t);
  } else {
    rho = (t == 0) ? std::numeric_limits<double>::infinity()
                   : remaining_budget / static_cast<double>(t);
  }
  return std::clamp(rho, 0.0, 1.0);
}

}  // namespace doral
