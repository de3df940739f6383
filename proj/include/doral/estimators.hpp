#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace doral {

class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotYetResolved : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bias term of the confidence radius: Plugin substitutes the median-of-means
// estimate for the unknown true mean delay; WorstCase uses budget/2.
enum class RadiusMode { Plugin, WorstCase };

// Number of median-of-means baskets h and the nominal basket size N for a
// pull count T_a at confidence delta.
struct BasketShape {
  int count = 1;       // h
  std::size_t size = 0;  // N = floor(T_a / h)
};

inline BasketShape basket_count(std::size_t pulls, double delta) {
  if (pulls < 2)
    throw InsufficientSamples("basket_count: need at least 2 pulls, have " +
                              std::to_string(pulls));
  if (!(delta > 0.0) || !(delta < 1.0 + 1e-12))
    throw InvalidParameter("basket_count: delta must lie in (0, 1]");
  const double by_delta = std::floor(8.0 * std::log(std::exp(0.125) / delta));
  const double by_pulls = std::floor(static_cast<double>(pulls) / 2.0);
  int h = static_cast<int>(std::max(1.0, std::min(by_delta, by_pulls)));
  return {h, pulls / static_cast<std::size_t>(h)};
}

// Per-arm delay observations: the pull log and the subset of delays returned
// so far, kept in pull order. Some pulls may never return inside a run.
class DelayStats {
 public:
  DelayStats() = default;
  DelayStats(int arm, double alpha, double delta, double budget)
      : arm_(arm), alpha_(alpha), delta_(delta), budget_(budget) {}

  int arm() const { return arm_; }
  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  double budget() const { return budget_; }

  std::size_t pulls() const { return pull_rounds_.size(); }

  std::size_t record_pull(long round) {
    pull_rounds_.push_back(round);
    delays_.push_back(-1);
    dirty_ = true;
    return pull_rounds_.size() - 1;
  }

  // Attach a returned delay to the pull made at `round`. Rounds identify
  // pulls uniquely (one pull per arm per round).
  void record_return(long round, long delay) {
    const auto it = std::lower_bound(pull_rounds_.begin(), pull_rounds_.end(), round);
    if (it == pull_rounds_.end() || *it != round)
      throw InvalidParameter("record_return: no pull at round " + std::to_string(round));
    record_return_at(static_cast<std::size_t>(it - pull_rounds_.begin()), delay);
  }

  void record_return_at(std::size_t pull_index, long delay) {
    if (pull_index >= delays_.size())
      throw InvalidParameter("record_return: pull index out of range");
    if (delay < 1) throw InvalidParameter("record_return: delay must be >= 1");
    delays_[pull_index] = delay;
    dirty_ = true;
  }

  long pull_round(std::size_t pull_index) const { return pull_rounds_[pull_index]; }
  bool returned(std::size_t pull_index) const { return delays_[pull_index] >= 0; }
  long delay_at(std::size_t pull_index) const { return delays_[pull_index]; }

  // Returned delays in pull order.
  const std::vector<double>& observed() const {
    refresh();
    return observed_;
  }

  std::size_t observed_count() const {
    refresh();
    return observed_.size();
  }

  // Prefix sums of observed(): prefix()[k] = sum of first k values.
  const std::vector<double>& observed_prefix() const {
    refresh();
    return prefix_;
  }

 private:
  void refresh() const {
    if (!dirty_) return;
    observed_.clear();
    prefix_.assign(1, 0.0);
    for (long d : delays_) {
      if (d < 0) continue;
      observed_.push_back(static_cast<double>(d));
      prefix_.push_back(prefix_.back() + static_cast<double>(d));
    }
    dirty_ = false;
  }

  int arm_ = 0;
  double alpha_ = 1.0;
  double delta_ = 0.05;
  double budget_ = 0.0;
  std::vector<long> pull_rounds_;
  std::vector<long> delays_;  // -1 while pending
  mutable bool dirty_ = false;
  mutable std::vector<double> observed_;
  mutable std::vector<double> prefix_;
};

// Median of h disjoint basket means over the returned delays, baskets filled
// in pull order; the surplus beyond h*N values is ignored. Even h averages
// the two middle basket means.
inline double median_of_means(const DelayStats& stats) {
  const BasketShape shape = basket_count(stats.pulls(), stats.delta());
  const std::size_t h = static_cast<std::size_t>(shape.count);
  const auto& prefix = stats.observed_prefix();
  const std::size_t observed = prefix.size() - 1;
  if (observed < h)
    throw InsufficientSamples("median_of_means: " + std::to_string(observed) +
                              " returned samples cannot fill " + std::to_string(h) +
                              " baskets");
  const std::size_t n = observed / h;
  std::vector<double> means(h);
  for (std::size_t l = 0; l < h; ++l)
    means[l] = (prefix[(l + 1) * n] - prefix[l * n]) / static_cast<double>(n);
  std::sort(means.begin(), means.end());
  if (h % 2 == 1) return means[h / 2];
  return 0.5 * (means[h / 2 - 1] + means[h / 2]);
}

// Confidence radius around the median-of-means delay estimate:
//   sqrt(2 log(16 / (1 - B^-alpha)) / T_a) + bias * T_a^-(min(alpha, 1/2))
// with bias = 2 d_M (plugin) or B/2 (worst case).
inline double robust_radius(std::size_t pulls, double d_m, double alpha, double budget,
                            RadiusMode mode = RadiusMode::Plugin) {
  if (pulls < 1) throw InsufficientSamples("robust_radius: need at least one pull");
  if (!(budget > 1.0))
    throw InvalidParameter("robust_radius: budget must exceed 1 so that B^-alpha < 1");
  if (!(alpha > 0.0)) throw InvalidParameter("robust_radius: alpha must be > 0");
  const double t = static_cast<double>(pulls);
  const double tail = std::pow(budget, -alpha);
  const double dev = std::sqrt(2.0 * std::log(16.0 / (1.0 - tail)) / t);
  const double bias_scale = (mode == RadiusMode::Plugin) ? 2.0 * d_m : budget / 2.0;
  return dev + bias_scale * std::pow(t, -std::min(alpha, 0.5));
}

struct DelayBounds {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

// Delayed robust confidence interval around d_M. The lower bound is clamped
// at zero; delays are positive.
inline DelayBounds robust_bounds(const DelayStats& stats, double d_m,
                                 RadiusMode mode = RadiusMode::Plugin) {
  const double r = robust_radius(stats.pulls(), d_m, stats.alpha(), stats.budget(), mode);
  return {std::max(0.0, d_m - r), d_m + r};
}

// Plain arithmetic mean of the returned delays.
inline double delayed_empirical_mean(const DelayStats& stats) {
  const auto& prefix = stats.observed_prefix();
  const std::size_t n = prefix.size() - 1;
  if (n == 0) throw InsufficientSamples("delayed_empirical_mean: no returned samples");
  return prefix.back() / static_cast<double>(n);
}

// Fraction of pulls whose feedback returned within m rounds. Requires every
// pull to be at least m rounds old at `now`, so a missing return proves
// D > m; callers must have ingested all arrivals up to `now`.
inline double estimate_tau(const DelayStats& stats, double m, long now) {
  const std::size_t n = stats.pulls();
  if (n == 0) throw InsufficientSamples("estimate_tau: no pulls");
  std::size_t within = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<double>(now - stats.pull_round(i)) < m)
      throw NotYetResolved("estimate_tau: pull at round " +
                           std::to_string(stats.pull_round(i)) +
                           " is younger than the cut-off window");
    if (stats.returned(i) && static_cast<double>(stats.delay_at(i)) <= m) ++within;
  }
  return static_cast<double>(within) / static_cast<double>(n);
}

}  // namespace doral
