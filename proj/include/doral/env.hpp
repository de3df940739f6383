#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doral/rng.hpp"

namespace doral {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Invalid environment/config parameters.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A pull was requested with less remaining budget than the arm costs.
class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arm-dependent feedback delay, supported on positive integers (rounds).
// Pareto draws are continuous and rounded up, which keeps D >= x_min.
struct DelayDist {
  enum class Kind { Geometric, Pareto };

  Kind kind = Kind::Geometric;
  double geometric_mean = 1.0;  // success probability is 1 / mean
  double pareto_xmin = 1.0;
  double pareto_shape = 2.0;

  static DelayDist geometric(double mean) {
    DelayDist d;
    d.kind = Kind::Geometric;
    d.geometric_mean = mean;
    return d;
  }

  static DelayDist pareto(double xmin, double shape) {
    DelayDist d;
    d.kind = Kind::Pareto;
    d.pareto_xmin = xmin;
    d.pareto_shape = shape;
    return d;
  }

  void validate() const {
    if (kind == Kind::Geometric) {
      if (!(geometric_mean >= 1.0) || !std::isfinite(geometric_mean))
        throw ModelError("delay: geometric mean must be >= 1");
    } else {
      if (!(pareto_xmin > 0.0) || !std::isfinite(pareto_xmin))
        throw ModelError("delay: pareto x_min must be > 0");
      if (!(pareto_shape > 0.0) || !std::isfinite(pareto_shape))
        throw ModelError("delay: pareto shape must be > 0");
    }
  }

  // Mean delay; +inf for Pareto with shape <= 1.
  double mean() const {
    if (kind == Kind::Geometric) return geometric_mean;
    if (pareto_shape <= 1.0) return std::numeric_limits<double>::infinity();
    return pareto_shape * pareto_xmin / (pareto_shape - 1.0);
  }

  // P(D <= m). Geometric: 1 - (1 - 1/mean)^m. Pareto: 0 below x_min,
  // else 1 - (x_min/m)^shape.
  double cdf(double m) const {
    if (m <= 0.0) return 0.0;
    if (kind == Kind::Geometric) {
      const double q = 1.0 - 1.0 / geometric_mean;
      if (q <= 0.0) return 1.0;
      return 1.0 - std::pow(q, m);
    }
    if (m < pareto_xmin) return 0.0;
    return 1.0 - std::pow(pareto_xmin / m, pareto_shape);
  }

  long sample(Rng& rng) const {
    if (kind == Kind::Geometric) {
      const double p = 1.0 / geometric_mean;
      if (p >= 1.0) return 1;
      const double u = rng.uniform();
      const double k = std::ceil(std::log1p(-u) / std::log1p(-p));
      return std::max(1L, static_cast<long>(k));
    }
    const double u = rng.uniform_pos();
    const double x = pareto_xmin * std::pow(u, -1.0 / pareto_shape);
    return static_cast<long>(std::ceil(x));
  }
};

// One selectable action: feature vector, fixed cost, delay distribution.
struct ArmSpec {
  int id = 0;
  Vector features;
  double cost = 1.0;
  DelayDist delay;

  void validate(Eigen::Index dim) const {
    if (features.size() != dim)
      throw ModelError("arm " + std::to_string(id) + ": feature dimension mismatch");
    if (!features.allFinite())
      throw ModelError("arm " + std::to_string(id) + ": non-finite feature");
    if (!(cost >= 0.0) || !std::isfinite(cost))
      throw ModelError("arm " + std::to_string(id) + ": cost must be >= 0");
    delay.validate();
  }
};

// The synthetic world: context distribution, per-context parameters, arms,
// reward noise, horizon and budget. Immutable after validate(); safe to share
// read-only across replications.
struct EnvModel {
  Vector pi;                   // context probabilities, sum to 1
  std::vector<Vector> thetas;  // one parameter vector per context
  std::vector<ArmSpec> arms;
  double noise_sigma = 0.1;
  long horizon = 0;
  double budget = 0.0;

  int num_contexts() const { return static_cast<int>(pi.size()); }
  int num_arms() const { return static_cast<int>(arms.size()); }
  Eigen::Index dim() const { return thetas.empty() ? 0 : thetas.front().size(); }

  double expected_reward(int context, int arm) const {
    return thetas[static_cast<std::size_t>(context)].dot(
        arms[static_cast<std::size_t>(arm)].features);
  }

  double min_cost() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& a : arms) m = std::min(m, a.cost);
    return m;
  }

  void validate() const {
    if (pi.size() == 0) throw ModelError("pi: at least one context required");
    if (arms.empty()) throw ModelError("arms: at least one arm required");
    if (thetas.size() != static_cast<std::size_t>(pi.size()))
      throw ModelError("thetas: need one parameter vector per context");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < pi.size(); ++j) {
      if (!(pi[j] >= 0.0)) throw ModelError("pi: weights must be >= 0");
      sum += pi[j];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ModelError("pi: weights must sum to 1");
    const Eigen::Index d = dim();
    for (const auto& th : thetas) {
      if (th.size() != d) throw ModelError("thetas: inconsistent dimension");
      if (!th.allFinite()) throw ModelError("thetas: non-finite entry");
    }
    for (const auto& a : arms) {
      a.validate(d);
      if (!(a.delay.mean() <= budget / 4.0))
        throw ModelError("arm " + std::to_string(a.id) +
                         ": mean delay exceeds budget/4");
    }
    if (!(noise_sigma >= 0.0)) throw ModelError("noise_sigma: must be >= 0");
    if (horizon <= 0) throw ModelError("horizon: must be positive");
    if (!(budget > 0.0)) throw ModelError("budget: must be positive");
  }
};

// A pulled-arm record waiting in the delay queue until its arrival round.
struct PendingFeedback {
  long decision_round = 0;
  int arm = 0;
  int context = 0;
  double reward = 0.0;           // realized (noisy) reward, the learning signal
  double expected_reward = 0.0;  // <theta_j, f_a>, used for payoff accounting
  long delay = 0;
  long arrival_round = 0;
};

struct StepResult {
  double spend = 0.0;
  std::optional<PendingFeedback> enqueued;
};

// Mutable per-run world state: RNG stream, budget ledger and delay queue.
class Environment {
 public:
  Environment(const EnvModel& model, std::uint64_t seed)
      : model_(&model), rng_(seed) {}

  const EnvModel& model() const { return *model_; }
  Rng& rng() { return rng_; }

  int sample_context() { return rng_.categorical(model_->pi); }

  long sample_delay(const ArmSpec& arm) { return arm.delay.sample(rng_); }

  // Noisy reward draw for (context, arm); sigma = 0 is exactly the inner
  // product. Consumes no randomness when sigma = 0.
  double realized_reward(int context, const ArmSpec& arm) {
    const double mean = model_->thetas[static_cast<std::size_t>(context)].dot(arm.features);
    if (model_->noise_sigma == 0.0) return mean;
    return mean + model_->noise_sigma * rng_.gaussian();
  }

  double spent() const { return spent_; }
  double remaining() const { return model_->budget - spent_; }
  std::size_t queue_size() const { return queue_.size(); }

  // Plays one action at round t under the given context. Skips (no arm) spend
  // nothing and queue nothing. Draw order per pull: reward noise, then delay.
  StepResult step(long t, int context, std::optional<int> arm) {
    if (!arm) return {};
    const ArmSpec& spec = model_->arms[static_cast<std::size_t>(*arm)];
    if (spec.cost > remaining())
      throw BudgetExhausted("pull of arm " + std::to_string(*arm) + " at round " +
                            std::to_string(t) + " exceeds remaining budget");
    PendingFeedback fb;
    fb.decision_round = t;
    fb.arm = *arm;
    fb.context = context;
    fb.expected_reward = model_->expected_reward(context, *arm);
    fb.reward = realized_reward(context, spec);
    fb.delay = sample_delay(spec);
    fb.arrival_round = t + fb.delay;
    spent_ += spec.cost;
    queue_.push(Entry{fb, seq_++});
    return {spec.cost, fb};
  }

  // Returns and removes every queued record with arrival_round <= t. Ties in
  // arrival round come out in enqueue order.
  std::vector<PendingFeedback> pop_due(long t) {
    std::vector<PendingFeedback> due;
    while (!queue_.empty() && queue_.top().fb.arrival_round <= t) {
      due.push_back(queue_.top().fb);
      queue_.pop();
    }
    return due;
  }

 private:
  struct Entry {
    PendingFeedback fb;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.fb.arrival_round != b.fb.arrival_round)
        return a.fb.arrival_round > b.fb.arrival_round;
      return a.seq > b.seq;
    }
  };

  const EnvModel* model_;
  Rng rng_;
  double spent_ = 0.0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
};

}  // namespace doral
