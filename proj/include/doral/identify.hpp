#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "doral/env.hpp"
#include "doral/estimators.hpp"

namespace doral {

// The printed rule accepts on confidently-larger delay; the responsive rule
// (default) accepts on confidently-smaller delay, matching a top-A' race on
// responsiveness.
enum class AcceptanceRule { Responsive, AsPrinted };

// Which arms the cut-off maximises over.
enum class CutoffScope { Accepted, All };

struct RaceConfig {
  int target = 1;  // number of arms to accept
  double delta = 0.01;
  double alpha = 2.0;
  double budget_cap = 0.0;  // identification spend cap
  RadiusMode radius_mode = RadiusMode::Plugin;
  AcceptanceRule acceptance_rule = AcceptanceRule::Responsive;
  CutoffScope cutoff_scope = CutoffScope::Accepted;
};

// Snapshot of one live arm's delay interval. Arms without enough returned
// feedback for a median-of-means estimate are patient: bounds (0, inf), no
// accept or reject decision applies to them.
struct ArmBounds {
  int arm = 0;
  double median = std::numeric_limits<double>::quiet_NaN();
  DelayBounds bounds;
  bool patient = true;
};

inline ArmBounds delay_interval(const DelayStats& stats, RadiusMode mode) {
  ArmBounds out;
  out.arm = stats.arm();
  try {
    out.median = median_of_means(stats);
    out.bounds = robust_bounds(stats, out.median, mode);
    out.patient = false;
  } catch (const InsufficientSamples&) {
  }
  return out;
}

enum class RaceMark { None, Accept, Reject };

struct RaceDecision {
  std::vector<int> accept;  // most confident (smallest UCB) first
  std::vector<int> reject;
};

// One race round's accept/reject rule over a snapshot of the live arms.
// With k = target - accepted slots open and n live arms:
//   accept a when it sits confidently below at least n - k others,
//   reject a when it sits confidently above at least k others.
// Accepts are capped to the open slots; rejects are capped so that at least
// k live arms always remain. The two conditions cannot both hold for one
// arm: together they would need n confident separations against n - 1
// opponents.
inline RaceDecision race_decisions(const std::vector<ArmBounds>& live,
                                   std::size_t accepted_count, std::size_t target,
                                   AcceptanceRule rule = AcceptanceRule::Responsive) {
  RaceDecision out;
  if (accepted_count >= target) return out;
  const std::size_t slots = target - accepted_count;
  const std::size_t n = live.size();

  struct Candidate {
    int arm;
    double key;
  };
  std::vector<Candidate> accepts, rejects;
  for (std::size_t i = 0; i < n; ++i) {
    if (live[i].patient) continue;
    std::size_t below = 0, above = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      if (live[i].bounds.upper < live[k].bounds.lower) ++below;
      if (live[i].bounds.lower > live[k].bounds.upper) ++above;
    }
    // Responsive: accept confidently-fast arms, reject confidently-slow ones.
    // AsPrinted: the source algorithm's literal test (strict, no rejections),
    // which promotes confidently-slow arms; kept for auditability.
    const bool accept = (rule == AcceptanceRule::Responsive) ? below + slots >= n
                                                             : above > slots;
    const bool reject = (rule == AcceptanceRule::Responsive) && above >= slots;
    if (accept)
      accepts.push_back({live[i].arm, live[i].bounds.upper});
    else if (reject)
      rejects.push_back({live[i].arm, live[i].bounds.lower});
  }

  std::sort(accepts.begin(), accepts.end(), [](const Candidate& a, const Candidate& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.arm < b.arm;
  });
  std::sort(rejects.begin(), rejects.end(), [](const Candidate& a, const Candidate& b) {
    if (a.key != b.key) return a.key > b.key;
    return a.arm < b.arm;
  });
  if (accepts.size() > slots) accepts.resize(slots);
  // keep enough live arms to fill all slots
  const std::size_t reject_cap = n > slots ? n - slots : 0;
  if (rejects.size() > reject_cap) rejects.resize(reject_cap);
  for (const auto& c : accepts) out.accept.push_back(c.arm);
  for (const auto& c : rejects) out.reject.push_back(c.arm);
  return out;
}

struct RacePull {
  long round = 0;
  int context = 0;
  int arm = 0;
  double reward = 0.0;           // realized (noisy) reward
  double expected_reward = 0.0;  // true mean reward for that context/arm
  long delay = 0;
};

struct RaceTraceRow {
  long round = 0;  // race round index (one full pass over the live arms)
  int arm = 0;
  std::size_t pulls = 0;
  std::size_t returns = 0;
  double median = std::numeric_limits<double>::quiet_NaN();
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  RaceMark decision = RaceMark::None;
};

struct RaceResult {
  std::vector<int> accepted;  // acceptance order
  std::vector<int> rejected;
  std::vector<int> survivors;  // live but never decided (excluded from stage 2)
  double cutoff = std::numeric_limits<double>::infinity();
  double spend = 0.0;
  long next_round = 0;  // first environment round not consumed by the race
  long rounds = 0;      // race rounds completed
  std::vector<DelayStats> stats;
  std::vector<RacePull> pulls;            // in pull order
  std::vector<PendingFeedback> arrivals;  // feedback drained during the race
  std::vector<RaceTraceRow> trace;
  bool complete = false;
};

class IdentificationFailed : public std::runtime_error {
 public:
  IdentificationFailed(const std::string& msg, RaceResult partial)
      : std::runtime_error(msg), partial_(std::move(partial)) {}
  const RaceResult& partial() const { return partial_; }

 private:
  RaceResult partial_;
};

namespace detail {
inline void finalize_cutoff(RaceResult& res, const RaceConfig& cfg) {
  double m = -std::numeric_limits<double>::infinity();
  auto fold = [&](int a) {
    m = std::max(m, delay_interval(res.stats[a], cfg.radius_mode).bounds.upper);
  };
  if (cfg.cutoff_scope == CutoffScope::Accepted) {
    for (int a : res.accepted) fold(a);
  } else {
    for (std::size_t a = 0; a < res.stats.size(); ++a) fold(static_cast<int>(a));
  }
  res.cutoff = res.accepted.empty() && cfg.cutoff_scope == CutoffScope::Accepted
                   ? std::numeric_limits<double>::infinity()
                   : m;
}
}  // namespace detail

// Races the arms on mean delay until `target` arms are accepted. Each race
// round pulls every live arm once (one environment round per pull), drains
// due feedback, then applies race_decisions to fresh bounds. Throws
// IdentificationFailed, carrying everything gathered so far, when the next
// round would overrun the identification budget cap.
inline RaceResult run_race(Environment& env, const RaceConfig& cfg, long t_start = 0) {
  const EnvModel& model = env.model();
  const int num_arms = static_cast<int>(model.arms.size());
  if (cfg.target < 1 || cfg.target > num_arms)
    throw InvalidParameter("run_race: target must lie in [1, number of arms]");
  if (cfg.budget_cap > model.budget + 1e-9)
    throw InvalidParameter("run_race: identification cap exceeds the run budget");

  RaceResult res;
  res.stats.reserve(num_arms);
  for (int a = 0; a < num_arms; ++a)
    res.stats.emplace_back(a, cfg.alpha, cfg.delta, model.budget);

  std::vector<int> live(num_arms);
  for (int a = 0; a < num_arms; ++a) live[a] = a;

  long t = t_start;
  auto drain = [&](long now) {
    for (auto& fb : env.pop_due(now)) {
      res.stats[fb.arm].record_return(fb.decision_round, fb.delay);
      res.arrivals.push_back(fb);
    }
  };

  while (res.accepted.size() < static_cast<std::size_t>(cfg.target)) {
    double round_cost = 0.0;
    for (int a : live) round_cost += model.arms[a].cost;
    if (res.spend + round_cost > cfg.budget_cap + 1e-9) {
      res.survivors = live;
      res.next_round = t;
      detail::finalize_cutoff(res, cfg);
      throw IdentificationFailed(
          "identification budget exhausted after " + std::to_string(res.rounds) +
              " race rounds with " + std::to_string(res.accepted.size()) + " of " +
              std::to_string(cfg.target) + " arms accepted",
          std::move(res));
    }

    for (int a : live) {
      drain(t);
      const int j = env.sample_context();
      const StepResult sr = env.step(t, j, a);
      res.spend += sr.spend;
      res.stats[a].record_pull(t);
      res.pulls.push_back({t, j, a, sr.enqueued->reward, sr.enqueued->expected_reward,
                           sr.enqueued->delay});
      ++t;
    }
    drain(t);

    std::vector<ArmBounds> snapshot;
    snapshot.reserve(live.size());
    for (int a : live) snapshot.push_back(delay_interval(res.stats[a], cfg.radius_mode));
    const RaceDecision dec =
        race_decisions(snapshot, res.accepted.size(), cfg.target, cfg.acceptance_rule);

    for (const auto& b : snapshot) {
      RaceMark mark = RaceMark::None;
      if (std::find(dec.accept.begin(), dec.accept.end(), b.arm) != dec.accept.end())
        mark = RaceMark::Accept;
      else if (std::find(dec.reject.begin(), dec.reject.end(), b.arm) != dec.reject.end())
        mark = RaceMark::Reject;
      res.trace.push_back({res.rounds, b.arm, res.stats[b.arm].pulls(),
                           res.stats[b.arm].observed_count(), b.median, b.bounds.lower,
                           b.bounds.upper, mark});
    }

    for (int a : dec.accept) res.accepted.push_back(a);
    for (int a : dec.reject) res.rejected.push_back(a);
    if (!dec.accept.empty() || !dec.reject.empty()) {
      live.erase(std::remove_if(live.begin(), live.end(),
                                [&](int a) {
                                  return std::find(dec.accept.begin(), dec.accept.end(),
                                                   a) != dec.accept.end() ||
                                         std::find(dec.reject.begin(), dec.reject.end(),
                                                   a) != dec.reject.end();
                                }),
                 live.end());
    }
    ++res.rounds;
  }

  res.survivors = live;
  res.next_round = t;
  detail::finalize_cutoff(res, cfg);
  res.complete = true;
  return res;
}

}  // namespace doral
