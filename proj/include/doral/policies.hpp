#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "doral/allocation.hpp"
#include "doral/env.hpp"
#include "doral/estimators.hpp"
#include "doral/identify.hpp"
#include "doral/linear.hpp"

namespace doral {

enum class PolicyKind { Doral, DLinUcb, Random, Dalp };

// Where the per-arm responsiveness weights tau come from: the true delay
// CDF at m, an estimate from resolved identification pulls, or all-ones.
enum class TauMode { Given, Estimated, One };

// Learned takes the cut-off from the identification race; Fixed uses the
// configured m (always the case for the baselines).
enum class CutoffMode { Learned, Fixed };

inline const char* policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::Doral: return "doral";
    case PolicyKind::DLinUcb: return "dlinucb";
    case PolicyKind::Random: return "random";
    case PolicyKind::Dalp: return "dalp";
  }
  return "?";
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::Doral;
  double m = 500.0;  // cut-off for the baselines, and for CutoffMode::Fixed
  int target = 0;    // arms to accept in stage 1; 0 means all arms
  double delta = 0.01;
  double alpha = 2.0;
  double lambda = 1.0;
  double id_budget_fraction = 0.25;  // identification spend cap, as a share of B
  TauMode tau_mode = TauMode::Given;
  RatioMode ratio_mode = RatioMode::Remaining;
  // forces the LP serving ratio to a constant; NaN means use the adaptive rule
  double rho_override = std::numeric_limits<double>::quiet_NaN();
  RadiusMode radius_mode = RadiusMode::Plugin;
  AcceptanceRule acceptance_rule = AcceptanceRule::Responsive;
  CutoffScope cutoff_scope = CutoffScope::Accepted;
  CutoffMode cutoff_mode = CutoffMode::Learned;

  void validate(const EnvModel& model) const {
    if (!(m > 0.0)) throw ConfigError("policy: m must be > 0");
    if (target < 0 || target > model.num_arms())
      throw ConfigError("policy: target must lie in [0, number of arms]");
    if (!(delta > 0.0) || !(delta < 1.0 + 1e-12))
      throw ConfigError("policy: delta must lie in (0, 1]");
    if (!(alpha > 0.0)) throw ConfigError("policy: alpha must be > 0");
    if (!(lambda > 0.0)) throw ConfigError("policy: lambda must be > 0");
    if (!(id_budget_fraction > 0.0) || !(id_budget_fraction <= 1.0))
      throw ConfigError("policy: id_budget_fraction must lie in (0, 1]");
    if (!std::isnan(rho_override) && (rho_override < 0.0 || rho_override > 1.0))
      throw ConfigError("policy: rho_override must lie in [0, 1]");
  }
};

struct RoundRecord {
  long t = 0;
  int context = 0;
  int action = -1;  // arm index, or -1 for a skip
  double spend = 0.0;
  double cum_reward = 0.0;
  double cum_regret = 0.0;
  double remaining = 0.0;
};

struct StageOneSummary {
  std::vector<int> accepted;
  double cutoff = 0.0;
  double spend = 0.0;  // identification spend
  long rounds = 0;     // decision rounds consumed (= identification pulls)
  long sweeps = 0;     // full passes over the live arms
  bool complete = true;
};

struct RunMetrics {
  std::vector<RoundRecord> rounds;
  std::optional<StageOneSummary> stage1;
  std::vector<RaceTraceRow> race_trace;
  double m_used = 0.0;
  double total_spend = 0.0;
  double final_reward = 0.0;
  double final_regret = 0.0;
  long pull_count = 0;
};

// Identification ran out of budget; carries whatever the run produced.
class PolicyRunFailed : public std::runtime_error {
 public:
  PolicyRunFailed(const std::string& msg, RunMetrics partial)
      : std::runtime_error(msg), partial_(std::move(partial)) {}
  const RunMetrics& partial() const { return partial_; }

 private:
  RunMetrics partial_;
};

// True delayed-payoff weight: the chance that arm a's feedback lands within
// m rounds of the pull.
inline double true_tau(const ArmSpec& arm, double m) { return arm.delay.cdf(m); }

// Best achievable expected delayed payoff per context, over all arms with
// true parameters. The hindsight comparator for regret.
inline std::vector<double> oracle_payoffs(const EnvModel& model, double m) {
  std::vector<double> out(static_cast<std::size_t>(model.num_contexts()), 0.0);
  for (int j = 0; j < model.num_contexts(); ++j) {
    double best = 0.0;
    for (int a = 0; a < model.num_arms(); ++a) {
      const double v = true_tau(model.arms[static_cast<std::size_t>(a)], m) *
                       model.expected_reward(j, a);
      best = std::max(best, v);
    }
    out[static_cast<std::size_t>(j)] = best;
  }
  return out;
}

// Recomputes the per-round regret series from a round trace: cumulative
// oracle payoff for the realized contexts minus cumulative counted reward.
inline std::vector<double> oracle_and_regret(const std::vector<RoundRecord>& rounds,
                                             const EnvModel& model, double m) {
  const auto oracle = oracle_payoffs(model, m);
  std::vector<double> regret;
  regret.reserve(rounds.size());
  double cum_oracle = 0.0;
  for (const auto& r : rounds) {
    cum_oracle += oracle[static_cast<std::size_t>(r.context)];
    regret.push_back(cum_oracle - r.cum_reward);
  }
  return regret;
}

namespace detail {

// Cumulative accounting shared by every policy. A pull's payoff counts at
// its decision round when the (already drawn) delay fits both the cut-off
// and the remaining horizon; the learner itself never sees this.
struct Ledger {
  const std::vector<double>* oracle = nullptr;
  double budget = 0.0;
  double horizon_m = 0.0;  // cut-off used for the counting window
  long horizon = 0;
  double cum_reward = 0.0;
  double cum_oracle = 0.0;
  double spend = 0.0;
  long pulls = 0;

  double counted(const PendingFeedback& fb) const {
    const double window =
        std::min(horizon_m, static_cast<double>(horizon - fb.decision_round));
    return static_cast<double>(fb.delay) <= window ? fb.expected_reward : 0.0;
  }

  void record(std::vector<RoundRecord>& out, long t, int context, int action,
              double cost, double counted_reward) {
    cum_oracle += (*oracle)[static_cast<std::size_t>(context)];
    cum_reward += counted_reward;
    spend += cost;
    if (action >= 0) ++pulls;
    out.push_back({t, context, action, cost, cum_reward, cum_oracle - cum_reward,
                   budget - spend});
  }
};

// Stage-2 engine: LP-gated allocation over a candidate arm set with delayed
// LinUCB scores. DORAL runs it after the race; D-ALP runs it directly over
// all arms with tau = 1.
struct StageTwo {
  Environment& env;
  const PolicyConfig& cfg;
  double m;
  std::vector<int> candidates;  // ascending arm ids
  std::vector<double> taus;     // indexed by arm id
  long t_start = 0;
  std::vector<DelayStats>* race_stats = nullptr;  // for TauMode::Estimated
  const std::vector<RacePull>* race_pulls = nullptr;
  const std::vector<PendingFeedback>* race_arrivals = nullptr;

  void run(RunMetrics& metrics, Ledger& ledger) {
    const EnvModel& model = env.model();
    const int num_ctx = model.num_contexts();
    const int num_arms = model.num_arms();
    const std::size_t window =
        std::isfinite(m) ? static_cast<std::size_t>(std::ceil(m))
                         : static_cast<std::size_t>(model.horizon);

    std::vector<ContextRegressor> regs;
    regs.reserve(static_cast<std::size_t>(num_ctx));
    for (int j = 0; j < num_ctx; ++j) regs.emplace_back(model.dim(), cfg.lambda, window);

    // replay identification-era pulls and arrivals so stage 2 starts from
    // the same design matrices a single uninterrupted learner would hold
    if (race_pulls != nullptr) {
      for (const auto& p : *race_pulls)
        regs[static_cast<std::size_t>(p.context)].record_pull(
            model.arms[static_cast<std::size_t>(p.arm)].features);
    }
    if (race_arrivals != nullptr) {
      for (const auto& fb : *race_arrivals)
        regs[static_cast<std::size_t>(fb.context)].record_feedback(
            model.arms[static_cast<std::size_t>(fb.arm)].features, fb.reward,
            within_cutoff(fb));
    }

    // estimated-tau bookkeeping: each arm's identification pulls resolve
    // once the newest one is m rounds old
    std::vector<long> resolve_at(static_cast<std::size_t>(num_arms), -1);
    if (cfg.tau_mode == TauMode::Estimated && race_stats != nullptr &&
        std::isfinite(m)) {
      for (int a : candidates) {
        const auto& s = (*race_stats)[static_cast<std::size_t>(a)];
        if (s.pulls() > 0)
          resolve_at[static_cast<std::size_t>(a)] =
              s.pull_round(s.pulls() - 1) + static_cast<long>(std::ceil(m));
      }
    }

    std::vector<double> pi(static_cast<std::size_t>(num_ctx));
    for (int j = 0; j < num_ctx; ++j) pi[static_cast<std::size_t>(j)] = model.pi[j];

    double min_cost = std::numeric_limits<double>::infinity();
    for (int a : candidates)
      min_cost = std::min(min_cost, model.arms[static_cast<std::size_t>(a)].cost);

    // per-context caches of the best delayed arm, invalidated by regressor
    // updates and tau refreshes
    std::vector<std::uint64_t> eta_version(static_cast<std::size_t>(num_ctx), ~0ULL);
    std::vector<BestArm> eta_cache(static_cast<std::size_t>(num_ctx));
    std::uint64_t tau_version = 0;
    std::vector<std::uint64_t> eta_tau_version(static_cast<std::size_t>(num_ctx), ~0ULL);
    std::vector<double> scores(static_cast<std::size_t>(num_arms), 0.0);

    auto best_for = [&](int j) -> const BestArm& {
      const auto js = static_cast<std::size_t>(j);
      if (eta_version[js] != regs[js].version() || eta_tau_version[js] != tau_version) {
        for (int a : candidates)
          scores[static_cast<std::size_t>(a)] = regs[js].index(
              model.arms[static_cast<std::size_t>(a)].features, cfg.delta);
        eta_cache[js] = best_delayed_arm(candidates, scores, taus);
        eta_version[js] = regs[js].version();
        eta_tau_version[js] = tau_version;
      }
      return eta_cache[js];
    };

    LpInput lp;
    lp.pi = pi;
    lp.eta.resize(static_cast<std::size_t>(num_ctx));

    for (long t = t_start; t < model.horizon; ++t) {
      if (env.remaining() < min_cost - 1e-12) break;

      for (const auto& fb : env.pop_due(t)) {
        regs[static_cast<std::size_t>(fb.context)].record_feedback(
            model.arms[static_cast<std::size_t>(fb.arm)].features, fb.reward,
            within_cutoff(fb));
        if (race_stats != nullptr && fb.decision_round < t_start)
          (*race_stats)[static_cast<std::size_t>(fb.arm)].record_return(
              fb.decision_round, fb.delay);
      }

      if (cfg.tau_mode == TauMode::Estimated && race_stats != nullptr) {
        bool changed = false;
        for (int a : candidates) {
          auto& ra = resolve_at[static_cast<std::size_t>(a)];
          if (ra >= 0 && t >= ra) {
            taus[static_cast<std::size_t>(a)] =
                estimate_tau((*race_stats)[static_cast<std::size_t>(a)], m, t);
            ra = -1;
            changed = true;
          }
        }
        if (changed) ++tau_version;
      }

      const int j = env.sample_context();
      for (int c = 0; c < num_ctx; ++c)
        lp.eta[static_cast<std::size_t>(c)] = best_for(c).eta;
      lp.rho = std::isnan(cfg.rho_override)
                   ? adaptive_ratio(env.remaining(), t, model.horizon, cfg.ratio_mode)
                   : cfg.rho_override;
      const LpSolution sol = solve_lp(lp);

      const double p = sol.p[static_cast<std::size_t>(j)];
      bool serve = p >= 1.0;
      if (!serve && p > 0.0) serve = env.rng().uniform() < p;

      const int arm = best_for(j).arm;
      const double cost = model.arms[static_cast<std::size_t>(arm)].cost;
      if (serve && cost <= env.remaining() + 1e-12) {
        const StepResult sr = env.step(t, j, arm);
        regs[static_cast<std::size_t>(j)].record_pull(
            model.arms[static_cast<std::size_t>(arm)].features);
        ledger.record(metrics.rounds, t, j, arm, sr.spend, ledger.counted(*sr.enqueued));
      } else {
        ledger.record(metrics.rounds, t, j, -1, 0.0, 0.0);
      }
    }
  }

  bool within_cutoff(const PendingFeedback& fb) const {
    const double window =
        std::min(m, static_cast<double>(env.model().horizon - fb.decision_round));
    return static_cast<double>(fb.delay) <= window;
  }
};

// Greedy engine shared by D-LinUCB (always pulls) and Random D-LinUCB
// (pulls with probability remaining/initial budget).
inline void run_greedy(Environment& env, const PolicyConfig& cfg, bool gated,
                       RunMetrics& metrics, Ledger& ledger) {
  const EnvModel& model = env.model();
  const int num_ctx = model.num_contexts();
  const int num_arms = model.num_arms();
  const std::size_t window = static_cast<std::size_t>(std::ceil(cfg.m));

  std::vector<ContextRegressor> regs;
  regs.reserve(static_cast<std::size_t>(num_ctx));
  for (int j = 0; j < num_ctx; ++j) regs.emplace_back(model.dim(), cfg.lambda, window);

  const double min_cost = model.min_cost();

  for (long t = 0; t < model.horizon; ++t) {
    if (env.remaining() < min_cost - 1e-12) break;

    for (const auto& fb : env.pop_due(t)) {
      const double win =
          std::min(cfg.m, static_cast<double>(model.horizon - fb.decision_round));
      regs[static_cast<std::size_t>(fb.context)].record_feedback(
          model.arms[static_cast<std::size_t>(fb.arm)].features, fb.reward,
          static_cast<double>(fb.delay) <= win);
    }

    const int j = env.sample_context();

    if (gated) {
      const double rho = env.remaining() / model.budget;
      if (rho < 1.0 && env.rng().uniform() >= rho) {
        ledger.record(metrics.rounds, t, j, -1, 0.0, 0.0);
        continue;
      }
    }

    int arm = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_arms; ++a) {
      const double v = regs[static_cast<std::size_t>(j)].index(
          model.arms[static_cast<std::size_t>(a)].features, cfg.delta);
      if (v > best) {
        best = v;
        arm = a;
      }
    }

    const double cost = model.arms[static_cast<std::size_t>(arm)].cost;
    if (cost > env.remaining() + 1e-12) break;
    const StepResult sr = env.step(t, j, arm);
    regs[static_cast<std::size_t>(j)].record_pull(
        model.arms[static_cast<std::size_t>(arm)].features);
    ledger.record(metrics.rounds, t, j, arm, sr.spend, ledger.counted(*sr.enqueued));
  }
}

inline void finish(RunMetrics& metrics, const Ledger& ledger) {
  metrics.total_spend = ledger.spend;
  metrics.pull_count = ledger.pulls;
  metrics.final_reward = ledger.cum_reward;
  metrics.final_regret = ledger.cum_oracle - ledger.cum_reward;
}

}  // namespace detail

// Runs one policy to completion on a fresh environment. Throws
// PolicyRunFailed (with partial metrics) when DORAL's identification stage
// exhausts its budget cap before accepting the target arm count.
inline RunMetrics run_policy(Environment& env, const PolicyConfig& cfg) {
  const EnvModel& model = env.model();
  cfg.validate(model);
  const int num_arms = model.num_arms();

  RunMetrics metrics;
  detail::Ledger ledger;
  ledger.budget = model.budget;
  ledger.horizon = model.horizon;

  std::vector<int> all_arms(static_cast<std::size_t>(num_arms));
  for (int a = 0; a < num_arms; ++a) all_arms[static_cast<std::size_t>(a)] = a;

  auto tau_for = [&](const std::vector<int>& arms, double m) {
    std::vector<double> taus(static_cast<std::size_t>(num_arms), 1.0);
    if (cfg.kind == PolicyKind::Dalp || cfg.tau_mode == TauMode::One) return taus;
    if (cfg.tau_mode == TauMode::Given)
      for (int a : arms)
        taus[static_cast<std::size_t>(a)] =
            true_tau(model.arms[static_cast<std::size_t>(a)], m);
    return taus;  // Estimated starts at 1 and upgrades as pulls resolve
  };

  switch (cfg.kind) {
    case PolicyKind::DLinUcb:
    case PolicyKind::Random: {
      const std::vector<double> oracle = oracle_payoffs(model, cfg.m);
      ledger.oracle = &oracle;
      ledger.horizon_m = cfg.m;
      metrics.m_used = cfg.m;
      detail::run_greedy(env, cfg, cfg.kind == PolicyKind::Random, metrics, ledger);
      detail::finish(metrics, ledger);
      return metrics;
    }
    case PolicyKind::Dalp: {
      const std::vector<double> oracle = oracle_payoffs(model, cfg.m);
      ledger.oracle = &oracle;
      ledger.horizon_m = cfg.m;
      metrics.m_used = cfg.m;
      detail::StageTwo stage{env,      cfg, cfg.m, all_arms,
                             tau_for(all_arms, cfg.m)};
      stage.run(metrics, ledger);
      detail::finish(metrics, ledger);
      return metrics;
    }
    case PolicyKind::Doral: break;
  }

  const int target = cfg.target == 0 ? num_arms : cfg.target;

  // With every arm accepted a priori and a fixed cut-off, the race has
  // nothing to learn: skip it so the run degenerates exactly to D-ALP's
  // round structure.
  const bool skip_race = cfg.cutoff_mode == CutoffMode::Fixed && target == num_arms;

  RaceConfig rc;
  rc.target = target;
  rc.delta = cfg.delta;
  rc.alpha = cfg.alpha;
  rc.budget_cap = cfg.id_budget_fraction * model.budget;
  rc.radius_mode = cfg.radius_mode;
  rc.acceptance_rule = cfg.acceptance_rule;
  rc.cutoff_scope = cfg.cutoff_scope;

  auto account_race = [&](const RaceResult& race) {
    for (const auto& p : race.pulls) {
      PendingFeedback fb;
      fb.decision_round = p.round;
      fb.delay = p.delay;
      fb.expected_reward = p.expected_reward;
      ledger.record(metrics.rounds, p.round, p.context, p.arm,
                    model.arms[static_cast<std::size_t>(p.arm)].cost,
                    ledger.counted(fb));
    }
  };

  if (skip_race) {
    const std::vector<double> oracle = oracle_payoffs(model, cfg.m);
    ledger.oracle = &oracle;
    ledger.horizon_m = cfg.m;
    metrics.m_used = cfg.m;
    metrics.stage1 = StageOneSummary{all_arms, cfg.m, 0.0, 0, 0, true};
    detail::StageTwo stage{env,      cfg, cfg.m, all_arms,
                           tau_for(all_arms, cfg.m)};
    stage.run(metrics, ledger);
    detail::finish(metrics, ledger);
    return metrics;
  }

  RaceResult race;
  try {
    race = run_race(env, rc, 0);
  } catch (const IdentificationFailed& e) {
    const RaceResult& partial = e.partial();
    const double m =
        std::isfinite(partial.cutoff) && cfg.cutoff_mode == CutoffMode::Learned
            ? partial.cutoff
            : cfg.m;
    const std::vector<double> oracle = oracle_payoffs(model, m);
    ledger.oracle = &oracle;
    ledger.horizon_m = m;
    metrics.m_used = m;
    account_race(partial);
    metrics.stage1 =
        StageOneSummary{partial.accepted,
                        partial.cutoff,
                        partial.spend,
                        static_cast<long>(partial.pulls.size()),
                        partial.rounds,
                        false};
    metrics.race_trace = partial.trace;
    detail::finish(metrics, ledger);
    throw PolicyRunFailed(e.what(), std::move(metrics));
  }

  const double m = cfg.cutoff_mode == CutoffMode::Learned ? race.cutoff : cfg.m;
  const std::vector<double> oracle = oracle_payoffs(model, m);
  ledger.oracle = &oracle;
  ledger.horizon_m = m;
  metrics.m_used = m;
  metrics.stage1 = StageOneSummary{race.accepted,
                                   race.cutoff,
                                   race.spend,
                                   static_cast<long>(race.pulls.size()),
                                   race.rounds,
                                   true};
  metrics.race_trace = race.trace;
  account_race(race);

  std::vector<int> candidates = race.accepted;
  std::sort(candidates.begin(), candidates.end());

  detail::StageTwo stage{env,
                         cfg,
                         m,
                         candidates,
                         tau_for(candidates, m),
                         race.next_round,
                         &race.stats,
                         &race.pulls,
                         &race.arrivals};
  stage.run(metrics, ledger);
  detail::finish(metrics, ledger);
  return metrics;
}

}  // namespace doral
