#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "greenwave/agents.hpp"
#include "greenwave/rng.hpp"
#include "greenwave/scenario.hpp"
#include "greenwave/sim.hpp"

namespace greenwave {

// Linear interpolation from epsilon_start at episode 0 to epsilon_end at the
// final episode.
inline double epsilon_at(const TrainConfig& tc, int episode) {
  if (tc.episodes <= 1) return tc.epsilon_start;
  double f = static_cast<double>(episode) / static_cast<double>(tc.episodes - 1);
  f = std::clamp(f, 0.0, 1.0);
  return tc.epsilon_start + (tc.epsilon_end - tc.epsilon_start) * f;
}

// Restrict a full-layout observation ([lane blocks intersection-major, then
// phases]) to intersection m's 9-slot neighborhood. Slots are fixed width, so
// the output dimension is the same for every m; absent neighbors and short
// lane blocks read as zero.
inline std::vector<double> windowed_observation(const std::vector<double>& full,
                                                const ScenarioConfig& sc, int m,
                                                const NeighborWindow& window) {
  const int m_count = sc.intersection_count();
  if (static_cast<int>(window.slots.size()) != m_count)
    throw std::invalid_argument("windowed_observation: window does not match scenario");
  if (m < 0 || m >= m_count)
    throw std::out_of_range("windowed_observation: intersection index out of range");
  if (static_cast<int>(full.size()) != sc.total_lanes() + m_count)
    throw std::invalid_argument("windowed_observation: full observation has wrong size");
  std::vector<int> lane_offset(static_cast<std::size_t>(m_count));
  int off = 0;
  for (int i = 0; i < m_count; ++i) {
    lane_offset[static_cast<std::size_t>(i)] = off;
    off += sc.intersections[static_cast<std::size_t>(i)].lane_count();
  }
  const int max_lanes = sc.max_lanes();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(kWindowSlots * (max_lanes + 1)));
  const auto& slots = window.slots[static_cast<std::size_t>(m)];
  for (int s = 0; s < kWindowSlots; ++s) {
    const int j = slots[static_cast<std::size_t>(s)];
    const int lanes_j =
        j < 0 ? 0 : sc.intersections[static_cast<std::size_t>(j)].lane_count();
    for (int l = 0; l < max_lanes; ++l)
      out.push_back(l < lanes_j
                        ? full[static_cast<std::size_t>(lane_offset[static_cast<std::size_t>(j)] + l)]
                        : 0.0);
  }
  for (int s = 0; s < kWindowSlots; ++s) {
    const int j = slots[static_cast<std::size_t>(s)];
    out.push_back(j < 0 ? 0.0 : full[static_cast<std::size_t>(off + j)]);
  }
  return out;
}

// ---- rollout policy ---------------------------------------------------------

// Action source during data generation: with probability epsilon a uniform
// green in bounds, otherwise arbitration between the local and global actors
// with the decay index t.
class RolloutPolicy {
 public:
  RolloutPolicy(const AgentSet& agents, double epsilon, int decay_t, bool use_global,
                Rng* explore_rng)
      : agents_(agents),
        epsilon_(epsilon),
        decay_t_(decay_t),
        use_global_(use_global && agents.has_global),
        explore_(explore_rng) {}

  double operator()(int m, const TrafficEnv::Snapshot& snap) const {
    const IntersectionSpec& spec =
        agents_.scenario.intersections[static_cast<std::size_t>(m)];
    if (epsilon_ > 0.0 && explore_ && explore_->uniform01() < epsilon_)
      return explore_->uniform(spec.green_min, spec.green_max);
    const LocalAgent& agent = agents_.locals[static_cast<std::size_t>(m)];
    const std::vector<double> s_local =
        encode_state(agents_.scenario, agents_.local_layout, snap, m);
    const double local_seconds =
        denormalize_green(spec, forward(agent.nets.actor, s_local).output()[0]);
    if (!use_global_) return local_seconds;
    const std::vector<double> s_global =
        encode_state(agents_.scenario, agents_.global_layout, snap, 0);
    const std::vector<double> outs = forward(agents_.global.nets.actor, s_global).output();
    const int m_count = agents_.global_layout.m_count;
    const double global_seconds =
        denormalize_green(spec, outs[static_cast<std::size_t>(m)]);
    const double w = outs[static_cast<std::size_t>(m_count + m)];
    return arbitrate_action(local_seconds, global_seconds, w, decay_t_,
                            agents_.hyper.decay_base)
        .chosen_seconds;
  }

 private:
  const AgentSet& agents_;
  double epsilon_;
  int decay_t_;
  bool use_global_;
  Rng* explore_;
};

// ---- transition assembly ------------------------------------------------------

// Pairs each intersection's consecutive decisions into buffer transitions:
// the snapshot at decision i, the joint greens after the choice, the rewards
// and global reward observed at green end, and the snapshot at decision i+1.
class TransitionRecorder {
 public:
  TransitionRecorder(int m_count, ReplayBuffer* buffer)
      : buffer_(buffer),
        pending_(static_cast<std::size_t>(m_count)),
        latest_rewards_(static_cast<std::size_t>(m_count), 0.0) {}

  void on_decision(int m, const TrafficEnv::Snapshot& before, double chosen) {
    Pending& p = pending_[static_cast<std::size_t>(m)];
    if (p.active && p.reward_ready) {
      p.tr.s_next = before;
      buffer_->insert(std::move(p.tr));
    }
    p = Pending{};
    p.active = true;
    p.tr.tag = m;
    p.tr.s = before;
    p.tr.greens = before.greens;
    p.tr.greens[static_cast<std::size_t>(m)] = chosen;
    p.tr.rewards = latest_rewards_;
  }

  void on_green_end(int m, double reward, double global_r) {
    latest_rewards_[static_cast<std::size_t>(m)] = reward;
    Pending& p = pending_[static_cast<std::size_t>(m)];
    if (!p.active) return;
    p.tr.rewards = latest_rewards_;
    p.tr.global_reward = global_r;
    p.reward_ready = true;
  }

 private:
  struct Pending {
    Transition tr;
    bool active = false;
    bool reward_ready = false;
  };
  ReplayBuffer* buffer_;
  std::vector<Pending> pending_;
  std::vector<double> latest_rewards_;
};

// One simulated stretch of on-policy data appended to the buffer. Returns the
// episode trace for metric extraction.
inline EpisodeTrace generate_on_policy_data(const ScenarioConfig& sc, AgentSet& agents,
                                            ReplayBuffer& buffer, double epsilon,
                                            int decay_t, bool use_global, int horizon,
                                            std::uint64_t env_seed, Rng& explore_rng) {
  TrafficEnv env(sc, env_seed, /*truncate_on_clear=*/true);
  TransitionRecorder recorder(sc.intersection_count(), &buffer);
  RolloutPolicy policy(agents, epsilon, decay_t, use_global, &explore_rng);
  TrafficEnv::Hooks hooks;
  hooks.on_decision = [&recorder](int m, const TrafficEnv::Snapshot& before, double chosen) {
    recorder.on_decision(m, before, chosen);
  };
  hooks.on_green_end = [&recorder](int m, double, double reward, double global_r) {
    recorder.on_green_end(m, reward, global_r);
  };
  env.run(horizon, [&policy](int m, const TrafficEnv::Snapshot& snap) { return policy(m, snap); },
          &hooks);
  return env.trace();
}

// Buffer-seeding rollout driven by the constant-duration plan, in the same
// truncating environment the agents will face.
inline EpisodeTrace generate_fixed_plan_data(const ScenarioConfig& sc, ReplayBuffer& buffer,
                                             int horizon, std::uint64_t env_seed) {
  TrafficEnv env(sc, env_seed, /*truncate_on_clear=*/true);
  TransitionRecorder recorder(sc.intersection_count(), &buffer);
  TrafficEnv::Hooks hooks;
  hooks.on_decision = [&recorder](int m, const TrafficEnv::Snapshot& before, double chosen) {
    recorder.on_decision(m, before, chosen);
  };
  hooks.on_green_end = [&recorder](int m, double, double reward, double global_r) {
    recorder.on_green_end(m, reward, global_r);
  };
  env.run(horizon,
          [&sc](int m, const TrafficEnv::Snapshot&) {
            return sc.intersections[static_cast<std::size_t>(m)].fixed_green;
          },
          &hooks);
  return env.trace();
}

// ---- agent updates --------------------------------------------------------------

// One minibatch step: descend the critic residual, then the actor through the
// refreshed critic, then blend both targets.
inline bool update_local_agent_once(AgentSet& set, LocalAgent& agent,
                                    const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw std::invalid_argument("update_local_agent_once: empty batch");
  const ScenarioConfig& sc = set.scenario;
  const ObsLayout& lo = set.local_layout;
  const int m = agent.index;
  const int slot = lo.action_slot(m);
  const double inv = 1.0 / static_cast<double>(batch.size());

  std::vector<double> ys;
  ys.reserve(batch.size());
  for (const Transition* tr : batch) ys.push_back(critic_target_local(set, agent, *tr));

  GradientTape critic_tape = make_tape(agent.nets.critic);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& tr = *batch[i];
    const std::vector<double> s = encode_state(sc, lo, tr.s, m);
    const std::vector<double> a = encode_action(sc, lo, tr.greens, m);
    const ForwardTrace trace = forward(agent.nets.critic, concat(s, a));
    const double q = trace.output()[0];
    backward(agent.nets.critic, trace, {2.0 * (q - ys[i]) * inv}, critic_tape);
  }
  bool ok = sgd_update(agent.nets.critic, critic_tape, set.hyper.lr_critic);

  GradientTape actor_tape = make_tape(agent.nets.actor);
  GradientTape scratch = make_tape(agent.nets.critic);
  for (const Transition* tr : batch) {
    const std::vector<double> s = encode_state(sc, lo, tr->s, m);
    const ForwardTrace atrace = forward(agent.nets.actor, s);
    std::vector<double> a = encode_action(sc, lo, tr->greens, m);
    a[static_cast<std::size_t>(slot)] = atrace.output()[0];
    const ForwardTrace qtrace = forward(agent.nets.critic, concat(s, a));
    const std::vector<double> dinput =
        backward(agent.nets.critic, qtrace, {-inv}, scratch);
    const double d_action = dinput[s.size() + static_cast<std::size_t>(slot)];
    backward(agent.nets.actor, atrace, {d_action}, actor_tape);
  }
  ok = sgd_update(agent.nets.actor, actor_tape, set.hyper.lr_actor) && ok;

  soft_update(agent.nets.critic, agent.nets.critic_target, set.hyper.tau);
  soft_update(agent.nets.actor, agent.nets.actor_target, set.hyper.tau);
  return ok;
}

inline bool update_global_agent_once(AgentSet& set,
                                     const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw std::invalid_argument("update_global_agent_once: empty batch");
  if (!set.has_global) throw std::logic_error("update_global_agent_once: no global agent");
  const ScenarioConfig& sc = set.scenario;
  const ObsLayout& lo = set.global_layout;
  const int m_count = lo.m_count;
  const double inv = 1.0 / static_cast<double>(batch.size());
  DdpgPair& nets = set.global.nets;

  std::vector<double> ys;
  ys.reserve(batch.size());
  for (const Transition* tr : batch) ys.push_back(critic_target_global(set, *tr));

  GradientTape critic_tape = make_tape(nets.critic);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& tr = *batch[i];
    const std::vector<double> s = encode_state(sc, lo, tr.s, 0);
    const std::vector<double> a = encode_action(sc, lo, tr.greens, 0);
    const ForwardTrace trace = forward(nets.critic, concat(s, a));
    const double q = trace.output()[0];
    backward(nets.critic, trace, {2.0 * (q - ys[i]) * inv}, critic_tape);
  }
  bool ok = sgd_update(nets.critic, critic_tape, set.hyper.lr_critic);

  GradientTape actor_tape = make_tape(nets.actor);
  GradientTape scratch = make_tape(nets.critic);
  for (const Transition* tr : batch) {
    const std::vector<double> s = encode_state(sc, lo, tr->s, 0);
    const ForwardTrace atrace = forward(nets.actor, s);
    std::vector<double> a(atrace.output().begin(), atrace.output().begin() + m_count);
    const ForwardTrace qtrace = forward(nets.critic, concat(s, a));
    const std::vector<double> dinput = backward(nets.critic, qtrace, {-inv}, scratch);
    std::vector<double> dout(static_cast<std::size_t>(2 * m_count), 0.0);
    for (int k = 0; k < m_count; ++k)
      dout[static_cast<std::size_t>(k)] = dinput[s.size() + static_cast<std::size_t>(k)];
    backward(nets.actor, atrace, dout, actor_tape);
  }
  ok = sgd_update(nets.actor, actor_tape, set.hyper.lr_actor) && ok;

  soft_update(nets.critic, nets.critic_target, set.hyper.tau);
  soft_update(nets.actor, nets.actor_target, set.hyper.tau);
  return ok;
}

struct PassReport {
  std::vector<int> skipped;  // agents with too little data (global = -1)
  LossPair mean_loss;        // post-pass losses averaged over updated agents
  int updates = 0;
  int rejected_steps = 0;  // non-finite gradient steps that were skipped
};

// One local-update pass: every intersection agent takes updates_per_pass
// minibatch steps from its own store.
inline PassReport update_local_agents(AgentSet& set, const ReplayBuffer& buffer,
                                      const TrainConfig& tc, Rng& rng) {
  PassReport report;
  int measured = 0;
  for (LocalAgent& agent : set.locals) {
    if (buffer.size(agent.index) < tc.batch_size) {
      report.skipped.push_back(agent.index);
      continue;
    }
    std::vector<const Transition*> batch;
    for (int k = 0; k < tc.updates_per_pass; ++k) {
      batch = buffer.sample_local(agent.index, tc.batch_size, rng);
      if (!update_local_agent_once(set, agent, batch)) ++report.rejected_steps;
      ++report.updates;
    }
    const LossPair loss = local_losses(set, agent, batch);
    report.mean_loss.critic += loss.critic;
    report.mean_loss.actor += loss.actor;
    ++measured;
  }
  if (measured > 0) {
    report.mean_loss.critic /= measured;
    report.mean_loss.actor /= measured;
  }
  return report;
}

// One global-update pass over the union of all stores. The single global
// agent gets the same step budget per pass as the M local agents combined.
inline PassReport update_global_agent(AgentSet& set, const ReplayBuffer& buffer,
                                      const TrainConfig& tc, Rng& rng) {
  PassReport report;
  if (!set.has_global) return report;
  if (buffer.total_size() < tc.batch_size) {
    report.skipped.push_back(-1);
    return report;
  }
  std::vector<const Transition*> batch;
  const int steps = tc.updates_per_pass * static_cast<int>(set.locals.size());
  for (int k = 0; k < steps; ++k) {
    batch = buffer.sample_union(tc.batch_size, rng);
    if (!update_global_agent_once(set, batch)) ++report.rejected_steps;
    ++report.updates;
  }
  report.mean_loss = global_losses(set, batch);
  return report;
}

// ---- divergence guard ------------------------------------------------------------

// Trips after `consecutive` episodes whose waiting exceeds factor x baseline.
class DivergenceGuard {
 public:
  DivergenceGuard(double baseline_waiting, double factor, int consecutive)
      : threshold_(baseline_waiting * factor), consecutive_(consecutive) {}

  bool update(double waiting) {
    if (waiting > threshold_)
      ++streak_;
    else
      streak_ = 0;
    return streak_ >= consecutive_;
  }

  int streak() const { return streak_; }
  double threshold() const { return threshold_; }

 private:
  double threshold_;
  int consecutive_;
  int streak_ = 0;
};

// ---- outer loop ------------------------------------------------------------------

struct EpisodeStats {
  int episode = 0;
  double epsilon = 0.0;
  double effective_weight = 0.0;  // decayed starting importance this episode
  MetricsRecord metrics;
  LossPair local_loss;
  LossPair global_loss;
  int buffer_total = 0;
};

struct TrainResult {
  AgentSet agents;
  std::vector<EpisodeStats> series;
  double baseline_waiting = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

using EpisodeCallback = std::function<void(const EpisodeStats&, const AgentSet&)>;

// Outer loop: optional buffer seeding from the constant plan, then per
// episode one data-generation hour, one local pass, one global pass.
inline TrainResult train(const ScenarioConfig& sc, std::uint64_t seed,
                         const EpisodeCallback& on_episode = {}) {
  validate_scenario(sc);
  const TrainConfig& tc = sc.train;
  TrainResult result;
  result.agents = make_agent_set(sc, tc, derive_seed(seed, 1));
  ReplayBuffer buffer(sc.intersection_count(), tc.buffer_capacity);

  result.baseline_waiting =
      run_fixed_time(sc, tc.steps_per_episode, derive_seed(seed, 2)).total_waiting;
  DivergenceGuard guard(result.baseline_waiting, tc.guard_factor, tc.guard_consecutive);

  Rng update_rng(derive_seed(seed, 3));
  for (int h = 0; h < tc.pretrain_hours; ++h)
    generate_fixed_plan_data(sc, buffer, tc.steps_per_episode,
                             derive_seed(seed, 100 + static_cast<std::uint64_t>(h)));
  for (int p = 0; p < tc.pretrain_passes; ++p) {
    update_local_agents(result.agents, buffer, tc, update_rng);
    if (tc.use_global) update_global_agent(result.agents, buffer, tc, update_rng);
  }

  for (int e = 0; e < tc.episodes; ++e) {
    const double eps = epsilon_at(tc, e);
    Rng explore_rng(derive_seed(seed, 5000 + static_cast<std::uint64_t>(e)));
    const EpisodeTrace trace = generate_on_policy_data(
        sc, result.agents, buffer, eps, e, tc.use_global, tc.steps_per_episode,
        derive_seed(seed, 1000 + static_cast<std::uint64_t>(e)), explore_rng);

    const PassReport local_report = update_local_agents(result.agents, buffer, tc, update_rng);
    PassReport global_report;
    if (tc.use_global) global_report = update_global_agent(result.agents, buffer, tc, update_rng);

    EpisodeStats stats;
    stats.episode = e;
    stats.epsilon = eps;
    stats.effective_weight = 0.8 * std::pow(tc.decay_base, static_cast<double>(e));
    stats.metrics = collect_metrics(trace);
    stats.local_loss = local_report.mean_loss;
    stats.global_loss = global_report.mean_loss;
    stats.buffer_total = buffer.total_size();
    result.agents.episodes_trained = e + 1;
    result.series.push_back(stats);
    if (on_episode) on_episode(stats, result.agents);

    if (guard.update(stats.metrics.total_waiting)) {
      result.aborted = true;
      result.abort_reason =
          "waiting time exceeded " + format_number(guard.threshold()) + " (" +
          format_number(tc.guard_factor) + "x the fixed-plan baseline of " +
          format_number(result.baseline_waiting) + ") for " +
          std::to_string(tc.guard_consecutive) + " consecutive episodes, last at episode " +
          std::to_string(e);
      break;
    }
  }
  return result;
}

// ---- evaluation -------------------------------------------------------------------

struct ActionRecord {
  double time = 0.0;
  int intersection = 0;
  double seconds = 0.0;
};

struct EvalResult {
  MetricsRecord metrics;
  EpisodeTrace trace;
  std::vector<ActionRecord> actions;
};

// Greedy rollout of a trained set. with_global keeps the global agent in the
// arbitration at the given decay index; otherwise the local actors run alone.
inline EvalResult evaluate_rollout(const ScenarioConfig& sc, const AgentSet& agents,
                                   int horizon, std::uint64_t seed, bool with_global,
                                   int decay_t) {
  TrafficEnv env(sc, seed, /*truncate_on_clear=*/true);
  RolloutPolicy policy(agents, 0.0, decay_t, with_global, nullptr);
  EvalResult out;
  TrafficEnv::Hooks hooks;
  hooks.on_decision = [&out](int m, const TrafficEnv::Snapshot& before, double chosen) {
    out.actions.push_back({before.time, m, chosen});
  };
  env.run(horizon,
          [&policy](int m, const TrafficEnv::Snapshot& snap) { return policy(m, snap); },
          &hooks);
  out.trace = env.trace();
  out.metrics = collect_metrics(out.trace);
  return out;
}

}  // namespace greenwave
