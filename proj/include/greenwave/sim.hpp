#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "greenwave/rng.hpp"
#include "greenwave/scenario.hpp"

namespace greenwave {

struct Vehicle {
  std::uint64_t id = 0;
  double entry_time = 0.0;
  double accumulated_wait = 0.0;  // whole seconds spent queued or blocked
  bool is_stopped = true;         // queue membership is the stopped criterion
};

struct ExitRecord {
  std::uint64_t id = 0;
  double entry_time = 0.0;
  double exit_time = 0.0;
  double waited = 0.0;
  double free_flow_time = 0.0;
};

// Clearance reward. A remnant of green (g_remaining > 0) means the phase
// emptied early: reward the one-second margin, penalize longer waste.
// Otherwise the green expired naturally: reward an (almost) cleared
// intersection, penalize the residual queue. Exactly one case per interval.
inline double local_reward(double n_remaining, double g_remaining,
                           const IntersectionSpec& spec, double r_max) {
  if (!(spec.n_max > 0.0) || !(spec.g_max > 0.0))
    throw ConfigError("local_reward: n_max and g_max must be positive");
  if (n_remaining < 0.0) throw std::invalid_argument("local_reward: negative queue count");
  if (g_remaining < 0.0) throw std::invalid_argument("local_reward: negative remnant green");
  if (g_remaining > 0.0) {
    if (g_remaining / spec.g_max <= 1.0 / spec.g_max) return r_max;
    return -r_max * g_remaining / spec.g_max;
  }
  if (n_remaining / spec.n_max <= 1.0 / spec.n_max) return r_max;
  return -r_max * n_remaining / spec.n_max;
}

// State reported to agents: queue counts sampled at the end of the last
// green, plus signal context. all_phases is filled by the environment when
// several intersections are simulated together.
struct LocalObservation {
  std::vector<int> stopped_per_lane;
  double remaining_green = 0.0;
  std::vector<int> all_phases;
};

struct MetricsRecord {
  std::int64_t throughput = 0;
  double total_waiting = 0.0;
  double mean_delay = 0.0;
  double mean_speed = 0.0;
  double mean_travel_time = 0.0;
  double time_loss = 0.0;
  bool no_exits = false;
};

struct EpisodeTrace {
  std::vector<ExitRecord> exits;
  std::vector<double> stop_times;  // per vehicle, exited or not, for emissions
  std::int64_t injected = 0;
  std::int64_t still_queued = 0;
  std::int64_t still_blocked = 0;
  double horizon_seconds = 0.0;
};

inline MetricsRecord collect_metrics(const EpisodeTrace& trace) {
  MetricsRecord m;
  m.throughput = static_cast<std::int64_t>(trace.exits.size());
  if (trace.exits.empty()) {
    m.no_exits = true;
    return m;
  }
  double travel_sum = 0.0, speed_sum = 0.0, delay_sum = 0.0;
  for (const ExitRecord& e : trace.exits) {
    const double travel = e.exit_time - e.entry_time;
    m.total_waiting += e.waited;
    travel_sum += travel;
    delay_sum += travel - e.free_flow_time;
    speed_sum += e.free_flow_time / travel;
  }
  const double n = static_cast<double>(trace.exits.size());
  m.mean_travel_time = travel_sum / n;
  m.mean_delay = delay_sum / n;
  m.mean_speed = speed_sum / n;
  m.time_loss = delay_sum;
  return m;
}

// One intersection advanced second by second. The signal alternates
// green (variable, chosen per interval) and yellow (fixed); the phase
// rotates when yellow ends and the next green needs a fresh decision.
class IntersectionSim {
 public:
  struct TickEvent {
    bool green_ended = false;
    bool truncated = false;   // phase cleared before the chosen green expired
    double reward = 0.0;
    double remnant_green = 0.0;
  };

  IntersectionSim(const IntersectionSpec& spec, int index, std::uint64_t seed,
                  bool truncate_on_clear = true)
      : spec_(spec),
        index_(index),
        rng_(seed),
        truncate_on_clear_(truncate_on_clear),
        lanes_(spec.lanes.size()),
        last_end_stopped_(spec.lanes.size(), 0) {
    validate_intersection(spec_, "intersection[" + std::to_string(index) + "]");
    yellow_ticks_ = static_cast<int>(std::llround(spec_.yellow_seconds));
  }

  const IntersectionSpec& spec() const { return spec_; }
  int index() const { return index_; }
  bool needs_decision() const { return mode_ == Mode::Deciding; }
  int phase() const { return phase_; }
  double now() const { return now_; }
  double green_in_effect() const { return chosen_green_; }
  const std::vector<int>& last_green_end_stopped() const { return last_end_stopped_; }

  std::int64_t injected() const { return injected_; }
  std::int64_t exited() const { return static_cast<std::int64_t>(exits_.size()); }
  const std::vector<ExitRecord>& exits() const { return exits_; }

  std::int64_t queued_count() const {
    std::int64_t n = 0;
    for (const Lane& l : lanes_) n += static_cast<std::int64_t>(l.queue.size());
    return n;
  }
  std::int64_t blocked_count() const {
    std::int64_t n = 0;
    for (const Lane& l : lanes_) n += static_cast<std::int64_t>(l.blocked.size());
    return n;
  }
  std::vector<int> stopped_per_lane() const {
    std::vector<int> out(lanes_.size());
    for (std::size_t i = 0; i < lanes_.size(); ++i)
      out[i] = static_cast<int>(lanes_[i].queue.size());
    return out;
  }

  // Sum of accumulated waits of vehicles currently here, spillback included.
  double in_network_wait() const {
    double s = 0.0;
    for (const Lane& l : lanes_) {
      for (const Vehicle& v : l.queue) s += v.accumulated_wait;
      for (const Vehicle& v : l.blocked) s += v.accumulated_wait;
    }
    return s;
  }

  // Stop times of vehicles that never exited, for emission accounting.
  void residual_stop_times(std::vector<double>& out) const {
    for (const Lane& l : lanes_) {
      for (const Vehicle& v : l.queue) out.push_back(v.accumulated_wait);
      for (const Vehicle& v : l.blocked) out.push_back(v.accumulated_wait);
    }
  }

  // Inject vehicles straight into a lane's queue (spillover to blocked when
  // full), entry-stamped at the current clock. Scenario setup for tests and
  // warm starts.
  void seed_queue(int lane_index, int count) {
    if (lane_index < 0 || lane_index >= spec_.lane_count())
      throw std::out_of_range("seed_queue: lane index out of range");
    Lane& lane = lanes_[static_cast<std::size_t>(lane_index)];
    const std::size_t cap =
        static_cast<std::size_t>(spec_.lanes[static_cast<std::size_t>(lane_index)].length_capacity);
    for (int i = 0; i < count; ++i) {
      Vehicle v;
      v.id = (static_cast<std::uint64_t>(index_) << 48) | ++vehicle_counter_;
      v.entry_time = now_;
      ++injected_;
      if (lane.blocked.empty() && lane.queue.size() < cap)
        lane.queue.push_back(v);
      else
        lane.blocked.push_back(v);
    }
  }

  void begin_green(double green_seconds) {
    if (mode_ != Mode::Deciding)
      throw std::logic_error("begin_green: interval already in progress");
    if (!(green_seconds >= spec_.green_min && green_seconds <= spec_.green_max))
      throw std::out_of_range(
          "begin_green: " + std::to_string(green_seconds) + " outside [" +
          std::to_string(spec_.green_min) + ", " + std::to_string(spec_.green_max) + "]");
    chosen_green_ = green_seconds;
    green_target_ = static_cast<int>(std::llround(green_seconds));
    if (green_target_ < 1) green_target_ = 1;
    sec_in_green_ = 0;
    had_traffic_ = false;
    for (int lane : spec_.phases[static_cast<std::size_t>(phase_)])
      lanes_[static_cast<std::size_t>(lane)].service_credit = 0.0;
    mode_ = Mode::Green;
  }

  // Advance one simulated second: arrivals, then service while green, then
  // spillover transfer, then end-of-green bookkeeping, then wait accrual.
  TickEvent tick() {
    if (mode_ == Mode::Deciding)
      throw std::logic_error("tick: decision pending, call begin_green first");
    TickEvent ev;
    arrivals();
    if (mode_ == Mode::Green) {
      const auto& active = spec_.phases[static_cast<std::size_t>(phase_)];
      for (int lane : active)
        if (!lanes_[static_cast<std::size_t>(lane)].queue.empty()) had_traffic_ = true;
      serve(active);
      transfer_blocked();
      ++sec_in_green_;
      const bool active_empty = phase_queues_empty(active);
      if (truncate_on_clear_ && active_empty && had_traffic_ && sec_in_green_ < green_target_) {
        ev.green_ended = true;
        ev.truncated = true;
        ev.remnant_green = static_cast<double>(green_target_ - sec_in_green_);
        ev.reward = local_reward(0.0, ev.remnant_green, spec_, spec_.r_max);
        end_green();
      } else if (sec_in_green_ >= green_target_) {
        ev.green_ended = true;
        ev.reward = local_reward(static_cast<double>(queued_count()), 0.0, spec_, spec_.r_max);
        end_green();
      }
    } else {  // Yellow
      transfer_blocked();
      --yellow_left_;
      if (yellow_left_ <= 0) rotate_phase();
    }
    accrue_waits();
    now_ += 1.0;
    return ev;
  }

 private:
  enum class Mode { Deciding, Green, Yellow };

  struct Lane {
    std::deque<Vehicle> queue;
    std::deque<Vehicle> blocked;  // spillover waiting upstream of a full queue
    double service_credit = 0.0;
  };

  void arrivals() {
    for (std::size_t li = 0; li < lanes_.size(); ++li) {
      const LaneSpec& ls = spec_.lanes[li];
      const int k = rng_.poisson(ls.arrival_rate);
      for (int i = 0; i < k; ++i) {
        Vehicle v;
        v.id = (static_cast<std::uint64_t>(index_) << 48) | ++vehicle_counter_;
        v.entry_time = now_;
        ++injected_;
        Lane& lane = lanes_[li];
        if (lane.blocked.empty() &&
            lane.queue.size() < static_cast<std::size_t>(ls.length_capacity))
          lane.queue.push_back(v);
        else
          lane.blocked.push_back(v);  // counted, never dropped
      }
    }
  }

  void serve(const std::vector<int>& active) {
    for (int li : active) {
      Lane& lane = lanes_[static_cast<std::size_t>(li)];
      const LaneSpec& ls = spec_.lanes[static_cast<std::size_t>(li)];
      lane.service_credit += ls.saturation_rate;
      while (lane.service_credit >= 1.0 && !lane.queue.empty()) {
        Vehicle v = lane.queue.front();
        lane.queue.pop_front();
        lane.service_credit -= 1.0;
        ExitRecord e;
        e.id = v.id;
        e.entry_time = v.entry_time;
        e.waited = v.accumulated_wait;  // equals service time minus entry time
        e.free_flow_time = ls.free_flow_time;
        e.exit_time = v.entry_time + v.accumulated_wait + ls.free_flow_time;
        exits_.push_back(e);
      }
    }
  }

  void transfer_blocked() {
    for (std::size_t li = 0; li < lanes_.size(); ++li) {
      Lane& lane = lanes_[li];
      const std::size_t cap = static_cast<std::size_t>(spec_.lanes[li].length_capacity);
      while (!lane.blocked.empty() && lane.queue.size() < cap) {
        lane.queue.push_back(lane.blocked.front());
        lane.blocked.pop_front();
      }
    }
  }

  bool phase_queues_empty(const std::vector<int>& active) const {
    for (int li : active)
      if (!lanes_[static_cast<std::size_t>(li)].queue.empty()) return false;
    return true;
  }

  void end_green() {
    last_end_stopped_ = stopped_per_lane();
    if (yellow_ticks_ > 0) {
      mode_ = Mode::Yellow;
      yellow_left_ = yellow_ticks_;
    } else {
      rotate_phase();
    }
  }

  void rotate_phase() {
    phase_ = (phase_ + 1) % spec_.phase_count();
    mode_ = Mode::Deciding;
  }

  void accrue_waits() {
    for (Lane& lane : lanes_) {
      for (Vehicle& v : lane.queue) v.accumulated_wait += 1.0;
      for (Vehicle& v : lane.blocked) v.accumulated_wait += 1.0;
    }
  }

  IntersectionSpec spec_;
  int index_;
  Rng rng_;
  bool truncate_on_clear_;
  std::vector<Lane> lanes_;
  std::vector<int> last_end_stopped_;

  Mode mode_ = Mode::Deciding;
  int phase_ = 0;
  double now_ = 0.0;
  double chosen_green_ = 0.0;
  int green_target_ = 0;
  int sec_in_green_ = 0;
  int yellow_ticks_ = 0;
  int yellow_left_ = 0;
  bool had_traffic_ = false;

  std::uint64_t vehicle_counter_ = 0;
  std::int64_t injected_ = 0;
  std::vector<ExitRecord> exits_;
};

struct StepOutcome {
  double reward = 0.0;
  LocalObservation obs;
  bool truncated = false;
  int seconds_elapsed = 0;
};

// Drive one intersection through a full green+yellow interval with the
// given green duration. Standalone counterpart of the environment loop.
inline StepOutcome step_intersection(IntersectionSim& sim, double green_seconds) {
  if (!sim.needs_decision())
    throw std::logic_error("step_intersection: intersection mid-interval");
  sim.begin_green(green_seconds);
  StepOutcome out;
  while (!sim.needs_decision()) {
    IntersectionSim::TickEvent ev = sim.tick();
    ++out.seconds_elapsed;
    if (ev.green_ended) {
      out.reward = ev.reward;
      out.truncated = ev.truncated;
      out.obs.remaining_green = ev.remnant_green;
    }
  }
  out.obs.stopped_per_lane = sim.last_green_end_stopped();
  out.obs.all_phases = {sim.phase()};
  return out;
}

// Several intersections in lock step on a shared clock. Decisions are pulled
// from a policy whenever an intersection finishes its interval; observation
// snapshots cross intersection boundaries.
class TrafficEnv {
 public:
  struct Snapshot {
    double time = 0.0;
    std::vector<std::vector<int>> stopped;  // last green-end counts, per intersection
    std::vector<int> phases;
    std::vector<double> greens;  // seconds in effect, per intersection
  };

  // policy(m, snapshot) -> green seconds for intersection m
  using PolicyFn = std::function<double(int, const Snapshot&)>;

  struct Hooks {
    // fired after the policy chose, before the interval runs
    std::function<void(int m, const Snapshot& before, double chosen)> on_decision;
    // fired when intersection m's green ends
    std::function<void(int m, double time, double reward, double global_r)> on_green_end;
    // fired after every simulated second
    std::function<void(double time)> on_second;
  };

  TrafficEnv(const ScenarioConfig& sc, std::uint64_t seed, bool truncate_on_clear = true)
      : scenario_(sc) {
    validate_scenario(sc);
    sims_.reserve(sc.intersections.size());
    for (std::size_t m = 0; m < sc.intersections.size(); ++m)
      sims_.emplace_back(sc.intersections[m], static_cast<int>(m),
                         derive_seed(seed, m), truncate_on_clear);
    greens_.resize(sc.intersections.size());
    for (std::size_t m = 0; m < sims_.size(); ++m)
      greens_[m] = sc.intersections[m].green_min;
  }

  int intersection_count() const { return static_cast<int>(sims_.size()); }
  IntersectionSim& intersection(int m) { return sims_[static_cast<std::size_t>(m)]; }
  const IntersectionSim& intersection(int m) const {
    return sims_[static_cast<std::size_t>(m)];
  }

  Snapshot snapshot() const {
    Snapshot s;
    s.time = clock_;
    s.stopped.reserve(sims_.size());
    s.phases.reserve(sims_.size());
    for (const IntersectionSim& sim : sims_) {
      s.stopped.push_back(sim.last_green_end_stopped());
      s.phases.push_back(sim.phase());
    }
    s.greens = greens_;
    return s;
  }

  // -(1/M) * sum of accumulated waits of vehicles anywhere in the network
  double global_reward() const {
    double total = 0.0;
    for (const IntersectionSim& sim : sims_) total += sim.in_network_wait();
    return -(total / static_cast<double>(sims_.size()));
  }

  void run(int horizon_seconds, const PolicyFn& policy, const Hooks* hooks = nullptr) {
    for (int t = 0; t < horizon_seconds; ++t) {
      for (std::size_t m = 0; m < sims_.size(); ++m) {
        if (!sims_[m].needs_decision()) continue;
        const Snapshot before = snapshot();
        const double chosen = policy(static_cast<int>(m), before);
        sims_[m].begin_green(chosen);
        greens_[m] = chosen;
        if (hooks && hooks->on_decision)
          hooks->on_decision(static_cast<int>(m), before, chosen);
      }
      for (std::size_t m = 0; m < sims_.size(); ++m) {
        IntersectionSim::TickEvent ev = sims_[m].tick();
        if (ev.green_ended && hooks && hooks->on_green_end)
          hooks->on_green_end(static_cast<int>(m), clock_, ev.reward, global_reward());
      }
      clock_ += 1.0;
      if (hooks && hooks->on_second) hooks->on_second(clock_);
    }
  }

  double time() const { return clock_; }

  std::int64_t injected() const {
    std::int64_t n = 0;
    for (const IntersectionSim& s : sims_) n += s.injected();
    return n;
  }
  std::int64_t exited() const {
    std::int64_t n = 0;
    for (const IntersectionSim& s : sims_) n += s.exited();
    return n;
  }
  std::int64_t queued() const {
    std::int64_t n = 0;
    for (const IntersectionSim& s : sims_) n += s.queued_count();
    return n;
  }
  std::int64_t blocked() const {
    std::int64_t n = 0;
    for (const IntersectionSim& s : sims_) n += s.blocked_count();
    return n;
  }

  EpisodeTrace trace() const {
    EpisodeTrace tr;
    tr.horizon_seconds = clock_;
    tr.injected = injected();
    tr.still_queued = queued();
    tr.still_blocked = blocked();
    for (const IntersectionSim& sim : sims_) {
      for (const ExitRecord& e : sim.exits()) {
        tr.exits.push_back(e);
        tr.stop_times.push_back(e.waited);
      }
      sim.residual_stop_times(tr.stop_times);
    }
    return tr;
  }

  const ScenarioConfig& scenario() const { return scenario_; }

 private:
  ScenarioConfig scenario_;
  std::vector<IntersectionSim> sims_;
  std::vector<double> greens_;
  double clock_ = 0.0;
};

// Constant-duration signal plan: every green runs the configured length,
// clearance truncation disabled. The comparison baseline.
inline MetricsRecord run_fixed_time(const ScenarioConfig& sc, int horizon_seconds,
                                    std::uint64_t seed) {
  TrafficEnv env(sc, seed, /*truncate_on_clear=*/false);
  env.run(horizon_seconds, [&sc](int m, const TrafficEnv::Snapshot&) {
    return sc.intersections[static_cast<std::size_t>(m)].fixed_green;
  });
  return collect_metrics(env.trace());
}

}  // namespace greenwave
