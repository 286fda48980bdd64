#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenwave/emissions.hpp"

namespace greenwave {

struct LaneSpec {
  double saturation_rate = 1.0;  // vehicles/second served while green
  double arrival_rate = 0.0;     // Poisson mean, vehicles/second
  double free_flow_time = 20.0;  // seconds to traverse when unimpeded
  int length_capacity = 200;     // max queued vehicles
};

struct IntersectionSpec {
  std::vector<LaneSpec> lanes;
  std::vector<std::vector<int>> phases;  // lane index groups, green rotates through
  double cycle_length = 90.0;
  double yellow_seconds = 3.0;
  double green_min = 5.0;
  double green_max = 60.0;
  double n_max = 40.0;   // queue-count normalizer in the clearance reward
  double g_max = 60.0;   // remnant-green normalizer in the clearance reward
  double r_max = 1.0;    // reward magnitude bound
  double fixed_green = 30.0;

  int phase_count() const { return static_cast<int>(phases.size()); }
  int lane_count() const { return static_cast<int>(lanes.size()); }
};

// Hyperparameters for the cooperative training loop. Lives beside the road
// network so one scenario file fully determines a run.
struct TrainConfig {
  int episodes = 200;
  int steps_per_episode = 3600;  // simulated seconds per episode
  double epsilon_start = 0.9;
  double epsilon_end = 0.1;
  double decay_base = 0.95;  // per-episode decay of the global arbitration weight
  int batch_size = 64;
  double tau = 0.8;
  double gamma = 0.9;
  double lr_critic = 1e-3;
  double lr_actor = 1e-4;
  int buffer_capacity = 100000;
  int updates_per_pass = 32;  // minibatch steps per agent per episode
  int pretrain_hours = 1;     // fixed-time rollouts seeded into the buffer
  int pretrain_passes = 4;
  std::vector<int> hidden = {64, 64};
  bool use_global = true;
  bool use_window = false;
  double global_reward_scale = 2000.0;  // normalizer for the global critic target
  double guard_factor = 10.0;           // divergence guard: multiple of baseline waiting
  int guard_consecutive = 5;
  int checkpoint_every = 0;  // 0 = final checkpoint only
};

struct ScenarioConfig {
  int schema_version = 1;
  std::string name;
  int grid_rows = 1;
  int grid_cols = 1;
  std::vector<IntersectionSpec> intersections;
  TrainConfig train;

  int intersection_count() const { return static_cast<int>(intersections.size()); }
  int total_lanes() const {
    int n = 0;
    for (const auto& itx : intersections) n += itx.lane_count();
    return n;
  }
  int max_lanes() const {
    int n = 0;
    for (const auto& itx : intersections) n = std::max(n, itx.lane_count());
    return n;
  }
};

// ---- validation ------------------------------------------------------------

inline void validate_lane(const LaneSpec& lane, const std::string& at) {
  if (!(lane.saturation_rate > 0.0))
    throw ConfigError(at + ".saturation_rate: must be > 0");
  if (lane.arrival_rate < 0.0)
    throw ConfigError(at + ".arrival_rate: must be >= 0");
  if (!(lane.free_flow_time > 0.0))
    throw ConfigError(at + ".free_flow_time: must be > 0");
  if (lane.length_capacity < 1)
    throw ConfigError(at + ".length_capacity: must be >= 1");
}

inline void validate_intersection(const IntersectionSpec& itx, const std::string& at) {
  if (itx.lanes.empty()) throw ConfigError(at + ".lanes: at least one lane required");
  if (itx.phases.empty()) throw ConfigError(at + ".phases: at least one phase required");
  for (std::size_t i = 0; i < itx.lanes.size(); ++i)
    validate_lane(itx.lanes[i], at + ".lanes[" + std::to_string(i) + "]");
  if (!(itx.green_min >= 1.0)) throw ConfigError(at + ".green_min: must be >= 1");
  if (!(itx.green_min <= itx.green_max))
    throw ConfigError(at + ".green_max: must be >= green_min");
  if (!(itx.yellow_seconds >= 0.0))
    throw ConfigError(at + ".yellow_seconds: must be >= 0");
  if (!(itx.green_max + itx.yellow_seconds <= itx.cycle_length))
    throw ConfigError(at + ".cycle_length: must cover green_max + yellow_seconds");
  if (!(itx.n_max >= 1.0)) throw ConfigError(at + ".n_max: must be >= 1");
  if (!(itx.g_max > 0.0)) throw ConfigError(at + ".g_max: must be > 0");
  if (!(itx.r_max > 0.0)) throw ConfigError(at + ".r_max: must be > 0");
  if (!(itx.fixed_green >= itx.green_min && itx.fixed_green <= itx.green_max))
    throw ConfigError(at + ".fixed_green: must lie in [green_min, green_max]");
  // every lane in exactly one phase
  std::vector<int> owner(itx.lanes.size(), -1);
  for (std::size_t p = 0; p < itx.phases.size(); ++p) {
    if (itx.phases[p].empty())
      throw ConfigError(at + ".phases[" + std::to_string(p) + "]: empty phase");
    for (int lane : itx.phases[p]) {
      if (lane < 0 || lane >= itx.lane_count())
        throw ConfigError(at + ".phases[" + std::to_string(p) + "]: lane index " +
                          std::to_string(lane) + " out of range");
      if (owner[lane] != -1)
        throw ConfigError(at + ".phases[" + std::to_string(p) + "]: lane " +
                          std::to_string(lane) + " already in phase " +
                          std::to_string(owner[lane]));
      owner[lane] = static_cast<int>(p);
    }
  }
  for (std::size_t lane = 0; lane < owner.size(); ++lane)
    if (owner[lane] == -1)
      throw ConfigError(at + ".phases: lane " + std::to_string(lane) +
                        " belongs to no phase");
}

inline void validate_train(const TrainConfig& t, const std::string& at) {
  if (t.episodes < 0) throw ConfigError(at + ".episodes: must be >= 0");
  if (t.steps_per_episode < 1) throw ConfigError(at + ".steps_per_episode: must be >= 1");
  if (!(t.epsilon_start > t.epsilon_end))
    throw ConfigError(at + ".epsilon_start: must exceed epsilon_end");
  if (!(t.epsilon_end >= 0.0)) throw ConfigError(at + ".epsilon_end: must be >= 0");
  if (!(t.epsilon_start <= 1.0)) throw ConfigError(at + ".epsilon_start: must be <= 1");
  if (!(t.decay_base > 0.0 && t.decay_base < 1.0))
    throw ConfigError(at + ".decay_base: must lie in (0, 1)");
  if (t.batch_size < 1) throw ConfigError(at + ".batch_size: must be >= 1");
  if (!(t.tau >= 0.0 && t.tau <= 1.0)) throw ConfigError(at + ".tau: must lie in [0, 1]");
  if (!(t.gamma >= 0.0 && t.gamma < 1.0))
    throw ConfigError(at + ".gamma: must lie in [0, 1)");
  if (!(t.lr_critic >= 0.0)) throw ConfigError(at + ".lr_critic: must be >= 0");
  if (!(t.lr_actor >= 0.0)) throw ConfigError(at + ".lr_actor: must be >= 0");
  if (t.buffer_capacity < 1) throw ConfigError(at + ".buffer_capacity: must be >= 1");
  if (t.updates_per_pass < 1) throw ConfigError(at + ".updates_per_pass: must be >= 1");
  if (t.pretrain_hours < 0) throw ConfigError(at + ".pretrain_hours: must be >= 0");
  if (t.pretrain_passes < 0) throw ConfigError(at + ".pretrain_passes: must be >= 0");
  if (t.hidden.empty()) throw ConfigError(at + ".hidden: at least one hidden layer");
  for (int h : t.hidden)
    if (h < 1) throw ConfigError(at + ".hidden: widths must be >= 1");
  if (!(t.global_reward_scale > 0.0))
    throw ConfigError(at + ".global_reward_scale: must be > 0");
  if (!(t.guard_factor > 1.0)) throw ConfigError(at + ".guard_factor: must be > 1");
  if (t.guard_consecutive < 1) throw ConfigError(at + ".guard_consecutive: must be >= 1");
  if (t.checkpoint_every < 0) throw ConfigError(at + ".checkpoint_every: must be >= 0");
}

inline void validate_scenario(const ScenarioConfig& sc) {
  if (sc.schema_version != 1)
    throw ConfigError("$.schema_version: unsupported version " +
                      std::to_string(sc.schema_version));
  if (sc.intersections.empty())
    throw ConfigError("$.intersections: at least one intersection required");
  if (sc.grid_rows < 1 || sc.grid_cols < 1)
    throw ConfigError("$.grid: rows and cols must be >= 1");
  if (sc.grid_rows * sc.grid_cols != sc.intersection_count())
    throw ConfigError("$.grid: rows*cols = " +
                      std::to_string(sc.grid_rows * sc.grid_cols) + " but " +
                      std::to_string(sc.intersection_count()) +
                      " intersections are defined");
  for (std::size_t i = 0; i < sc.intersections.size(); ++i)
    validate_intersection(sc.intersections[i],
                          "$.intersections[" + std::to_string(i) + "]");
  validate_train(sc.train, "$.train");
}

// ---- json ------------------------------------------------------------------

namespace detail {

inline double get_num(const nlohmann::json& j, const char* key, double fallback,
                      const std::string& at) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(at + "." + key + ": expected a number");
  return j[key].get<double>();
}

inline int get_int(const nlohmann::json& j, const char* key, int fallback,
                   const std::string& at) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer())
    throw ConfigError(at + "." + key + ": expected an integer");
  return j[key].get<int>();
}

inline bool get_bool(const nlohmann::json& j, const char* key, bool fallback,
                     const std::string& at) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(at + "." + key + ": expected a boolean");
  return j[key].get<bool>();
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const nlohmann::json& j) {
  using detail::get_bool;
  using detail::get_int;
  using detail::get_num;
  if (!j.is_object()) throw ConfigError("$: scenario must be a JSON object");
  ScenarioConfig sc;
  sc.schema_version = get_int(j, "schema_version", 0, "$");
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError("$.name: expected a string");
    sc.name = j["name"].get<std::string>();
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (!g.is_object()) throw ConfigError("$.grid: expected an object");
    sc.grid_rows = get_int(g, "rows", 1, "$.grid");
    sc.grid_cols = get_int(g, "cols", 1, "$.grid");
  }
  if (!j.contains("intersections") || !j["intersections"].is_array())
    throw ConfigError("$.intersections: expected an array");
  int idx = 0;
  for (const auto& ij : j["intersections"]) {
    const std::string at = "$.intersections[" + std::to_string(idx) + "]";
    if (!ij.is_object()) throw ConfigError(at + ": expected an object");
    IntersectionSpec itx;
    if (!ij.contains("lanes") || !ij["lanes"].is_array())
      throw ConfigError(at + ".lanes: expected an array");
    int li = 0;
    for (const auto& lj : ij["lanes"]) {
      const std::string lat = at + ".lanes[" + std::to_string(li) + "]";
      if (!lj.is_object()) throw ConfigError(lat + ": expected an object");
      LaneSpec lane;
      lane.saturation_rate = get_num(lj, "saturation_rate", lane.saturation_rate, lat);
      lane.arrival_rate = get_num(lj, "arrival_rate", lane.arrival_rate, lat);
      lane.free_flow_time = get_num(lj, "free_flow_time", lane.free_flow_time, lat);
      lane.length_capacity = get_int(lj, "length_capacity", lane.length_capacity, lat);
      itx.lanes.push_back(lane);
      ++li;
    }
    if (!ij.contains("phases") || !ij["phases"].is_array())
      throw ConfigError(at + ".phases: expected an array of lane-index arrays");
    int pi = 0;
    for (const auto& pj : ij["phases"]) {
      const std::string pat = at + ".phases[" + std::to_string(pi) + "]";
      if (!pj.is_array()) throw ConfigError(pat + ": expected an array of lane indices");
      std::vector<int> phase;
      for (const auto& v : pj) {
        if (!v.is_number_integer()) throw ConfigError(pat + ": lane indices must be integers");
        phase.push_back(v.get<int>());
      }
      itx.phases.push_back(std::move(phase));
      ++pi;
    }
    itx.cycle_length = get_num(ij, "cycle_length", itx.cycle_length, at);
    itx.yellow_seconds = get_num(ij, "yellow_seconds", itx.yellow_seconds, at);
    itx.green_min = get_num(ij, "green_min", itx.green_min, at);
    itx.green_max = get_num(ij, "green_max", itx.green_max, at);
    itx.n_max = get_num(ij, "n_max", itx.n_max, at);
    itx.g_max = get_num(ij, "g_max", itx.g_max, at);
    itx.r_max = get_num(ij, "r_max", itx.r_max, at);
    itx.fixed_green = get_num(ij, "fixed_green", itx.fixed_green, at);
    sc.intersections.push_back(std::move(itx));
    ++idx;
  }
  if (j.contains("train")) {
    const auto& tj = j["train"];
    const std::string at = "$.train";
    if (!tj.is_object()) throw ConfigError(at + ": expected an object");
    TrainConfig& t = sc.train;
    t.episodes = get_int(tj, "episodes", t.episodes, at);
    t.steps_per_episode = get_int(tj, "steps_per_episode", t.steps_per_episode, at);
    t.epsilon_start = get_num(tj, "epsilon_start", t.epsilon_start, at);
    t.epsilon_end = get_num(tj, "epsilon_end", t.epsilon_end, at);
    t.decay_base = get_num(tj, "decay_base", t.decay_base, at);
    t.batch_size = get_int(tj, "batch_size", t.batch_size, at);
    t.tau = get_num(tj, "tau", t.tau, at);
    t.gamma = get_num(tj, "gamma", t.gamma, at);
    t.lr_critic = get_num(tj, "lr_critic", t.lr_critic, at);
    t.lr_actor = get_num(tj, "lr_actor", t.lr_actor, at);
    t.buffer_capacity = get_int(tj, "buffer_capacity", t.buffer_capacity, at);
    t.updates_per_pass = get_int(tj, "updates_per_pass", t.updates_per_pass, at);
    t.pretrain_hours = get_int(tj, "pretrain_hours", t.pretrain_hours, at);
    t.pretrain_passes = get_int(tj, "pretrain_passes", t.pretrain_passes, at);
    if (tj.contains("hidden")) {
      if (!tj["hidden"].is_array()) throw ConfigError(at + ".hidden: expected an array");
      t.hidden.clear();
      for (const auto& v : tj["hidden"]) {
        if (!v.is_number_integer())
          throw ConfigError(at + ".hidden: widths must be integers");
        t.hidden.push_back(v.get<int>());
      }
    }
    t.use_global = get_bool(tj, "use_global", t.use_global, at);
    t.use_window = get_bool(tj, "use_window", t.use_window, at);
    t.global_reward_scale = get_num(tj, "global_reward_scale", t.global_reward_scale, at);
    t.guard_factor = get_num(tj, "guard_factor", t.guard_factor, at);
    t.guard_consecutive = get_int(tj, "guard_consecutive", t.guard_consecutive, at);
    t.checkpoint_every = get_int(tj, "checkpoint_every", t.checkpoint_every, at);
  }
  validate_scenario(sc);
  return sc;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("scenario file " + path + ": " + e.what());
  }
  return parse_scenario(j);
}

// Emission parameter files carry {value, unit} pairs; the unit strings must
// match the reference table exactly or the load is refused.
inline EmissionParams parse_emission_params(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("$: emission params must be a JSON object");
  EmissionParams p;
  auto read = [&](const char* key, double& slot) {
    if (!j.contains(key)) return;
    const auto& e = j[key];
    const std::string at = std::string("$.") + key;
    if (!e.is_object() || !e.contains("value") || !e.contains("unit"))
      throw ConfigError(at + ": expected {\"value\": number, \"unit\": string}");
    if (!e["value"].is_number()) throw ConfigError(at + ".value: expected a number");
    if (!e["unit"].is_string()) throw ConfigError(at + ".unit: expected a string");
    const std::string unit = e["unit"].get<std::string>();
    const std::string expected = expected_param_units().at(key);
    if (unit != expected)
      throw ConfigError(at + ".unit: expected \"" + expected + "\", found \"" + unit + "\"");
    slot = e["value"].get<double>();
  };
  read("co_engine", p.co_engine);
  read("co2_engine", p.co2_engine);
  read("fuel_engine", p.fuel_engine);
  read("v_engine", p.v_engine);
  read("fc", p.fc);
  read("m_fuel", p.m_fuel);
  read("m_air", p.m_air);
  read("r_stop", p.r_stop);
  for (const auto& [key, val] : j.items()) {
    (void)val;
    if (expected_param_units().find(key) == expected_param_units().end())
      throw ConfigError("$." + key + ": unknown emission parameter");
  }
  validate_emission_params(p);
  return p;
}

inline EmissionParams load_emission_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("emission params file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("emission params file " + path + ": " + e.what());
  }
  return parse_emission_params(j);
}

}  // namespace greenwave
