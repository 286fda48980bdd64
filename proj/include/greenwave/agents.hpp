#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenwave/neural.hpp"
#include "greenwave/rng.hpp"
#include "greenwave/scenario.hpp"
#include "greenwave/sim.hpp"

namespace greenwave {

// ---- grid adjacency --------------------------------------------------------

// Slot order: self, up, down, left, right, upper-left, lower-left,
// upper-right, lower-right. Missing neighbors are -1 and encode as zeros.
constexpr int kWindowSlots = 9;

struct NeighborWindow {
  int rows = 1;
  int cols = 1;
  std::vector<std::array<int, kWindowSlots>> slots;
};

inline NeighborWindow make_neighbor_window(int rows, int cols) {
  if (rows < 1 || cols < 1)
    throw std::invalid_argument("make_neighbor_window: grid must be at least 1x1");
  NeighborWindow w;
  w.rows = rows;
  w.cols = cols;
  w.slots.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  auto at = [&](int r, int c) -> int {
    if (r < 0 || r >= rows || c < 0 || c >= cols) return -1;
    return r * cols + c;
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      std::array<int, kWindowSlots>& s = w.slots[static_cast<std::size_t>(r * cols + c)];
      s[0] = at(r, c);
      s[1] = at(r - 1, c);
      s[2] = at(r + 1, c);
      s[3] = at(r, c - 1);
      s[4] = at(r, c + 1);
      s[5] = at(r - 1, c - 1);
      s[6] = at(r + 1, c - 1);
      s[7] = at(r - 1, c + 1);
      s[8] = at(r + 1, c + 1);
    }
  return w;
}

// ---- observation encoding ---------------------------------------------------

// Dimension bookkeeping for one agent family. Full mode sees every lane and
// phase; windowed mode sees fixed-width slots for self plus 8 neighbors,
// zero-filled where the grid has no intersection.
struct ObsLayout {
  int m_count = 0;
  int total_lanes = 0;
  int max_lanes = 0;
  bool windowed = false;
  NeighborWindow window;

  int state_dim() const {
    return windowed ? kWindowSlots * (max_lanes + 1) : total_lanes + m_count;
  }
  int action_dim() const { return windowed ? kWindowSlots : m_count; }
  int critic_dim() const { return state_dim() + action_dim(); }
  // position of intersection m's action inside the action block
  int action_slot(int m) const { return windowed ? 0 : m; }
};

inline ObsLayout make_layout(const ScenarioConfig& sc, bool windowed) {
  ObsLayout lo;
  lo.m_count = sc.intersection_count();
  lo.total_lanes = sc.total_lanes();
  lo.max_lanes = sc.max_lanes();
  lo.windowed = windowed;
  lo.window = make_neighbor_window(sc.grid_rows, sc.grid_cols);
  return lo;
}

inline double normalize_phase(const IntersectionSpec& spec, int phase) {
  const int count = spec.phase_count();
  return count > 1 ? static_cast<double>(phase) / static_cast<double>(count - 1) : 0.0;
}

inline double normalize_green(const IntersectionSpec& spec, double seconds) {
  const double span = spec.green_max - spec.green_min;
  return span > 0.0 ? (seconds - spec.green_min) / span : 0.0;
}

inline double denormalize_green(const IntersectionSpec& spec, double a01) {
  return spec.green_min + a01 * (spec.green_max - spec.green_min);
}

// Queue counts scaled by lane capacity, then phase indices; all in [0, 1].
// m selects the window center and is ignored in full mode.
inline std::vector<double> encode_state(const ScenarioConfig& sc, const ObsLayout& lo,
                                        const TrafficEnv::Snapshot& snap, int m) {
  std::vector<double> x;
  x.reserve(static_cast<std::size_t>(lo.state_dim()));
  if (!lo.windowed) {
    for (int i = 0; i < lo.m_count; ++i) {
      const IntersectionSpec& spec = sc.intersections[static_cast<std::size_t>(i)];
      const auto& stopped = snap.stopped[static_cast<std::size_t>(i)];
      for (int l = 0; l < spec.lane_count(); ++l)
        x.push_back(static_cast<double>(stopped[static_cast<std::size_t>(l)]) /
                    static_cast<double>(spec.lanes[static_cast<std::size_t>(l)].length_capacity));
    }
    for (int i = 0; i < lo.m_count; ++i)
      x.push_back(normalize_phase(sc.intersections[static_cast<std::size_t>(i)],
                                  snap.phases[static_cast<std::size_t>(i)]));
    return x;
  }
  const auto& slots = lo.window.slots[static_cast<std::size_t>(m)];
  for (int s = 0; s < kWindowSlots; ++s) {
    const int j = slots[static_cast<std::size_t>(s)];
    for (int l = 0; l < lo.max_lanes; ++l) {
      if (j < 0) {
        x.push_back(0.0);
        continue;
      }
      const IntersectionSpec& spec = sc.intersections[static_cast<std::size_t>(j)];
      if (l < spec.lane_count())
        x.push_back(
            static_cast<double>(snap.stopped[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)]) /
            static_cast<double>(spec.lanes[static_cast<std::size_t>(l)].length_capacity));
      else
        x.push_back(0.0);
    }
  }
  for (int s = 0; s < kWindowSlots; ++s) {
    const int j = slots[static_cast<std::size_t>(s)];
    x.push_back(j < 0 ? 0.0
                      : normalize_phase(sc.intersections[static_cast<std::size_t>(j)],
                                        snap.phases[static_cast<std::size_t>(j)]));
  }
  return x;
}

// Green durations in effect, normalized to [0, 1] per intersection bounds.
inline std::vector<double> encode_action(const ScenarioConfig& sc, const ObsLayout& lo,
                                         const std::vector<double>& greens_seconds, int m) {
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(lo.action_dim()));
  if (!lo.windowed) {
    for (int i = 0; i < lo.m_count; ++i)
      a.push_back(normalize_green(sc.intersections[static_cast<std::size_t>(i)],
                                  greens_seconds[static_cast<std::size_t>(i)]));
    return a;
  }
  const auto& slots = lo.window.slots[static_cast<std::size_t>(m)];
  for (int s = 0; s < kWindowSlots; ++s) {
    const int j = slots[static_cast<std::size_t>(s)];
    a.push_back(j < 0 ? 0.0
                      : normalize_green(sc.intersections[static_cast<std::size_t>(j)],
                                        greens_seconds[static_cast<std::size_t>(j)]));
  }
  return a;
}

// ---- agents ------------------------------------------------------------------

struct DdpgPair {
  DenseNet actor;
  DenseNet critic;
  DenseNet actor_target;
  DenseNet critic_target;
};

struct LocalAgent {
  int index = 0;
  DdpgPair nets;
};

// The global actor emits, per intersection, a suggested normalized green and
// an importance weight in (0, 1); the critic scores the joint action with the
// predicted (negated, scaled) network-wide waiting.
struct GlobalAgent {
  DdpgPair nets;
};

struct AgentHyper {
  double tau = 0.8;
  double gamma = 0.9;
  double lr_critic = 1e-3;
  double lr_actor = 1e-4;
  int batch_size = 64;
  double global_reward_scale = 2000.0;
  double decay_base = 0.95;
};

struct AgentSet {
  ScenarioConfig scenario;
  ObsLayout local_layout;
  ObsLayout global_layout;  // the global agent always sees the full network
  std::vector<LocalAgent> locals;
  bool has_global = false;
  GlobalAgent global;
  AgentHyper hyper;
  int episodes_trained = 0;
};

// logit of the starting global importance: weights begin at 0.8 before decay
inline double initial_weight_bias() { return std::log(0.8 / 0.2); }

inline AgentSet make_agent_set(const ScenarioConfig& sc, const TrainConfig& tc,
                               std::uint64_t seed) {
  AgentSet set;
  set.scenario = sc;
  set.local_layout = make_layout(sc, tc.use_window);
  set.global_layout = make_layout(sc, false);
  set.hyper.tau = tc.tau;
  set.hyper.gamma = tc.gamma;
  set.hyper.lr_critic = tc.lr_critic;
  set.hyper.lr_actor = tc.lr_actor;
  set.hyper.batch_size = tc.batch_size;
  set.hyper.global_reward_scale = tc.global_reward_scale;
  set.hyper.decay_base = tc.decay_base;
  set.has_global = tc.use_global;

  std::vector<std::size_t> hidden;
  for (int h : tc.hidden) hidden.push_back(static_cast<std::size_t>(h));
  auto sizes = [&hidden](int in, int out) {
    std::vector<std::size_t> s;
    s.push_back(static_cast<std::size_t>(in));
    for (std::size_t h : hidden) s.push_back(h);
    s.push_back(static_cast<std::size_t>(out));
    return s;
  };

  Rng rng(derive_seed(seed, 0xa6e7));
  const int m_count = sc.intersection_count();
  for (int m = 0; m < m_count; ++m) {
    LocalAgent agent;
    agent.index = m;
    agent.nets.actor =
        make_net(sizes(set.local_layout.state_dim(), 1), {Act::Tanh01}, rng);
    agent.nets.critic =
        make_net(sizes(set.local_layout.critic_dim(), 1), {Act::Linear}, rng);
    agent.nets.actor_target = agent.nets.actor;
    agent.nets.critic_target = agent.nets.critic;
    set.locals.push_back(std::move(agent));
  }

  if (set.has_global) {
    std::vector<Act> acts(static_cast<std::size_t>(2 * m_count), Act::Tanh01);
    for (int m = 0; m < m_count; ++m)
      acts[static_cast<std::size_t>(m_count + m)] = Act::Logistic;
    set.global.nets.actor =
        make_net(sizes(set.global_layout.state_dim(), 2 * m_count), acts, rng);
    // Weight heads start at exactly 0.8: zeroed final-layer rows with a fixed
    // bias. The joint critic never consumes the weights, so their gradient is
    // identically zero and the rows stay zero; the importance schedule is then
    // the pure decay curve.
    DenseNet& ga = set.global.nets.actor;
    const std::size_t last = ga.layer_count() - 1;
    const std::size_t in_n = ga.sizes[last];
    for (int m = 0; m < m_count; ++m) {
      const std::size_t j = static_cast<std::size_t>(m_count + m);
      for (std::size_t i = 0; i < in_n; ++i) ga.w[last][j * in_n + i] = 0.0;
      ga.b[last][j] = initial_weight_bias();
    }
    set.global.nets.critic =
        make_net(sizes(set.global_layout.state_dim() + m_count, 1), {Act::Linear}, rng);
    set.global.nets.actor_target = set.global.nets.actor;
    set.global.nets.critic_target = set.global.nets.critic;
  }
  return set;
}

// ---- transitions and replay --------------------------------------------------

// One decision interval of intersection `tag`: the observation snapshot when
// the green was chosen, the joint greens then in effect, the local rewards
// known at green end, the global reward sampled there, and the snapshot at
// the tag's next decision.
struct Transition {
  TrafficEnv::Snapshot s;
  TrafficEnv::Snapshot s_next;
  std::vector<double> greens;   // seconds in effect after the choice
  std::vector<double> rewards;  // latest local reward per intersection
  double global_reward = 0.0;
  int tag = 0;
};

class ReplayBuffer {
 public:
  ReplayBuffer(int m_count, int capacity) : capacity_(capacity) {
    if (m_count < 1) throw std::invalid_argument("ReplayBuffer: need at least one store");
    if (capacity < 1) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
    stores_.resize(static_cast<std::size_t>(m_count));
  }

  int store_count() const { return static_cast<int>(stores_.size()); }
  int capacity() const { return capacity_; }

  void insert(Transition tr) {
    if (tr.tag < 0 || tr.tag >= store_count())
      throw std::out_of_range("ReplayBuffer::insert: bad intersection tag");
    auto& store = stores_[static_cast<std::size_t>(tr.tag)];
    if (static_cast<int>(store.size()) == capacity_) store.pop_front();
    store.push_back(std::move(tr));
  }

  int size(int m) const {
    if (m < 0 || m >= store_count())
      throw std::out_of_range("ReplayBuffer::size: bad intersection tag");
    return static_cast<int>(stores_[static_cast<std::size_t>(m)].size());
  }

  int total_size() const {
    int n = 0;
    for (const auto& s : stores_) n += static_cast<int>(s.size());
    return n;
  }

  const Transition& at(int m, int i) const {
    return stores_[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)];
  }

  // Uniform without replacement from B_m; empty result signals "keep
  // collecting" when fewer than nb transitions are stored.
  std::vector<const Transition*> sample_local(int m, int nb, Rng& rng) const {
    const auto& store = stores_[static_cast<std::size_t>(m)];
    if (static_cast<int>(store.size()) < nb) return {};
    std::vector<int> idx(store.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<const Transition*> out;
    out.reserve(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const std::size_t pick =
          static_cast<std::size_t>(k) + rng.below(idx.size() - static_cast<std::size_t>(k));
      std::swap(idx[static_cast<std::size_t>(k)], idx[pick]);
      out.push_back(&store[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])]);
    }
    return out;
  }

  // Uniform without replacement over the union of all stores.
  std::vector<const Transition*> sample_union(int nb, Rng& rng) const {
    const int total = total_size();
    if (total < nb) return {};
    std::vector<int> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<const Transition*> out;
    out.reserve(static_cast<std::size_t>(nb));
    for (int k = 0; k < nb; ++k) {
      const std::size_t pick =
          static_cast<std::size_t>(k) + rng.below(idx.size() - static_cast<std::size_t>(k));
      std::swap(idx[static_cast<std::size_t>(k)], idx[pick]);
      int flat = idx[static_cast<std::size_t>(k)];
      for (std::size_t m = 0; m < stores_.size(); ++m) {
        const int n = static_cast<int>(stores_[m].size());
        if (flat < n) {
          out.push_back(&stores_[m][static_cast<std::size_t>(flat)]);
          break;
        }
        flat -= n;
      }
    }
    return out;
  }

 private:
  std::vector<std::deque<Transition>> stores_;
  int capacity_;
};

// ---- targets and losses --------------------------------------------------------

inline std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// y = r_m + gamma * Q'(S', a' with the tag slot replayed through the target actor)
inline double critic_target_local(const AgentSet& set, const LocalAgent& agent,
                                  const Transition& tr) {
  const ScenarioConfig& sc = set.scenario;
  const ObsLayout& lo = set.local_layout;
  const int m = agent.index;
  std::vector<double> s_next = encode_state(sc, lo, tr.s_next, m);
  std::vector<double> a_next = encode_action(sc, lo, tr.s_next.greens, m);
  const double mu = forward(agent.nets.actor_target, s_next).output()[0];
  a_next[static_cast<std::size_t>(lo.action_slot(m))] = mu;
  const double q = forward(agent.nets.critic_target, concat(s_next, a_next)).output()[0];
  return tr.rewards[static_cast<std::size_t>(m)] + set.hyper.gamma * q;
}

// y_G = r_G/scale + gamma * Q_G'(S', mu_G'(S') action half)
inline double critic_target_global(const AgentSet& set, const Transition& tr) {
  const ScenarioConfig& sc = set.scenario;
  const ObsLayout& lo = set.global_layout;
  const int m_count = lo.m_count;
  std::vector<double> s_next = encode_state(sc, lo, tr.s_next, 0);
  const std::vector<double> outs = forward(set.global.nets.actor_target, s_next).output();
  std::vector<double> a_next(outs.begin(), outs.begin() + m_count);
  const double q =
      forward(set.global.nets.critic_target, concat(s_next, a_next)).output()[0];
  return tr.global_reward / set.hyper.global_reward_scale + set.hyper.gamma * q;
}

struct LossPair {
  double critic = 0.0;
  double actor = 0.0;
};

// critic: (1/N) sum (y - Q(S, A))^2 ; actor: -(1/N) sum Q(S, mu(S))
inline LossPair local_losses(const AgentSet& set, const LocalAgent& agent,
                             const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw std::invalid_argument("local_losses: empty minibatch");
  const ScenarioConfig& sc = set.scenario;
  const ObsLayout& lo = set.local_layout;
  const int m = agent.index;
  LossPair loss;
  for (const Transition* tr : batch) {
    const std::vector<double> s = encode_state(sc, lo, tr->s, m);
    std::vector<double> a = encode_action(sc, lo, tr->greens, m);
    const double y = critic_target_local(set, agent, *tr);
    const double q = forward(agent.nets.critic, concat(s, a)).output()[0];
    loss.critic += (y - q) * (y - q);
    const double mu = forward(agent.nets.actor, s).output()[0];
    a[static_cast<std::size_t>(lo.action_slot(m))] = mu;
    loss.actor -= forward(agent.nets.critic, concat(s, a)).output()[0];
  }
  const double n = static_cast<double>(batch.size());
  loss.critic /= n;
  loss.actor /= n;
  return loss;
}

inline LossPair global_losses(const AgentSet& set,
                              const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw std::invalid_argument("global_losses: empty minibatch");
  if (!set.has_global) throw std::logic_error("global_losses: no global agent");
  const ScenarioConfig& sc = set.scenario;
  const ObsLayout& lo = set.global_layout;
  const int m_count = lo.m_count;
  LossPair loss;
  for (const Transition* tr : batch) {
    const std::vector<double> s = encode_state(sc, lo, tr->s, 0);
    const std::vector<double> a = encode_action(sc, lo, tr->greens, 0);
    const double y = critic_target_global(set, *tr);
    const double q = forward(set.global.nets.critic, concat(s, a)).output()[0];
    loss.critic += (y - q) * (y - q);
    const std::vector<double> outs = forward(set.global.nets.actor, s).output();
    std::vector<double> mu(outs.begin(), outs.begin() + m_count);
    loss.actor -= forward(set.global.nets.critic, concat(s, mu)).output()[0];
  }
  const double n = static_cast<double>(batch.size());
  loss.critic /= n;
  loss.actor /= n;
  return loss;
}

// ---- arbitration ----------------------------------------------------------------

struct Arbitration {
  double chosen_seconds = 0.0;
  bool used_global = false;
  double effective_weight = 0.0;
};

// Effective importance w = W_G * base^t against the complementary local
// weight: global wins strictly above one half, ties go local.
inline Arbitration arbitrate_action(double local_seconds, double global_seconds,
                                    double w_g, int t, double decay_base = 0.95) {
  if (!(w_g > 0.0 && w_g < 1.0))
    throw std::invalid_argument("arbitrate_action: weight must lie in (0, 1)");
  if (t < 0) throw std::invalid_argument("arbitrate_action: negative decay index");
  Arbitration arb;
  arb.effective_weight = w_g * std::pow(decay_base, static_cast<double>(t));
  arb.used_global = arb.effective_weight > 0.5;
  arb.chosen_seconds = arb.used_global ? global_seconds : local_seconds;
  return arb;
}

// Smallest t with W_G * base^t <= 0.5: beyond it arbitration is always local.
inline int decay_horizon(double w_g, double decay_base = 0.95) {
  int t = 0;
  double w = w_g;
  while (w > 0.5 && t < 100000) {
    w *= decay_base;
    ++t;
  }
  return t;
}

// ---- checkpoints -----------------------------------------------------------------

inline void save_agents(const AgentSet& set, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto path = [&dir](const std::string& name) { return dir + "/" + name; };
  for (const LocalAgent& agent : set.locals) {
    const std::string stem = "local_" + std::to_string(agent.index) + "_";
    save_net(agent.nets.actor, path(stem + "actor.net"));
    save_net(agent.nets.critic, path(stem + "critic.net"));
    save_net(agent.nets.actor_target, path(stem + "actor_target.net"));
    save_net(agent.nets.critic_target, path(stem + "critic_target.net"));
  }
  if (set.has_global) {
    save_net(set.global.nets.actor, path("global_actor.net"));
    save_net(set.global.nets.critic, path("global_critic.net"));
    save_net(set.global.nets.actor_target, path("global_actor_target.net"));
    save_net(set.global.nets.critic_target, path("global_critic_target.net"));
  }
  nlohmann::json manifest;
  manifest["kind"] = "ddpg";
  manifest["intersections"] = set.scenario.intersection_count();
  manifest["windowed"] = set.local_layout.windowed;
  manifest["local_state_dim"] = set.local_layout.state_dim();
  manifest["global_state_dim"] = set.global_layout.state_dim();
  manifest["has_global"] = set.has_global;
  manifest["tau"] = set.hyper.tau;
  manifest["gamma"] = set.hyper.gamma;
  manifest["global_reward_scale"] = set.hyper.global_reward_scale;
  manifest["decay_base"] = set.hyper.decay_base;
  manifest["episodes_trained"] = set.episodes_trained;
  manifest["scenario_name"] = set.scenario.name;
  std::ofstream out(path("manifest.json"), std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << '\n';
}

// Marker checkpoint for the constant-duration policy, consumable by the
// evaluate path.
inline void save_fixed_checkpoint(const std::string& dir, const std::string& scenario_name) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["kind"] = "fixed";
  manifest["scenario_name"] = scenario_name;
  std::ofstream out(dir + "/manifest.json", std::ios::binary | std::ios::trunc);
  out << manifest.dump(2) << '\n';
}

struct CheckpointInfo {
  std::string kind;  // "ddpg" or "fixed"
  nlohmann::json manifest;
};

inline CheckpointInfo read_checkpoint_manifest(const std::string& dir) {
  const std::string path = dir + "/manifest.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("checkpoint manifest not found: " + path);
  CheckpointInfo info;
  try {
    in >> info.manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint manifest " + path + ": " + e.what());
  }
  if (!info.manifest.contains("kind") || !info.manifest["kind"].is_string())
    throw ConfigError("checkpoint manifest " + path + ": missing kind");
  info.kind = info.manifest["kind"].get<std::string>();
  return info;
}

inline AgentSet load_agents(const std::string& dir, const ScenarioConfig& sc) {
  const CheckpointInfo info = read_checkpoint_manifest(dir);
  if (info.kind != "ddpg")
    throw ConfigError("checkpoint " + dir + ": kind '" + info.kind + "' has no networks");
  const nlohmann::json& man = info.manifest;
  const int m_count = man.at("intersections").get<int>();
  if (m_count != sc.intersection_count())
    throw ConfigError("checkpoint " + dir + ": trained on " + std::to_string(m_count) +
                      " intersections, scenario has " +
                      std::to_string(sc.intersection_count()));
  AgentSet set;
  set.scenario = sc;
  set.local_layout = make_layout(sc, man.at("windowed").get<bool>());
  set.global_layout = make_layout(sc, false);
  set.has_global = man.at("has_global").get<bool>();
  set.hyper.tau = man.at("tau").get<double>();
  set.hyper.gamma = man.at("gamma").get<double>();
  set.hyper.global_reward_scale = man.at("global_reward_scale").get<double>();
  set.hyper.decay_base = man.at("decay_base").get<double>();
  set.episodes_trained = man.at("episodes_trained").get<int>();
  auto path = [&dir](const std::string& name) { return dir + "/" + name; };
  for (int m = 0; m < m_count; ++m) {
    LocalAgent agent;
    agent.index = m;
    const std::string stem = "local_" + std::to_string(m) + "_";
    agent.nets.actor = load_net(path(stem + "actor.net"));
    agent.nets.critic = load_net(path(stem + "critic.net"));
    agent.nets.actor_target = load_net(path(stem + "actor_target.net"));
    agent.nets.critic_target = load_net(path(stem + "critic_target.net"));
    if (static_cast<int>(agent.nets.actor.input_dim()) != set.local_layout.state_dim())
      throw ConfigError("checkpoint " + dir + ": local actor expects input " +
                        std::to_string(agent.nets.actor.input_dim()) +
                        ", scenario produces " +
                        std::to_string(set.local_layout.state_dim()));
    set.locals.push_back(std::move(agent));
  }
  if (set.has_global) {
    set.global.nets.actor = load_net(path("global_actor.net"));
    set.global.nets.critic = load_net(path("global_critic.net"));
    set.global.nets.actor_target = load_net(path("global_actor_target.net"));
    set.global.nets.critic_target = load_net(path("global_critic_target.net"));
    if (static_cast<int>(set.global.nets.actor.input_dim()) != set.global_layout.state_dim())
      throw ConfigError("checkpoint " + dir + ": global actor expects input " +
                        std::to_string(set.global.nets.actor.input_dim()) +
                        ", scenario produces " +
                        std::to_string(set.global_layout.state_dim()));
  }
  return set;
}

}  // namespace greenwave
