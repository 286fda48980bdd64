#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "greenwave/agents.hpp"

namespace gw = greenwave;

namespace {

gw::ScenarioConfig cross_scenario(int count) {
  gw::ScenarioConfig sc;
  sc.name = "cross";
  sc.grid_cols = count;
  for (int m = 0; m < count; ++m) {
    gw::IntersectionSpec itx;
    itx.lanes = {gw::LaneSpec{}, gw::LaneSpec{}};
    itx.phases = {{0}, {1}};
    sc.intersections.push_back(itx);
  }
  return sc;
}

gw::TrafficEnv::Snapshot snapshot_of(const gw::ScenarioConfig& sc,
                                     const std::vector<std::vector<int>>& stopped,
                                     const std::vector<int>& phases,
                                     const std::vector<double>& greens) {
  gw::TrafficEnv::Snapshot s;
  s.stopped = stopped;
  s.phases = phases;
  s.greens = greens;
  (void)sc;
  return s;
}

gw::Transition make_transition(const gw::ScenarioConfig& sc, int tag,
                               const std::vector<double>& rewards, double global_r) {
  const int m_count = sc.intersection_count();
  std::vector<std::vector<int>> stopped;
  std::vector<int> phases;
  std::vector<double> greens;
  for (int m = 0; m < m_count; ++m) {
    stopped.push_back(std::vector<int>(
        static_cast<std::size_t>(sc.intersections[static_cast<std::size_t>(m)].lane_count()), 0));
    phases.push_back(0);
    greens.push_back(sc.intersections[static_cast<std::size_t>(m)].green_min);
  }
  gw::Transition tr;
  tr.s = snapshot_of(sc, stopped, phases, greens);
  tr.s_next = tr.s;
  tr.greens = greens;
  tr.rewards = rewards;
  tr.global_reward = global_r;
  tr.tag = tag;
  return tr;
}

// Zero every parameter, then pin the final-layer biases so the net is the
// constant c (before the output activation).
void make_constant(gw::DenseNet& net, double c) {
  for (auto& layer : net.w) layer.assign(layer.size(), 0.0);
  for (auto& layer : net.b) layer.assign(layer.size(), 0.0);
  net.b.back().assign(net.b.back().size(), c);
}

gw::TrainConfig small_train(double gamma) {
  gw::TrainConfig tc;
  tc.hidden = {4};
  tc.gamma = gamma;
  return tc;
}

}  // namespace

TEST(NeighborWindow, SingleCellHasOnlyItself) {
  const gw::NeighborWindow w = gw::make_neighbor_window(1, 1);
  ASSERT_EQ(w.slots.size(), 1u);
  const std::array<int, gw::kWindowSlots> want = {0, -1, -1, -1, -1, -1, -1, -1, -1};
  EXPECT_EQ(w.slots[0], want);
  EXPECT_THROW(gw::make_neighbor_window(0, 1), std::invalid_argument);
  EXPECT_THROW(gw::make_neighbor_window(1, 0), std::invalid_argument);
}

TEST(NeighborWindow, ThreeByThreeCenterAndCorner) {
  const gw::NeighborWindow w = gw::make_neighbor_window(3, 3);
  ASSERT_EQ(w.slots.size(), 9u);
  const std::array<int, gw::kWindowSlots> center = {4, 1, 7, 3, 5, 0, 6, 2, 8};
  EXPECT_EQ(w.slots[4], center);
  const std::array<int, gw::kWindowSlots> corner = {0, -1, 3, -1, 1, -1, -1, -1, 4};
  EXPECT_EQ(w.slots[0], corner);
}

TEST(ObsLayout, DimensionBookkeeping) {
  const gw::ScenarioConfig sc = cross_scenario(3);
  const gw::ObsLayout full = gw::make_layout(sc, false);
  EXPECT_EQ(full.state_dim(), 6 + 3);  // lanes then phase indices
  EXPECT_EQ(full.action_dim(), 3);
  EXPECT_EQ(full.critic_dim(), 12);
  EXPECT_EQ(full.action_slot(2), 2);
  const gw::ObsLayout win = gw::make_layout(sc, true);
  EXPECT_EQ(win.state_dim(), gw::kWindowSlots * (2 + 1));
  EXPECT_EQ(win.action_dim(), gw::kWindowSlots);
  EXPECT_EQ(win.action_slot(2), 0);
}

TEST(Normalization, GreenAndPhaseMaps) {
  const gw::ScenarioConfig sc = cross_scenario(1);
  const gw::IntersectionSpec& itx = sc.intersections[0];
  EXPECT_DOUBLE_EQ(gw::normalize_green(itx, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(gw::normalize_green(itx, 60.0), 1.0);
  EXPECT_DOUBLE_EQ(gw::normalize_green(itx, 30.0), 25.0 / 55.0);
  EXPECT_DOUBLE_EQ(gw::denormalize_green(itx, 0.0), 5.0);
  EXPECT_DOUBLE_EQ(gw::denormalize_green(itx, 1.0), 60.0);
  for (const double g : {5.0, 17.0, 42.5, 60.0})
    EXPECT_NEAR(gw::denormalize_green(itx, gw::normalize_green(itx, g)), g, 1e-12);
  EXPECT_DOUBLE_EQ(gw::normalize_phase(itx, 0), 0.0);
  EXPECT_DOUBLE_EQ(gw::normalize_phase(itx, 1), 1.0);
  gw::IntersectionSpec mono = itx;
  mono.phases = {{0, 1}};
  EXPECT_DOUBLE_EQ(gw::normalize_phase(mono, 0), 0.0);
}

TEST(EncodeState, FullModeLaysOutLanesThenPhases) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  const gw::ObsLayout lo = gw::make_layout(sc, false);
  const auto snap = snapshot_of(sc, {{10, 20}, {5, 0}}, {0, 1}, {5.0, 8.0});
  const std::vector<double> x = gw::encode_state(sc, lo, snap, 0);
  const std::vector<double> want = {10.0 / 200.0, 20.0 / 200.0, 5.0 / 200.0, 0.0, 0.0, 1.0};
  EXPECT_EQ(x, want);
  // m is ignored in full mode
  EXPECT_EQ(gw::encode_state(sc, lo, snap, 1), want);
  const std::vector<double> a = gw::encode_action(sc, lo, snap.greens, 0);
  const std::vector<double> want_a = {0.0, 3.0 / 55.0};
  EXPECT_EQ(a, want_a);
}

TEST(EncodeState, WindowedModeZeroFillsMissingNeighbors) {
  const gw::ScenarioConfig sc = cross_scenario(2);  // 1x2 grid
  const gw::ObsLayout lo = gw::make_layout(sc, true);
  const auto snap = snapshot_of(sc, {{10, 20}, {5, 0}}, {0, 1}, {5.0, 8.0});
  const std::vector<double> x = gw::encode_state(sc, lo, snap, 0);
  ASSERT_EQ(x.size(), 27u);
  // slot 0 is self, slot 4 is the right-hand neighbor, the rest are absent
  EXPECT_DOUBLE_EQ(x[0], 10.0 / 200.0);
  EXPECT_DOUBLE_EQ(x[1], 20.0 / 200.0);
  EXPECT_DOUBLE_EQ(x[8], 5.0 / 200.0);
  EXPECT_DOUBLE_EQ(x[9], 0.0);
  for (const std::size_t i : {2u, 3u, 4u, 5u, 6u, 7u, 10u, 11u, 12u, 13u, 14u, 15u, 16u, 17u})
    EXPECT_DOUBLE_EQ(x[i], 0.0);
  // phase block: self then right neighbor
  EXPECT_DOUBLE_EQ(x[18], 0.0);
  EXPECT_DOUBLE_EQ(x[22], 1.0);
  // centered on the second intersection, self and left swap roles
  const std::vector<double> y = gw::encode_state(sc, lo, snap, 1);
  EXPECT_DOUBLE_EQ(y[0], 5.0 / 200.0);
  EXPECT_DOUBLE_EQ(y[6], 10.0 / 200.0);  // slot 3 = left, lane 0
  EXPECT_DOUBLE_EQ(y[7], 20.0 / 200.0);
  const std::vector<double> a = gw::encode_action(sc, lo, snap.greens, 0);
  ASSERT_EQ(a.size(), 9u);
  EXPECT_DOUBLE_EQ(a[0], 0.0);
  EXPECT_DOUBLE_EQ(a[4], 3.0 / 55.0);
  EXPECT_DOUBLE_EQ(a[1], 0.0);
}

TEST(MakeAgentSet, ShapesActivationsAndTargetInit) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  const gw::AgentSet set = gw::make_agent_set(sc, small_train(0.9), 7);
  ASSERT_EQ(set.locals.size(), 2u);
  EXPECT_TRUE(set.has_global);
  const gw::LocalAgent& a0 = set.locals[0];
  const std::vector<std::size_t> actor_sizes = {6u, 4u, 1u};
  EXPECT_EQ(a0.nets.actor.sizes, actor_sizes);
  EXPECT_EQ(a0.nets.actor.out_acts, std::vector<gw::Act>{gw::Act::Tanh01});
  const std::vector<std::size_t> critic_sizes = {8u, 4u, 1u};
  EXPECT_EQ(a0.nets.critic.sizes, critic_sizes);
  EXPECT_EQ(a0.nets.critic.out_acts, std::vector<gw::Act>{gw::Act::Linear});
  EXPECT_EQ(a0.nets.actor_target.w, a0.nets.actor.w);
  EXPECT_EQ(a0.nets.actor_target.b, a0.nets.actor.b);
  EXPECT_EQ(a0.nets.critic_target.w, a0.nets.critic.w);
  // distinct agents draw distinct parameters
  EXPECT_NE(set.locals[1].nets.actor.w, a0.nets.actor.w);
  // global actor: a green head and a weight head per intersection
  const gw::DenseNet& ga = set.global.nets.actor;
  ASSERT_EQ(ga.out_acts.size(), 4u);
  EXPECT_EQ(ga.out_acts[0], gw::Act::Tanh01);
  EXPECT_EQ(ga.out_acts[1], gw::Act::Tanh01);
  EXPECT_EQ(ga.out_acts[2], gw::Act::Logistic);
  EXPECT_EQ(ga.out_acts[3], gw::Act::Logistic);
  const std::vector<std::size_t> gc_sizes = {6u + 2u, 4u, 1u};
  EXPECT_EQ(set.global.nets.critic.sizes, gc_sizes);
  // same seed rebuilds the same parameters
  const gw::AgentSet again = gw::make_agent_set(sc, small_train(0.9), 7);
  EXPECT_EQ(again.locals[0].nets.actor.w, a0.nets.actor.w);
  EXPECT_EQ(again.global.nets.critic.b, set.global.nets.critic.b);
}

TEST(MakeAgentSet, WeightHeadsAreConstantAtInitialImportance) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  const gw::AgentSet set = gw::make_agent_set(sc, small_train(0.9), 11);
  const gw::DenseNet& ga = set.global.nets.actor;
  const std::size_t last = ga.layer_count() - 1;
  const std::size_t in_n = ga.sizes[last];
  for (int m = 0; m < 2; ++m) {
    const std::size_t j = static_cast<std::size_t>(2 + m);
    for (std::size_t i = 0; i < in_n; ++i)
      EXPECT_EQ(ga.w[last][j * in_n + i], 0.0);
    EXPECT_DOUBLE_EQ(ga.b[last][j], gw::initial_weight_bias());
  }
  EXPECT_NEAR(gw::initial_weight_bias(), std::log(4.0), 1e-14);
  gw::Rng rng(3);
  std::vector<double> first;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x;
    for (int i = 0; i < set.global_layout.state_dim(); ++i)
      x.push_back(rng.uniform01());
    const std::vector<double> out = gw::forward(ga, x).output();
    if (trial == 0) {
      first = out;
      EXPECT_NEAR(out[2], 0.8, 1e-12);
      EXPECT_NEAR(out[3], 0.8, 1e-12);
    }
    // zeroed rows make the weight heads input-independent
    EXPECT_EQ(out[2], first[2]);
    EXPECT_EQ(out[3], first[3]);
  }
}

TEST(ReplayBuffer, StoresAreTagPureAndFifo) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  gw::ReplayBuffer buf(2, 3);
  EXPECT_EQ(buf.store_count(), 2);
  EXPECT_EQ(buf.capacity(), 3);
  for (int i = 0; i < 4; ++i)
    buf.insert(make_transition(sc, 0, {1.0, 2.0}, static_cast<double>(i)));
  buf.insert(make_transition(sc, 1, {1.0, 2.0}, 100.0));
  EXPECT_EQ(buf.size(0), 3);  // oldest evicted
  EXPECT_EQ(buf.size(1), 1);
  EXPECT_EQ(buf.total_size(), 4);
  EXPECT_DOUBLE_EQ(buf.at(0, 0).global_reward, 1.0);
  EXPECT_DOUBLE_EQ(buf.at(0, 2).global_reward, 3.0);
  gw::Rng rng(9);
  for (const gw::Transition* tr : buf.sample_local(0, 3, rng))
    EXPECT_EQ(tr->tag, 0);
  gw::Transition bad = make_transition(sc, 0, {0.0, 0.0}, 0.0);
  bad.tag = 2;
  EXPECT_THROW(buf.insert(bad), std::out_of_range);
  EXPECT_THROW(buf.size(-1), std::out_of_range);
  EXPECT_THROW(gw::ReplayBuffer(0, 5), std::invalid_argument);
  EXPECT_THROW(gw::ReplayBuffer(2, 0), std::invalid_argument);
}

TEST(ReplayBuffer, SamplingIsUniformWithoutReplacementAndSeeded) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  gw::ReplayBuffer buf(2, 100);
  for (int i = 0; i < 6; ++i)
    buf.insert(make_transition(sc, i % 2, {0.0, 0.0}, static_cast<double>(i)));
  // under-filled store signals "keep collecting"
  gw::Rng r0(1);
  EXPECT_TRUE(buf.sample_local(0, 4, r0).empty());
  gw::Rng r1(5), r2(5);
  const auto s1 = buf.sample_local(0, 3, r1);
  const auto s2 = buf.sample_local(0, 3, r2);
  ASSERT_EQ(s1.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_DOUBLE_EQ(s1[i]->global_reward, s2[i]->global_reward);
  // drawing the full store yields each element exactly once
  std::vector<double> seen;
  for (const gw::Transition* tr : s1) seen.push_back(tr->global_reward);
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, (std::vector<double>{0.0, 2.0, 4.0}));
  gw::Rng r3(6);
  const auto all = buf.sample_union(6, r3);
  ASSERT_EQ(all.size(), 6u);
  seen.clear();
  for (const gw::Transition* tr : all) seen.push_back(tr->global_reward);
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, (std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0, 5.0}));
  gw::Rng r4(7);
  EXPECT_TRUE(buf.sample_union(7, r4).empty());
}

TEST(CriticTarget, LocalDiscountsTargetCriticValue) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  gw::AgentSet set = gw::make_agent_set(sc, small_train(0.9), 13);
  gw::LocalAgent& agent = set.locals[0];
  make_constant(agent.nets.critic_target, 2.0);
  const gw::Transition tr = make_transition(sc, 0, {1.0, -4.0}, 0.0);
  EXPECT_DOUBLE_EQ(gw::critic_target_local(set, agent, tr), 1.0 + 0.9 * 2.0);
  // gamma 0 reduces the target to the immediate reward
  set.hyper.gamma = 0.0;
  EXPECT_DOUBLE_EQ(gw::critic_target_local(set, agent, tr), 1.0);
  // the second agent reads its own reward slot
  gw::LocalAgent& other = set.locals[1];
  make_constant(other.nets.critic_target, 2.0);
  EXPECT_DOUBLE_EQ(gw::critic_target_local(set, other, tr), -4.0);
}

TEST(CriticTarget, UsesOnlyTargetNetworks) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  gw::AgentSet set = gw::make_agent_set(sc, small_train(0.9), 17);
  gw::LocalAgent& agent = set.locals[0];
  const gw::Transition tr = make_transition(sc, 0, {0.5, 0.0}, 0.0);
  const double before = gw::critic_target_local(set, agent, tr);
  make_constant(agent.nets.critic, 99.0);  // live nets must not matter
  make_constant(agent.nets.actor, 99.0);
  EXPECT_DOUBLE_EQ(gw::critic_target_local(set, agent, tr), before);
  make_constant(agent.nets.critic_target, 1.0);
  EXPECT_NE(gw::critic_target_local(set, agent, tr), before);
}

TEST(LocalLosses, HandValuesWithConstantCritics) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  gw::AgentSet set = gw::make_agent_set(sc, small_train(0.0), 19);
  set.hyper.gamma = 0.0;
  gw::LocalAgent& agent = set.locals[0];
  make_constant(agent.nets.critic, 0.0);
  make_constant(agent.nets.critic_target, 0.0);
  const gw::Transition plus = make_transition(sc, 0, {1.0, 0.0}, 0.0);
  const gw::Transition minus = make_transition(sc, 0, {-1.0, 0.0}, 0.0);
  const gw::LossPair two = gw::local_losses(set, agent, {&plus, &minus});
  EXPECT_DOUBLE_EQ(two.critic, 1.0);  // residuals +1 and -1
  EXPECT_DOUBLE_EQ(two.actor, 0.0);
  const gw::Transition three = make_transition(sc, 0, {3.0, 0.0}, 0.0);
  const gw::LossPair one = gw::local_losses(set, agent, {&three});
  EXPECT_DOUBLE_EQ(one.critic, 9.0);
  make_constant(agent.nets.critic, -100.0);
  const gw::LossPair pess = gw::local_losses(set, agent, {&plus});
  EXPECT_DOUBLE_EQ(pess.actor, 100.0);  // -(mean Q) with Q constant at -100
  EXPECT_DOUBLE_EQ(pess.critic, 101.0 * 101.0);
  EXPECT_THROW(gw::local_losses(set, agent, {}), std::invalid_argument);
}

TEST(GlobalLosses, ScaledRewardAndGuards) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  gw::AgentSet set = gw::make_agent_set(sc, small_train(0.0), 23);
  set.hyper.gamma = 0.0;
  set.hyper.global_reward_scale = 2000.0;
  make_constant(set.global.nets.critic, 0.0);
  make_constant(set.global.nets.critic_target, 0.0);
  const gw::Transition tr = make_transition(sc, 0, {0.0, 0.0}, -2000.0);
  EXPECT_DOUBLE_EQ(gw::critic_target_global(set, tr), -1.0);
  const gw::LossPair loss = gw::global_losses(set, {&tr});
  EXPECT_DOUBLE_EQ(loss.critic, 1.0);
  EXPECT_DOUBLE_EQ(loss.actor, 0.0);
  EXPECT_THROW(gw::global_losses(set, {}), std::invalid_argument);
  gw::AgentSet solo = gw::make_agent_set(sc, [] {
    gw::TrainConfig tc;
    tc.hidden = {4};
    tc.use_global = false;
    return tc;
  }(), 23);
  EXPECT_THROW(gw::global_losses(solo, {&tr}), std::logic_error);
}

TEST(Arbitration, DecayedImportanceAgainstLocal) {
  // fresh weight wins
  gw::Arbitration arb = gw::arbitrate_action(10.0, 20.0, 0.8, 0);
  EXPECT_TRUE(arb.used_global);
  EXPECT_DOUBLE_EQ(arb.chosen_seconds, 20.0);
  EXPECT_DOUBLE_EQ(arb.effective_weight, 0.8);
  // nine episodes in, 0.8 * 0.95^9 = 0.504 still wins
  arb = gw::arbitrate_action(10.0, 20.0, 0.8, 9);
  EXPECT_TRUE(arb.used_global);
  EXPECT_NEAR(arb.effective_weight, 0.8 * std::pow(0.95, 9.0), 1e-15);
  // ten episodes in, 0.479 hands control to the local agent
  arb = gw::arbitrate_action(10.0, 20.0, 0.8, 10);
  EXPECT_FALSE(arb.used_global);
  EXPECT_DOUBLE_EQ(arb.chosen_seconds, 10.0);
  // exact tie goes local
  arb = gw::arbitrate_action(10.0, 20.0, 0.5, 0);
  EXPECT_FALSE(arb.used_global);
  EXPECT_DOUBLE_EQ(arb.chosen_seconds, 10.0);
  EXPECT_THROW(gw::arbitrate_action(10.0, 20.0, 0.0, 0), std::invalid_argument);
  EXPECT_THROW(gw::arbitrate_action(10.0, 20.0, 1.0, 0), std::invalid_argument);
  EXPECT_THROW(gw::arbitrate_action(10.0, 20.0, 0.8, -1), std::invalid_argument);
}

TEST(Arbitration, DecayHorizonMatchesHandValues) {
  EXPECT_EQ(gw::decay_horizon(0.8, 0.95), 10);
  EXPECT_EQ(gw::decay_horizon(0.5, 0.95), 0);
  EXPECT_EQ(gw::decay_horizon(0.8, 0.5), 1);
  for (int t = gw::decay_horizon(0.8, 0.95); t < 20; ++t)
    EXPECT_FALSE(gw::arbitrate_action(1.0, 2.0, 0.8, t).used_global);
  EXPECT_TRUE(gw::arbitrate_action(1.0, 2.0, 0.8, gw::decay_horizon(0.8, 0.95) - 1).used_global);
}

TEST(Checkpoint, RoundTripRestoresEveryNetwork) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  gw::AgentSet set = gw::make_agent_set(sc, small_train(0.9), 29);
  set.episodes_trained = 7;
  const std::string dir = ::testing::TempDir() + "ckpt_roundtrip";
  gw::save_agents(set, dir);
  const gw::CheckpointInfo info = gw::read_checkpoint_manifest(dir);
  EXPECT_EQ(info.kind, "ddpg");
  EXPECT_EQ(info.manifest.at("scenario_name").get<std::string>(), "cross");
  const gw::AgentSet back = gw::load_agents(dir, sc);
  EXPECT_EQ(back.episodes_trained, 7);
  EXPECT_TRUE(back.has_global);
  EXPECT_DOUBLE_EQ(back.hyper.tau, set.hyper.tau);
  EXPECT_DOUBLE_EQ(back.hyper.gamma, set.hyper.gamma);
  EXPECT_DOUBLE_EQ(back.hyper.global_reward_scale, set.hyper.global_reward_scale);
  EXPECT_DOUBLE_EQ(back.hyper.decay_base, set.hyper.decay_base);
  ASSERT_EQ(back.locals.size(), 2u);
  for (std::size_t m = 0; m < 2; ++m) {
    EXPECT_EQ(back.locals[m].nets.actor.w, set.locals[m].nets.actor.w);
    EXPECT_EQ(back.locals[m].nets.critic.b, set.locals[m].nets.critic.b);
    EXPECT_EQ(back.locals[m].nets.actor_target.w, set.locals[m].nets.actor_target.w);
    EXPECT_EQ(back.locals[m].nets.critic_target.w, set.locals[m].nets.critic_target.w);
  }
  EXPECT_EQ(back.global.nets.actor.w, set.global.nets.actor.w);
  EXPECT_EQ(back.global.nets.critic.w, set.global.nets.critic.w);
}

TEST(Checkpoint, LocalOnlySetSkipsGlobalFiles) {
  const gw::ScenarioConfig sc = cross_scenario(1);
  gw::TrainConfig tc = small_train(0.9);
  tc.use_global = false;
  const gw::AgentSet set = gw::make_agent_set(sc, tc, 31);
  const std::string dir = ::testing::TempDir() + "ckpt_local_only";
  gw::save_agents(set, dir);
  EXPECT_FALSE(std::filesystem::exists(dir + "/global_actor.net"));
  const gw::AgentSet back = gw::load_agents(dir, sc);
  EXPECT_FALSE(back.has_global);
  EXPECT_EQ(back.locals[0].nets.actor.w, set.locals[0].nets.actor.w);
}

TEST(Checkpoint, MismatchesAreRefusedWithDiagnostics) {
  const gw::ScenarioConfig sc = cross_scenario(2);
  const gw::AgentSet set = gw::make_agent_set(sc, small_train(0.9), 37);
  const std::string dir = ::testing::TempDir() + "ckpt_mismatch";
  gw::save_agents(set, dir);
  try {
    gw::load_agents(dir, cross_scenario(1));
    FAIL() << "expected ConfigError";
  } catch (const gw::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("trained on 2 intersections"), std::string::npos);
  }
  // same intersection count, incompatible lane layout
  gw::ScenarioConfig wider = cross_scenario(2);
  wider.intersections[0].lanes.push_back(gw::LaneSpec{});
  wider.intersections[0].phases = {{0}, {1, 2}};
  try {
    gw::load_agents(dir, wider);
    FAIL() << "expected ConfigError";
  } catch (const gw::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("expects input"), std::string::npos);
  }
  EXPECT_THROW(gw::read_checkpoint_manifest(::testing::TempDir() + "no_such_ckpt"),
               gw::ConfigError);
}

TEST(Checkpoint, FixedMarkerHasNoNetworks) {
  const std::string dir = ::testing::TempDir() + "ckpt_fixed";
  gw::save_fixed_checkpoint(dir, "cross");
  const gw::CheckpointInfo info = gw::read_checkpoint_manifest(dir);
  EXPECT_EQ(info.kind, "fixed");
  EXPECT_EQ(info.manifest.at("scenario_name").get<std::string>(), "cross");
  EXPECT_THROW(gw::load_agents(dir, cross_scenario(1)), gw::ConfigError);
}
