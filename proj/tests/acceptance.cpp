// Release gate: every numbered requirement below must hold before a build
// ships. Each check prints exactly one PASS/FAIL line; the process exits
// non-zero if any check fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "greenwave/cli.hpp"

namespace gw = greenwave;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void run(int id, const std::function<std::pair<bool, std::string>()>& check) {
  try {
    const auto [pass, detail] = check();
    report(id, pass, detail);
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v) { return gw::format_number(v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string scenario_path(const char* name) {
  return std::string(GW_REPO_DIR) + "/scenarios/" + name;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. Sampled dynamic-programming operators contract at their discount rate,
//    iterate geometrically, and land on the directly solved fixed point.
std::pair<bool, std::string> contraction_certification() {
  const auto t0 = std::chrono::steady_clock::now();
  gw::CertifyOptions opt;  // 500 cases, 2..20 states, discounts 0.5 / 0.9 / 0.99
  const gw::CertificationReport rep = gw::certify_contraction(opt);
  const double secs = seconds_since(t0);
  bool ok = rep.all_pass && rep.cases.size() == 500 && secs < 5.0;
  double worst_slack = 0.0, worst_residual = 0.0, worst_gersh = 0.0;
  for (const gw::CertificationCase& c : rep.cases) {
    ok = ok && c.n >= 2 && c.n <= 20;
    ok = ok && c.contraction <= c.lambda + 1e-12;
    ok = ok && c.gershgorin_bound <= 1.0 + 1e-10;
    ok = ok && c.decay_ok;
    ok = ok && c.fixed_point_ok && c.fixed_point_residual <= 1e-10;
    worst_slack = std::max(worst_slack, c.contraction - c.lambda);
    worst_residual = std::max(worst_residual, c.fixed_point_residual);
    worst_gersh = std::max(worst_gersh, c.gershgorin_bound);
  }
  return {ok, "500 sampled operators certified in " + fmt(secs) +
                  "s (worst contraction slack " + fmt(worst_slack) +
                  ", worst fixed-point residual " + fmt(worst_residual) +
                  ", worst row bound " + fmt(worst_gersh) + ")"};
}

// 2. Two-state cycle with known closed-form value function.
std::pair<bool, std::string> closed_form_chain() {
  gw::MdpSpec m;
  m.n = 2;
  m.p = {0.0, 1.0, 1.0, 0.0};
  m.r = {1.0, 0.0};
  m.lambda = 0.9;
  const gw::FixedPointResult fp = gw::solve_fixed_point(m);
  const double e0 = std::fabs(fp.value[0] - 100.0 / 19.0);
  const double e1 = std::fabs(fp.value[1] - 90.0 / 19.0);
  const bool ok = fp.iteration_converged && e0 <= 1e-9 && e1 <= 1e-9;
  return {ok, "two-state cycle solves to [100/19, 90/19] (errors " + fmt(e0) + ", " +
                  fmt(e1) + ")"};
}

// 3. Backprop gradients of 100 random dense nets agree with central finite
//    differences on every weight, bias, and input coordinate.
std::pair<bool, std::string> gradient_agreement() {
  gw::Rng rng(424242);
  const double eps = 1e-5;
  long checked = 0;
  double worst = 0.0;
  auto probe = [](const gw::DenseNet& net, const std::vector<double>& x,
                  const std::vector<double>& coef) {
    const gw::ForwardTrace tr = gw::forward(net, x);
    double s = 0.0;
    for (std::size_t j = 0; j < coef.size(); ++j) s += coef[j] * tr.output()[j];
    return s;
  };
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> sizes = {1 + rng.below(5)};
    const std::size_t hidden = 1 + rng.below(2);
    for (std::size_t l = 0; l < hidden; ++l) sizes.push_back(1 + rng.below(6));
    sizes.push_back(1 + rng.below(3));
    std::vector<gw::Act> acts;
    for (std::size_t j = 0; j < sizes.back(); ++j)
      acts.push_back(static_cast<gw::Act>(rng.below(4)));
    gw::DenseNet net = gw::make_net(sizes, acts, rng);
    std::vector<double> x(net.input_dim());
    for (double& v : x) v = rng.uniform(-1.5, 1.5);
    std::vector<double> coef(net.output_dim());
    for (double& v : coef) v = rng.uniform(-2.0, 2.0);
    gw::GradientTape tape = gw::make_tape(net);
    const gw::ForwardTrace tr = gw::forward(net, x);
    const std::vector<double> dx = gw::backward(net, tr, coef, tape);
    auto check = [&](double analytic, double fd) {
      const double scale = std::max({std::fabs(analytic), std::fabs(fd), 1e-6});
      worst = std::max(worst, std::fabs(analytic - fd) / scale);
      ++checked;
    };
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      for (std::size_t k = 0; k < net.w[l].size(); ++k) {
        const double keep = net.w[l][k];
        net.w[l][k] = keep + eps;
        const double hi = probe(net, x, coef);
        net.w[l][k] = keep - eps;
        const double lo = probe(net, x, coef);
        net.w[l][k] = keep;
        check(tape.dw[l][k], (hi - lo) / (2 * eps));
      }
      for (std::size_t k = 0; k < net.b[l].size(); ++k) {
        const double keep = net.b[l][k];
        net.b[l][k] = keep + eps;
        const double hi = probe(net, x, coef);
        net.b[l][k] = keep - eps;
        const double lo = probe(net, x, coef);
        net.b[l][k] = keep;
        check(tape.db[l][k], (hi - lo) / (2 * eps));
      }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double keep = x[i];
      x[i] = keep + eps;
      const double hi = probe(net, x, coef);
      x[i] = keep - eps;
      const double lo = probe(net, x, coef);
      x[i] = keep;
      check(dx[i], (hi - lo) / (2 * eps));
    }
  }
  const bool ok = worst <= 1e-4 && checked > 1000;
  return {ok, "100 random nets, " + std::to_string(checked) +
                  " coordinates, worst relative gradient error " + fmt(worst)};
}

// 4. The phase reward matches an independently transcribed statement of the
//    rule, bit for bit, across 10000 random inputs.
std::pair<bool, std::string> reward_transcription() {
  gw::Rng rng(4242);
  long mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    gw::IntersectionSpec spec;
    spec.n_max = rng.uniform(0.5, 120.0);
    spec.g_max = rng.uniform(0.5, 120.0);
    const double r_max = rng.uniform(0.01, 5.0);
    double g = 0.0;
    switch (rng.below(4)) {
      case 0: g = 0.0; break;
      case 1: g = 1.0; break;
      case 2: g = static_cast<double>(rng.below(100)); break;
      default: g = rng.uniform(0.0, 2.0 * spec.g_max); break;
    }
    double n = 0.0;
    switch (rng.below(4)) {
      case 0: n = 0.0; break;
      case 1: n = 1.0; break;
      case 2: n = static_cast<double>(rng.below(200)); break;
      default: n = rng.uniform(0.0, 2.0 * spec.n_max); break;
    }
    double want;
    if (g > 0.0)
      want = (g / spec.g_max <= 1.0 / spec.g_max) ? r_max : -r_max * g / spec.g_max;
    else
      want = (n / spec.n_max <= 1.0 / spec.n_max) ? r_max : -r_max * n / spec.n_max;
    if (gw::local_reward(n, g, spec, r_max) != want) ++mismatches;
  }
  return {mismatches == 0,
          "phase reward bit-exact against independent transcription on 10000 inputs (" +
              std::to_string(mismatches) + " mismatches)"};
}

// 5. Per-vehicle emission terms hit independently computed full-precision
//    values, and fleet carbon monoxide grows strictly with stopped time.
std::pair<bool, std::string> emission_oracles() {
  gw::EmissionParams p;
  struct Probe {
    double got;
    double want;
  };
  const std::vector<Probe> probes = {
      {gw::emission_move(p.co_engine, p), 0.09444252675181222},
      {gw::emission_move(p.co2_engine, p), 35.41594753192958},
      {gw::emission_move(p.fuel_engine, p), 11.333103210217466},
      {gw::emission_stop(p.co_engine, p, 60.0), 0.0017259233690024164},
      {gw::emission_stop(p.co2_engine, p, 60.0), 0.6472212633759061},
      {gw::emission_stop(p.fuel_engine, p, 60.0), 0.20711080428028997},
  };
  double worst = 0.0;
  for (const Probe& pr : probes) worst = std::max(worst, std::fabs(pr.got - pr.want));
  const gw::FleetEmissions fleet = gw::fleet_emissions({30.0, 90.0}, p, 100.0);
  worst = std::max(worst, std::fabs(fleet.fuel_mg_s - 230.80428028995513));
  worst = std::max(worst, std::fabs(fleet.co_mg_s - 1.923369002416293));
  worst = std::max(worst, std::fabs(fleet.co2_mg_s - 721.2633759061098));
  bool ok = worst <= 1e-9;

  gw::Rng rng(555);
  int monotone = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> stops(1 + rng.below(20));
    for (double& s : stops) s = rng.uniform(0.0, 300.0);
    const double before = gw::fleet_emissions(stops, p, 400.0).co_mg_s;
    stops[rng.below(stops.size())] += rng.uniform(0.1, 60.0);
    const double after = gw::fleet_emissions(stops, p, 400.0).co_mg_s;
    if (after > before) ++monotone;
  }
  ok = ok && monotone == 100;
  return {ok, "emission terms within 1e-9 of reference values (worst gap " + fmt(worst) +
                  "), fleet CO strictly increasing in stopped time on " +
                  std::to_string(monotone) + "/100 perturbed fleets"};
}

// 6. Trained control beats the fixed plan on the bundled two-intersection
//    scenario: higher median throughput and at least 10% lower median waiting
//    across 5 seeds, inside a 10 minute budget.
std::pair<bool, std::string> trained_beats_fixed() {
  const auto t0 = std::chrono::steady_clock::now();
  const gw::ScenarioConfig sc = gw::load_scenario(scenario_path("two_intersections.json"));
  std::vector<double> trained_wait, trained_tp, fixed_wait, fixed_tp;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const gw::TrainResult r = gw::train(sc, seed);
    if (r.aborted) return {false, "seed " + fmt(seed) + " aborted: " + r.abort_reason};
    const std::uint64_t eval_seed = gw::derive_seed(seed, 7100);
    const gw::EvalResult eval =
        gw::evaluate_rollout(sc, r.agents, sc.train.steps_per_episode, eval_seed,
                             /*with_global=*/false, r.agents.episodes_trained);
    const gw::MetricsRecord fixed =
        gw::run_fixed_time(sc, sc.train.steps_per_episode, eval_seed);
    trained_wait.push_back(eval.metrics.total_waiting);
    trained_tp.push_back(static_cast<double>(eval.metrics.throughput));
    fixed_wait.push_back(fixed.total_waiting);
    fixed_tp.push_back(static_cast<double>(fixed.throughput));
  }
  const double secs = seconds_since(t0);
  const double tw = median(trained_wait), fw = median(fixed_wait);
  const double tt = median(trained_tp), ft = median(fixed_tp);
  const bool ok = tt > ft && tw <= 0.9 * fw && secs < 600.0;
  return {ok, "5 seeds, 200 episodes each: median waiting " + fmt(tw) + " vs fixed " +
                  fmt(fw) + " (need <= " + fmt(0.9 * fw) + "), median throughput " +
                  fmt(tt) + " vs " + fmt(ft) + ", " + fmt(secs) + "s (budget 600)"};
}

// 7. On the bundled five-intersection corridor, keeping the coordinating
//    agent during training never hurts: waiting with it is no worse than
//    without it on at least 4 of 5 paired seeds and on the medians.
std::pair<bool, std::string> coordinator_not_worse() {
  const gw::ScenarioConfig base = gw::load_scenario(scenario_path("grid5.json"));
  std::vector<double> with_wait, without_wait;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const bool use_global : {true, false}) {
      gw::ScenarioConfig sc = base;
      sc.train.use_global = use_global;
      const gw::TrainResult r = gw::train(sc, seed);
      if (r.aborted) return {false, "seed " + fmt(seed) + " aborted: " + r.abort_reason};
      const gw::EvalResult eval = gw::evaluate_rollout(
          sc, r.agents, sc.train.steps_per_episode, gw::derive_seed(seed, 7100),
          /*with_global=*/false, r.agents.episodes_trained);
      (use_global ? with_wait : without_wait).push_back(eval.metrics.total_waiting);
    }
  }
  int wins = 0;
  for (std::size_t i = 0; i < with_wait.size(); ++i)
    if (with_wait[i] <= without_wait[i]) ++wins;
  const double mw = median(with_wait), mo = median(without_wait);
  const bool ok = wins >= 4 && mw <= mo;
  return {ok, "coordinated training not worse on " + std::to_string(wins) +
                  "/5 paired seeds, median waiting " + fmt(mw) + " vs " + fmt(mo)};
}

// 8. Removing the coordinator entirely and letting its influence decay to
//    zero are the same policy: identical decision streams and metrics.
std::pair<bool, std::string> decayed_equals_deleted() {
  const gw::ScenarioConfig sc = gw::load_scenario(scenario_path("grid5.json"));
  const gw::AgentSet agents = gw::make_agent_set(sc, sc.train, 123);
  const int horizon = gw::decay_horizon(0.8, agents.hyper.decay_base);
  const gw::EvalResult decayed =
      gw::evaluate_rollout(sc, agents, 3600, 99, /*with_global=*/true, horizon);
  const gw::EvalResult deleted =
      gw::evaluate_rollout(sc, agents, 3600, 99, /*with_global=*/false, 0);
  bool ok = decayed.actions.size() == deleted.actions.size() &&
            !decayed.actions.empty();
  if (ok)
    for (std::size_t i = 0; i < decayed.actions.size(); ++i)
      ok = ok && decayed.actions[i].time == deleted.actions[i].time &&
           decayed.actions[i].intersection == deleted.actions[i].intersection &&
           decayed.actions[i].seconds == deleted.actions[i].seconds;
  ok = ok && decayed.metrics.total_waiting == deleted.metrics.total_waiting &&
       decayed.metrics.throughput == deleted.metrics.throughput;
  return {ok, std::to_string(deleted.actions.size()) +
                  " decisions identical between fully decayed and deleted coordinator"};
}

// 9. Identical run manifests reproduce identical CSV bytes.
std::pair<bool, std::string> byte_identical_reruns() {
  const fs::path root = fs::temp_directory_path() / "gw_accept";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string scenario = scenario_path("two_intersections.json");

  auto run_twice = [&](const char* tag, const std::function<void(gw::RunManifest&)>& fill,
                       const std::vector<std::string>& files) {
    std::vector<std::string> dirs;
    for (const char* sub : {"_a", "_b"}) {
      gw::RunManifest m;
      fill(m);
      m.out_dir = (root / (std::string(tag) + sub)).string();
      if (gw::run_cli(m) != gw::kExitOk)
        throw std::runtime_error(std::string(tag) + ": command failed");
      dirs.push_back(m.out_dir);
    }
    for (const std::string& f : files)
      if (read_bytes(dirs[0] + "/" + f) != read_bytes(dirs[1] + "/" + f))
        return std::string(tag) + "/" + f + " differs between reruns";
    return std::string();
  };

  std::string diff = run_twice(
      "baseline",
      [&](gw::RunManifest& m) {
        m.subcommand = "baseline";
        m.scenario_path = scenario;
        m.seeds = {1, 2, 3};
      },
      {"baseline.csv", "run_manifest.json"});
  if (diff.empty())
    diff = run_twice(
        "train",
        [&](gw::RunManifest& m) {
          m.subcommand = "train";
          m.scenario_path = scenario;
          m.seeds = {1};
          m.episodes = 2;
        },
        {"train_log_1.csv", "plot_1.csv", "summary.csv", "run_manifest.json"});
  if (diff.empty())
    diff = run_twice(
        "certify",
        [&](gw::RunManifest& m) {
          m.subcommand = "certify";
          m.certify_cases = 25;
        },
        {"certification.csv", "run_manifest.json"});
  fs::remove_all(root);
  return {diff.empty(),
          diff.empty() ? "baseline, train, and certify reruns byte-identical" : diff};
}

}  // namespace

int main() {
  ::unsetenv("GREENWAVE_OUT");
  run(1, contraction_certification);
  run(2, closed_form_chain);
  run(3, gradient_agreement);
  run(4, reward_transcription);
  run(5, emission_oracles);
  run(6, trained_beats_fixed);
  run(7, coordinator_not_worse);
  run(8, decayed_equals_deleted);
  run(9, byte_identical_reruns);
  if (failures == 0) {
    std::printf("all 9 criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", failures);
  return 1;
}
