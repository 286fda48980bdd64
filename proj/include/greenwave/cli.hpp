#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "greenwave/convergence.hpp"
#include "greenwave/csv.hpp"
#include "greenwave/emissions.hpp"
#include "greenwave/scenario.hpp"
#include "greenwave/sim.hpp"
#include "greenwave/training.hpp"

namespace greenwave {

// Exit codes shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCertification = 3;

struct RunManifest {
  std::string subcommand;
  std::string scenario_path;
  std::string out_dir = "runs";
  std::string emission_params_path;  // empty = built-in defaults
  std::string checkpoint_path;       // evaluate only
  std::vector<std::uint64_t> seeds = {1};
  std::optional<int> episodes;  // overrides the scenario's train.episodes
  bool no_global = false;
  bool window = false;
  int certify_cases = 500;
  std::uint64_t certify_seed = 20260817;
};

// Canonical serialization feeding the run id; the output directory is
// excluded so the id names the experiment, not its destination.
inline std::string manifest_canonical(const RunManifest& m) {
  nlohmann::json j;
  j["subcommand"] = m.subcommand;
  j["scenario"] = m.scenario_path;
  j["seeds"] = m.seeds;
  if (m.episodes) j["episodes"] = *m.episodes;
  j["no_global"] = m.no_global;
  j["window"] = m.window;
  j["emission_params"] = m.emission_params_path;
  j["checkpoint"] = m.checkpoint_path;
  j["certify_cases"] = m.certify_cases;
  j["certify_seed"] = m.certify_seed;
  return j.dump();
}

// FNV-1a over the canonical form, rendered like a short commit hash.
inline std::string run_id(const RunManifest& m) {
  const std::string canon = manifest_canonical(m);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = hex[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

inline void validate_manifest(const RunManifest& m) {
  if (m.seeds.empty()) throw ConfigError("manifest: at least one seed required");
  if (m.certify_cases < 1) throw ConfigError("manifest: certify_cases must be >= 1");
}

// The only environment override: output directory.
inline std::string resolve_out_dir(const RunManifest& m) {
  if (const char* env = std::getenv("GREENWAVE_OUT"); env && *env) return env;
  return m.out_dir;
}

inline void write_manifest_record(const RunManifest& m, const std::string& dir) {
  nlohmann::json j = nlohmann::json::parse(manifest_canonical(m));
  j["run_id"] = run_id(m);
  std::ofstream out(dir + "/run_manifest.json", std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
}

inline ScenarioConfig scenario_for_run(const RunManifest& m) {
  if (m.scenario_path.empty()) throw ConfigError("manifest: --scenario is required");
  ScenarioConfig sc = load_scenario(m.scenario_path);
  if (m.episodes) sc.train.episodes = *m.episodes;
  if (m.no_global) sc.train.use_global = false;
  if (m.window) sc.train.use_window = true;
  validate_scenario(sc);
  return sc;
}

inline EmissionParams emissions_for_run(const RunManifest& m) {
  if (m.emission_params_path.empty()) {
    EmissionParams p;
    validate_emission_params(p);
    return p;
  }
  return load_emission_params(m.emission_params_path);
}

inline const std::vector<std::string>& metric_csv_header() {
  static const std::vector<std::string> header = {
      "seed",           "throughput", "total_waiting", "mean_delay",
      "mean_speed",     "mean_travel_time", "time_loss", "no_exits",
      "fuel_mg_s",      "co_mg_s",    "co2_mg_s"};
  return header;
}

inline std::vector<CsvCell> metric_csv_row(std::uint64_t seed, const MetricsRecord& m,
                                           const FleetEmissions& e) {
  return {seed,          m.throughput, m.total_waiting, m.mean_delay,
          m.mean_speed,  m.mean_travel_time, m.time_loss, m.no_exits,
          e.fuel_mg_s,   e.co_mg_s,    e.co2_mg_s};
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Fixed-plan episode with full trace, shared by the baseline command and the
// fixed-checkpoint evaluate path so both stay bit-identical with
// run_fixed_time.
inline EpisodeTrace fixed_time_trace(const ScenarioConfig& sc, int horizon,
                                     std::uint64_t seed) {
  TrafficEnv env(sc, seed, /*truncate_on_clear=*/false);
  env.run(horizon, [&sc](int m, const TrafficEnv::Snapshot&) {
    return sc.intersections[static_cast<std::size_t>(m)].fixed_green;
  });
  return env.trace();
}

// ---- subcommands ------------------------------------------------------------

inline int cmd_train(const RunManifest& manifest) {
  validate_manifest(manifest);
  const ScenarioConfig sc = scenario_for_run(manifest);
  const std::string dir = resolve_out_dir(manifest);
  std::filesystem::create_directories(dir);
  write_manifest_record(manifest, dir);

  const std::vector<std::string> log_header = {
      "episode",     "epsilon",    "effective_weight", "throughput",
      "total_waiting", "mean_delay", "mean_speed",     "mean_travel_time",
      "time_loss",   "critic_loss", "actor_loss",      "global_critic_loss",
      "global_actor_loss", "buffer_total"};

  struct SeedOutcome {
    std::uint64_t seed;
    double baseline_waiting;
    double final_waiting;
    double eval_waiting;
    double eval_throughput;
  };
  std::vector<SeedOutcome> outcomes;

  for (std::uint64_t seed : manifest.seeds) {
    const std::string tag = format_number(seed);
    CsvWriter log(dir + "/train_log_" + tag + ".csv", log_header);
    CsvWriter plot(dir + "/plot_" + tag + ".csv", {"step", "series", "value"});
    const std::string ckpt_dir = dir + "/checkpoint_" + tag;

    const int every = sc.train.checkpoint_every;
    EpisodeCallback per_episode = [&](const EpisodeStats& st, const AgentSet& agents) {
      log.row({st.episode, st.epsilon, st.effective_weight, st.metrics.throughput,
               st.metrics.total_waiting, st.metrics.mean_delay, st.metrics.mean_speed,
               st.metrics.mean_travel_time, st.metrics.time_loss, st.local_loss.critic,
               st.local_loss.actor, st.global_loss.critic, st.global_loss.actor,
               st.buffer_total});
      plot.row({st.episode, "total_waiting", st.metrics.total_waiting});
      plot.row({st.episode, "throughput", static_cast<double>(st.metrics.throughput)});
      if (every > 0 && (st.episode + 1) % every == 0)
        save_agents(agents, ckpt_dir + "_ep" + format_number(st.episode + 1));
    };

    TrainResult result = train(sc, seed, per_episode);
    if (result.aborted) {
      std::cerr << "train: seed " << seed << " aborted: " << result.abort_reason << '\n';
      return kExitValidation;
    }
    save_agents(result.agents, ckpt_dir);

    const EvalResult eval =
        evaluate_rollout(sc, result.agents, sc.train.steps_per_episode,
                         derive_seed(seed, 7100), /*with_global=*/false,
                         result.agents.episodes_trained);
    SeedOutcome oc;
    oc.seed = seed;
    oc.baseline_waiting = result.baseline_waiting;
    oc.final_waiting =
        result.series.empty() ? 0.0 : result.series.back().metrics.total_waiting;
    oc.eval_waiting = eval.metrics.total_waiting;
    oc.eval_throughput = static_cast<double>(eval.metrics.throughput);
    outcomes.push_back(oc);
  }

  CsvWriter summary(dir + "/summary.csv",
                    {"seed", "baseline_waiting", "final_waiting", "eval_waiting",
                     "eval_throughput"});
  std::vector<double> base, fin, evw, evt;
  for (const SeedOutcome& oc : outcomes) {
    summary.row({oc.seed, oc.baseline_waiting, oc.final_waiting, oc.eval_waiting,
                 oc.eval_throughput});
    base.push_back(oc.baseline_waiting);
    fin.push_back(oc.final_waiting);
    evw.push_back(oc.eval_waiting);
    evt.push_back(oc.eval_throughput);
  }
  summary.row({"median", median(base), median(fin), median(evw), median(evt)});
  return kExitOk;
}

inline int cmd_baseline(const RunManifest& manifest) {
  validate_manifest(manifest);
  const ScenarioConfig sc = scenario_for_run(manifest);
  const EmissionParams ep = emissions_for_run(manifest);
  const std::string dir = resolve_out_dir(manifest);
  std::filesystem::create_directories(dir);
  write_manifest_record(manifest, dir);

  CsvWriter csv(dir + "/baseline.csv", metric_csv_header());
  for (std::uint64_t seed : manifest.seeds) {
    const EpisodeTrace trace = fixed_time_trace(sc, sc.train.steps_per_episode, seed);
    const MetricsRecord metrics = collect_metrics(trace);
    const FleetEmissions fleet =
        fleet_emissions(trace.stop_times, ep, trace.horizon_seconds);
    csv.row(metric_csv_row(seed, metrics, fleet));
  }
  save_fixed_checkpoint(dir + "/fixed_checkpoint", sc.name);
  return kExitOk;
}

inline int cmd_evaluate(const RunManifest& manifest) {
  validate_manifest(manifest);
  const ScenarioConfig sc = scenario_for_run(manifest);
  const EmissionParams ep = emissions_for_run(manifest);
  if (manifest.checkpoint_path.empty())
    throw ConfigError("evaluate: --checkpoint is required");
  const CheckpointInfo info = read_checkpoint_manifest(manifest.checkpoint_path);
  const std::string dir = resolve_out_dir(manifest);
  std::filesystem::create_directories(dir);
  write_manifest_record(manifest, dir);

  CsvWriter csv(dir + "/evaluate.csv", metric_csv_header());
  if (info.kind == "fixed") {
    for (std::uint64_t seed : manifest.seeds) {
      const EpisodeTrace trace = fixed_time_trace(sc, sc.train.steps_per_episode, seed);
      const MetricsRecord metrics = collect_metrics(trace);
      const FleetEmissions fleet =
          fleet_emissions(trace.stop_times, ep, trace.horizon_seconds);
      csv.row(metric_csv_row(seed, metrics, fleet));
    }
    return kExitOk;
  }
  if (info.kind != "ddpg")
    throw ConfigError("evaluate: unknown checkpoint kind '" + info.kind + "'");
  const AgentSet agents = load_agents(manifest.checkpoint_path, sc);
  for (std::uint64_t seed : manifest.seeds) {
    const EvalResult eval =
        evaluate_rollout(sc, agents, sc.train.steps_per_episode, seed,
                         /*with_global=*/false, agents.episodes_trained);
    const FleetEmissions fleet =
        fleet_emissions(eval.trace.stop_times, ep, eval.trace.horizon_seconds);
    csv.row(metric_csv_row(seed, eval.metrics, fleet));
  }
  return kExitOk;
}

inline int cmd_ablate(const RunManifest& manifest) {
  validate_manifest(manifest);
  const ScenarioConfig base_sc = scenario_for_run(manifest);
  const EmissionParams ep = emissions_for_run(manifest);
  const std::string dir = resolve_out_dir(manifest);
  std::filesystem::create_directories(dir);
  write_manifest_record(manifest, dir);

  std::vector<std::string> header = {"seed", "arm"};
  for (std::size_t i = 1; i < metric_csv_header().size(); ++i)
    header.push_back(metric_csv_header()[i]);
  CsvWriter csv(dir + "/ablation.csv", header);

  std::vector<double> with_wait, without_wait;
  for (std::uint64_t seed : manifest.seeds) {
    for (const bool use_global : {true, false}) {
      ScenarioConfig sc = base_sc;
      sc.train.use_global = use_global;
      TrainResult result = train(sc, seed);
      if (result.aborted) {
        std::cerr << "ablate: seed " << seed << " ("
                  << (use_global ? "with_global" : "without_global")
                  << ") aborted: " << result.abort_reason << '\n';
        return kExitValidation;
      }
      const EvalResult eval =
          evaluate_rollout(sc, result.agents, sc.train.steps_per_episode,
                           derive_seed(seed, 7100), /*with_global=*/false,
                           result.agents.episodes_trained);
      const FleetEmissions fleet =
          fleet_emissions(eval.trace.stop_times, ep, eval.trace.horizon_seconds);
      std::vector<CsvCell> row = {format_number(seed),
                                  use_global ? "with_global" : "without_global"};
      const std::vector<CsvCell> metrics = metric_csv_row(seed, eval.metrics, fleet);
      for (std::size_t i = 1; i < metrics.size(); ++i) row.push_back(metrics[i]);
      csv.row(row);
      (use_global ? with_wait : without_wait).push_back(eval.metrics.total_waiting);
    }
  }

  int wins = 0;
  for (std::size_t i = 0; i < with_wait.size(); ++i)
    if (with_wait[i] <= without_wait[i]) ++wins;
  CsvWriter summary(dir + "/ablation_summary.csv",
                    {"median_with_global", "median_without_global",
                     "seeds_with_global_not_worse", "seed_count"});
  summary.row({median(with_wait), median(without_wait), wins,
               static_cast<std::int64_t>(with_wait.size())});
  return kExitOk;
}

inline int cmd_certify(const RunManifest& manifest) {
  validate_manifest(manifest);
  const std::string dir = resolve_out_dir(manifest);
  std::filesystem::create_directories(dir);
  write_manifest_record(manifest, dir);

  CertifyOptions opt;
  opt.case_count = static_cast<std::size_t>(manifest.certify_cases);
  opt.seed = manifest.certify_seed;
  const CertificationReport report = certify_contraction(opt);

  CsvWriter csv(dir + "/certification.csv",
                {"case", "n", "lambda", "zero_diag", "contraction_factor",
                 "contraction_ok", "gershgorin_bound", "gershgorin_ok", "iterations",
                 "decay_ok", "fixed_point_residual", "fixed_point_ok", "pass"});
  for (const CertificationCase& c : report.cases)
    csv.row({static_cast<std::int64_t>(c.case_id), static_cast<std::int64_t>(c.n),
             c.lambda, c.zero_diag, c.contraction, c.contraction_ok, c.gershgorin_bound,
             c.gershgorin_ok, static_cast<std::int64_t>(c.iterations), c.decay_ok,
             c.fixed_point_residual, c.fixed_point_ok, c.pass});

  if (!report.all_pass) {
    // Dump each offending MDP by replaying the generator stream to its case.
    for (const CertificationCase& c : report.cases) {
      if (c.pass) continue;
      Rng rng(derive_seed(opt.seed, 0xce27));
      MdpSpec bad;
      for (std::size_t k = 0; k <= c.case_id; ++k) {
        const std::size_t n = 2 + rng.below(opt.max_states - 1);
        const double lambda = opt.lambdas[k % opt.lambdas.size()];
        const bool zero_diag = (rng.below(4) == 0);
        MdpSpec mdp = random_mdp(n, lambda, zero_diag, rng);
        for (std::size_t p = 0; p < opt.probe_pairs; ++p)
          for (std::size_t i = 0; i < 2 * n; ++i) rng.uniform(-10.0, 10.0);
        if (k == c.case_id) bad = std::move(mdp);
      }
      nlohmann::json j;
      j["case"] = c.case_id;
      j["n"] = bad.n;
      j["lambda"] = bad.lambda;
      j["p"] = bad.p;
      j["r"] = bad.r;
      std::ofstream out(dir + "/failed_case_" + std::to_string(c.case_id) + ".json",
                        std::ios::binary | std::ios::trunc);
      out << j.dump(2) << '\n';
      std::cerr << "certify: case " << c.case_id << " failed, dumped for replay\n";
    }
    return kExitCertification;
  }
  std::cout << "certify: " << report.cases.size() << " cases passed\n";
  return kExitOk;
}

// Dispatch plus exception-to-exit-code mapping; the CLI binary and the tests
// share this entry point.
inline int run_cli(const RunManifest& manifest) {
  try {
    if (manifest.subcommand == "train") return cmd_train(manifest);
    if (manifest.subcommand == "evaluate") return cmd_evaluate(manifest);
    if (manifest.subcommand == "baseline") return cmd_baseline(manifest);
    if (manifest.subcommand == "ablate") return cmd_ablate(manifest);
    if (manifest.subcommand == "certify") return cmd_certify(manifest);
    std::cerr << "unknown subcommand: " << manifest.subcommand << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace greenwave
