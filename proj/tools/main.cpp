#include <CLI11.hpp>

#include "greenwave/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"queue-based multi-intersection signal control laboratory"};
  app.require_subcommand(1);

  greenwave::RunManifest m;
  int episodes_value = 0;

  auto add_common = [&](CLI::App* sub, bool needs_scenario) {
    if (needs_scenario)
      sub->add_option("--scenario", m.scenario_path, "scenario config (json)")->required();
    sub->add_option("--seeds", m.seeds, "comma separated seed list")->delimiter(',');
    sub->add_option("--out", m.out_dir, "output directory");
    sub->add_option("--emission-params", m.emission_params_path,
                    "emission parameter file (json)");
  };

  CLI::App* train = app.add_subcommand("train", "train the signal agents");
  add_common(train, true);
  train->add_option("--episodes", episodes_value, "override training episode count");
  train->add_flag("--no-global", m.no_global, "train without the coordinating agent");
  train->add_flag("--window", m.window, "neighbourhood observations for local agents");

  CLI::App* evaluate = app.add_subcommand("evaluate", "roll out a saved checkpoint");
  add_common(evaluate, true);
  evaluate->add_option("--checkpoint", m.checkpoint_path, "checkpoint directory")
      ->required();
  evaluate->add_flag("--window", m.window, "neighbourhood observations for local agents");

  CLI::App* baseline = app.add_subcommand("baseline", "fixed-plan reference run");
  add_common(baseline, true);

  CLI::App* ablate = app.add_subcommand("ablate",
                                        "paired runs with and without the coordinator");
  add_common(ablate, true);
  ablate->add_option("--episodes", episodes_value, "override training episode count");
  ablate->add_flag("--window", m.window, "neighbourhood observations for local agents");

  CLI::App* certify = app.add_subcommand("certify", "convergence certification sweep");
  certify->add_option("--out", m.out_dir, "output directory");
  certify->add_option("--cases", m.certify_cases, "number of sampled cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return greenwave::kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  m.subcommand = chosen->get_name();
  const CLI::Option* ep = chosen->get_option_no_throw("--episodes");
  if (ep && ep->count() > 0) m.episodes = episodes_value;
  return greenwave::run_cli(m);
}
