#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "doral/harness.hpp"

namespace {

int cmd_run(const std::string& target, bool seed_set, std::uint64_t seed, int reps,
            const std::string& out_dir, bool no_plots, const std::string& plot_format) {
  doral::ExperimentConfig cfg;
  try {
    cfg = doral::load_config_or_preset(target);
    if (seed_set) cfg.seed = seed;
    if (reps > 0) cfg.replications = reps;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const doral::ExperimentResult result = doral::run_experiment(
        cfg, [](const std::string& msg) { std::cerr << msg << "\n"; });
    long failed = 0;
    for (const auto& run : result.runs) failed += run.failed ? 1 : 0;
    if (failed > 0)
      std::cerr << "warning: " << failed
                << " run(s) ended in identification failure (see runs.csv)\n";
    auto paths = doral::emit_csv(result, out_dir);
    if (!no_plots) {
      const auto fmt = plot_format == "ppm" ? doral::PlotFormat::Ppm
                                            : doral::PlotFormat::Svg;
      for (auto& p : doral::render_plots(result, out_dir, fmt))
        paths.push_back(std::move(p));
    }
    for (const auto& p : paths) std::cout << p.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_validate(const std::string& target) {
  try {
    const doral::ExperimentConfig cfg = doral::load_config_or_preset(target);
    std::cout << "ok: " << cfg.scenario << " (" << cfg.contexts << " contexts, "
              << cfg.arms << " arms, budget " << cfg.budget << ", horizon "
              << cfg.horizon << ", " << cfg.replications << " reps)\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"budget-constrained bandit benchmark with arm-dependent delays"};
  app.require_subcommand(1);

  std::string target;
  std::uint64_t seed = 0;
  int reps = -1;
  std::string out_dir = "results";
  bool no_plots = false;
  std::string plot_format = "svg";

  auto* run = app.add_subcommand("run", "run an experiment from a config file or preset");
  run->add_option("config", target, "config file path or preset name")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the base seed");
  run->add_option("--reps", reps, "override the replication count")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory (default: results)");
  run->add_flag("--no-plots", no_plots, "skip chart rendering");
  run->add_option("--plot-format", plot_format, "chart format (default: svg)")
      ->check(CLI::IsMember({"svg", "ppm"}));

  auto* presets = app.add_subcommand("presets", "list built-in scenario presets");

  auto* validate = app.add_subcommand("validate", "check a config file or preset name");
  std::string validate_target;
  validate->add_option("config", validate_target, "config file path or preset name")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (run->parsed())
    return cmd_run(target, seed_opt->count() > 0, seed, reps, out_dir, no_plots,
                   plot_format);
  if (presets->parsed()) {
    for (const auto& name : doral::preset_names()) std::cout << name << "\n";
    return 0;
  }
  if (validate->parsed()) return cmd_validate(validate_target);
  return 1;
}
