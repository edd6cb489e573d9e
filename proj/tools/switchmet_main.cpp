// switchmet: experiment runner for the indefinite-order displacement
// interferometer simulations.
//
// Exit codes: 0 success, 1 configuration or validation error, 2 a mode's own
// acceptance gate failed (oracle-check deviation, Fock truncation), 3 output
// I/O failure.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "switchmet/switchmet.hpp"

namespace {

struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> nu;
  std::optional<long> trials;
  std::optional<long> reps;
  std::optional<long> samples;
  std::optional<int> n_min;
  std::optional<int> n_max;
  std::optional<int> cutoff;
  std::optional<int> max_n;
  std::optional<double> phi0;
  std::optional<double> eta;
  std::optional<double> true_a;
  std::optional<double> fluctuation;
  std::optional<double> max_amplitude;
  std::optional<std::vector<int>> loss_n;
  std::optional<std::string> out_dir;
  bool redraw_per_trial = false;
  bool no_write = false;
  bool quiet = false;
};

void add_common_options(CLI::App* sub, CliOverrides& o) {
  sub->add_option("--config", o.config_path,
                  "JSON config file (bare config or a manifest wrapping one)");
  sub->add_option("--seed", o.seed, "master seed for all derived streams");
  sub->add_option("--nu", o.nu, "shots per trial");
  sub->add_option("--trials", o.trials, "Monte Carlo trials per point");
  sub->add_option("--n-min", o.n_min, "smallest depth N");
  sub->add_option("--n-max", o.n_max, "largest depth N");
  sub->add_option("--phi0", o.phi0, "interferometer offset phase (rad)");
  sub->add_option("--eta", o.eta, "per-pass survival probability");
  sub->add_option("--true-a", o.true_a,
                  "pin the regularized area (skips jittered realization)");
  sub->add_option("--fluctuation", o.fluctuation,
                  "relative half-width of per-pass displacement jitter");
  sub->add_flag("--redraw-per-trial", o.redraw_per_trial,
                "redraw the jittered displacements for every trial");
  sub->add_option("--loss-n", o.loss_n, "depths for the loss sweep");
  sub->add_option("--reps", o.reps, "repetitions for the baseline mode");
  sub->add_option("--samples", o.samples, "random pairs for oracle-check");
  sub->add_option("--cutoff", o.cutoff, "Fock cutoff for oracle-check");
  sub->add_option("--max-amplitude", o.max_amplitude,
                  "amplitude disk radius for oracle-check draws");
  sub->add_option("--max-n", o.max_n, "max sequence length for oracle-check");
  sub->add_option("--out", o.out_dir, "output directory");
  sub->add_flag("--no-write", o.no_write, "skip writing CSV/manifest files");
  sub->add_flag("--quiet", o.quiet, "suppress the table echo on stdout");
}

void apply_overrides(switchmet::ExperimentConfig& cfg, const CliOverrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.nu) cfg.nu = *o.nu;
  if (o.trials) cfg.trials = *o.trials;
  if (o.n_min) cfg.n_min = *o.n_min;
  if (o.n_max) cfg.n_max = *o.n_max;
  if (o.phi0) cfg.phi0 = *o.phi0;
  if (o.eta) cfg.eta = *o.eta;
  if (o.true_a) cfg.true_a = *o.true_a;
  if (o.fluctuation) cfg.physical.fluctuation = *o.fluctuation;
  if (o.redraw_per_trial) cfg.redraw_per_trial = true;
  if (o.loss_n) cfg.loss_n_values = *o.loss_n;
  if (o.reps) cfg.baseline_reps = *o.reps;
  if (o.samples) cfg.oracle_samples = *o.samples;
  if (o.cutoff) cfg.oracle_cutoff = *o.cutoff;
  if (o.max_amplitude) cfg.oracle_max_amplitude = *o.max_amplitude;
  if (o.max_n) cfg.oracle_max_n = *o.max_n;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
}

int run(const switchmet::ExperimentConfig& cfg, const CliOverrides& o) {
  const switchmet::RunResult result = switchmet::run_experiment(cfg);
  if (!o.quiet) {
    std::fputs(switchmet::csv_text(result).c_str(), stdout);
    for (const auto& [key, value] : result.summary) {
      std::printf("summary %s %.17g\n", key.c_str(), value);
    }
    if (!result.note.empty()) std::printf("%s\n", result.note.c_str());
  }
  if (!o.no_write) {
    const switchmet::OutputPaths paths = switchmet::write_outputs(result);
    if (!o.quiet) {
      std::printf("wrote %s\n", paths.csv.string().c_str());
      std::printf("wrote %s\n", paths.manifest.string().c_str());
    }
  }
  return result.passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"indefinite-order displacement interferometry experiment runner"};
  app.set_version_flag("--version",
                       std::string("switchmet ") + switchmet::version_string);
  app.require_subcommand(0, 1);

  CliOverrides o;
  struct SubEntry {
    CLI::App* sub;
    switchmet::Mode mode;
  };
  std::vector<SubEntry> subs;
  const auto add_mode = [&](switchmet::Mode mode, const std::string& help) {
    CLI::App* sub = app.add_subcommand(switchmet::mode_name(mode), help);
    add_common_options(sub, o);
    subs.push_back({sub, mode});
  };
  add_mode(switchmet::Mode::fig3,
           "outcome-probability sweep over depth N (interference visibility)");
  add_mode(switchmet::Mode::fig4,
           "area-estimate RMSE over depth N with scaling fits");
  add_mode(switchmet::Mode::fig5a, "total output phase versus depth N");
  add_mode(switchmet::Mode::fig5b,
           "total output phase versus x-passes at a single fixed p-pass");
  add_mode(switchmet::Mode::baseline,
           "sequential fixed-order reference estimator");
  add_mode(switchmet::Mode::loss_sweep,
           "loss versus loss-free RMSE comparison at large depths");
  add_mode(switchmet::Mode::oracle_check,
           "closed-form loop phase versus Fock-space oracle");
  add_common_options(&app, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    std::optional<switchmet::Mode> chosen;
    for (const SubEntry& entry : subs) {
      if (app.got_subcommand(entry.sub)) {
        chosen = entry.mode;
        break;
      }
    }
    switchmet::ExperimentConfig cfg;
    if (o.config_path) {
      cfg = switchmet::load_config_file(*o.config_path);
      if (chosen) cfg.mode = *chosen;
    } else if (chosen) {
      cfg = switchmet::default_config(*chosen);
    } else {
      std::fprintf(stderr,
                   "error: give a mode subcommand or --config FILE "
                   "(see --help)\n");
      return 1;
    }
    apply_overrides(cfg, o);
    return run(cfg, o);
  } catch (const switchmet::io_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 3;
  } catch (const switchmet::truncation_error& e) {
    std::fprintf(stderr, "oracle truncation: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
