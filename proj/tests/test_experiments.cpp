#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "switchmet/switchmet.hpp"

using namespace switchmet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double cell(const RunResult& r, std::size_t row, const std::string& column) {
  for (std::size_t c = 0; c < r.table.columns.size(); ++c) {
    if (r.table.columns[c] == column) return std::stod(r.table.rows.at(row).at(c));
  }
  throw std::invalid_argument("no column " + column);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct ThreadCapGuard {
  explicit ThreadCapGuard(const char* value) {
    setenv("SWITCHMET_THREADS", value, 1);
  }
  ~ThreadCapGuard() { unsetenv("SWITCHMET_THREADS"); }
};

}  // namespace

TEST_CASE("mode names round-trip") {
  for (const Mode m : {Mode::fig3, Mode::fig4, Mode::fig5a, Mode::fig5b,
                       Mode::baseline, Mode::loss_sweep, Mode::oracle_check}) {
    CHECK(mode_from_name(mode_name(m)) == m);
  }
  CHECK_THROWS_AS(mode_from_name("fig9"), std::invalid_argument);
}

TEST_CASE("config defaults validate and resolve the working area") {
  for (const Mode m : {Mode::fig3, Mode::fig4, Mode::fig5a, Mode::fig5b,
                       Mode::baseline, Mode::loss_sweep, Mode::oracle_check}) {
    const ExperimentConfig cfg = default_config(m);
    CHECK_NOTHROW(cfg.validate());
  }
  CHECK(default_config(Mode::baseline).resolved_true_a() == 0.042);
  CHECK(default_config(Mode::loss_sweep).resolved_true_a() == 2.5e-4);
  CHECK_THAT(default_config(Mode::fig3).resolved_true_a(),
             WithinRel(PhysicalParams{}.reference_area(), 1e-12));
  ExperimentConfig pinned = default_config(Mode::fig3);
  pinned.true_a = 0.01;
  CHECK(pinned.resolved_true_a() == 0.01);

  ExperimentConfig bad = default_config(Mode::fig3);
  bad.n_min = 5;
  bad.n_max = 2;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = default_config(Mode::fig3);
  bad.eta = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = default_config(Mode::loss_sweep);
  bad.loss_n_values = {};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("seed streams separate modes and substreams") {
  CHECK(seed_stream(Mode::fig3, 0) != seed_stream(Mode::fig4, 0));
  CHECK(seed_stream(Mode::fig3, 0) != seed_stream(Mode::fig3, 1));
  CHECK(derive_seed(42, 1, 2, 3) != derive_seed(42, 1, 2, 4));
  CHECK(derive_seed(42, 1, 2, 3) != derive_seed(43, 1, 2, 3));
  CHECK(derive_seed(42, 1, 2, 3) == derive_seed(42, 1, 2, 3));
}

TEST_CASE("config json round trip") {
  ExperimentConfig cfg = default_config(Mode::loss_sweep);
  cfg.seed = 1234;
  cfg.trials = 17;
  cfg.true_a = 3.3e-4;
  cfg.loss_n_values = {5, 25};
  cfg.physical.fluctuation = 0.02;
  cfg.out_dir = "elsewhere";
  const ordered_json j = config_to_json(cfg);
  const ExperimentConfig back = config_from_json(j);
  CHECK(config_to_json(back).dump() == j.dump());

  // A manifest wrapping the same config loads identically.
  RunResult shell;
  shell.config = cfg;
  const ordered_json manifest = manifest_json(shell, "x.csv");
  CHECK(config_to_json(config_from_json(manifest)).dump() == j.dump());
}

TEST_CASE("config json rejects malformed input") {
  CHECK_THROWS_AS(config_from_json(ordered_json::parse(R"({"seed": 1})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      config_from_json(ordered_json::parse(R"({"mode": "fig3", "bogus": 1})")),
      std::invalid_argument);
  CHECK_THROWS_AS(
      config_from_json(ordered_json::parse(R"({"mode": "fig3", "nu": "many"})")),
      std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(ordered_json::parse(
                      R"({"mode": "fig3", "physical": {"mass_kg": 1}})")),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(ordered_json::parse("[1,2,3]")),
                  std::invalid_argument);
}

TEST_CASE("fig3 reproduces the frozen working point") {
  ExperimentConfig cfg = default_config(Mode::fig3);
  cfg.true_a = 0.042;
  const RunResult r = run_experiment(cfg);
  REQUIRE(r.table.rows.size() == 9);
  CHECK_THAT(cell(r, 8, "predictedPMinus"), WithinAbs(0.99463727, 1e-7));
  CHECK_THAT(cell(r, 0, "predictedPMinus"), WithinAbs(0.02337777, 1e-7));
  // The simulated means track the prediction within a few binomial sigma.
  for (std::size_t row = 0; row < 9; ++row) {
    const double gap =
        std::abs(cell(r, row, "meanPMinus") - cell(r, row, "predictedPMinus"));
    INFO("row " << row);
    CHECK(gap < 5.0 * cell(r, row, "sigmaMean"));
  }
  CHECK(r.wall_clock_ms > 0.0);
}

TEST_CASE("fig4 summary carries the scaling fit") {
  ExperimentConfig cfg = default_config(Mode::fig4);
  cfg.true_a = 0.042;
  cfg.trials = 60;
  const RunResult r = run_experiment(cfg);
  REQUIRE(r.table.rows.size() == 8);
  CHECK(cell(r, 0, "N") == 1.0);
  CHECK_THAT(r.summary_value("c"), WithinAbs(31.6, 8.0));
  CHECK_THAT(r.summary_value("exponent"), WithinAbs(2.0, 0.25));
  CHECK(r.summary_value("fit_converged") == 1.0);
}

TEST_CASE("fig5a total phase grows quadratically") {
  ExperimentConfig cfg = default_config(Mode::fig5a);
  cfg.true_a = 0.042;
  const RunResult r = run_experiment(cfg);
  CHECK_THAT(cell(r, 8, "trueTotalPhase"), WithinAbs(2.995, 1e-12));
  CHECK_THAT(r.summary_value("fit_a"), WithinAbs(0.042, 2e-3));
  CHECK_THAT(r.summary_value("fit_phi0"), WithinAbs(0.307, 0.05));
}

TEST_CASE("fig5b total phase grows linearly in the x passes") {
  ExperimentConfig cfg = default_config(Mode::fig5b);
  cfg.true_a = 0.042;
  const RunResult r = run_experiment(cfg);
  // One fixed p pass: each extra x pass adds x*p = 0.042.
  CHECK_THAT(cell(r, 0, "trueTotalPhase"), WithinAbs(0.307, 1e-12));
  CHECK_THAT(cell(r, 8, "trueTotalPhase"), WithinAbs(0.307 + 8 * 0.042, 1e-12));
  CHECK_THAT(r.summary_value("phase_per_pass"), WithinAbs(0.042, 2e-3));
  CHECK_THAT(r.summary_value("growth_exponent"), WithinAbs(1.0, 0.1));
}

TEST_CASE("baseline mode decays like one over N") {
  ExperimentConfig cfg = default_config(Mode::baseline);
  const RunResult r = run_experiment(cfg);
  CHECK_THAT(r.summary_value("decay_exponent"), WithinAbs(1.0, 0.15));
  // Idealized bound at the top depth; the sample-mean product pays sqrt(2).
  const double bound = cell(r, 7, "crbFixedOrder");
  CHECK(r.summary_value("rmse_at_n_max") > bound);
  CHECK(r.summary_value("rmse_at_n_max") < 2.0 * bound);
}

TEST_CASE("loss sweep rescaling collapses onto the loss-free error") {
  ExperimentConfig cfg = default_config(Mode::loss_sweep);
  cfg.trials = 60;
  const RunResult r = run_experiment(cfg);
  REQUIRE(r.table.rows.size() == 3);
  CHECK_THAT(cell(r, 2, "survivalProb"), WithinRel(0.66978257127, 1e-9));
  for (std::size_t row = 0; row < 3; ++row) {
    INFO("row " << row);
    CHECK_THAT(cell(r, row, "rmseLossyRescaled"),
               WithinRel(cell(r, row, "rmseLossFree"), 0.5));
  }
}

TEST_CASE("oracle check passes at the default window and flags bad cutoffs") {
  ExperimentConfig cfg = default_config(Mode::oracle_check);
  cfg.oracle_samples = 25;
  const RunResult good = run_experiment(cfg);
  CHECK(good.passed);
  CHECK(good.summary_value("max_deviation") < 1e-6);
  CHECK(good.summary_value("min_retention") >= 0.999);
  CHECK(good.note.find("PASS") != std::string::npos);

  // An 8-level cutoff cannot hold the same loops: retention collapses and
  // the run reports failure instead of silently passing.
  cfg.oracle_cutoff = 8;
  cfg.oracle_max_amplitude = 2.0;
  const RunResult bad = run_experiment(cfg);
  CHECK_FALSE(bad.passed);
}

TEST_CASE("an experiment where every shot is lost reports a usable error") {
  ExperimentConfig cfg = default_config(Mode::fig3);
  cfg.nu = 5;
  cfg.trials = 2;
  cfg.eta = 1e-3;
  cfg.n_min = 8;
  cfg.n_max = 8;
  CHECK_THROWS_AS(run_experiment(cfg), std::domain_error);
}

TEST_CASE("csv bytes are identical across reruns and thread caps") {
  ExperimentConfig cfg = default_config(Mode::fig4);
  cfg.trials = 12;
  cfg.n_max = 5;
  const std::string first = csv_text(run_experiment(cfg));
  const std::string second = csv_text(run_experiment(cfg));
  CHECK(first == second);
  {
    ThreadCapGuard guard("3");
    CHECK(csv_text(run_experiment(cfg)) == first);
  }
  {
    ThreadCapGuard guard("16");
    CHECK(csv_text(run_experiment(cfg)) == first);
  }
  CHECK(first.find("\r") == std::string::npos);  // LF endings only
}

TEST_CASE("thread cap rejects nonsense") {
  ThreadCapGuard guard("zero");
  CHECK_THROWS_AS(thread_cap(), std::invalid_argument);
  setenv("SWITCHMET_THREADS", "-2", 1);
  CHECK_THROWS_AS(thread_cap(), std::invalid_argument);
  setenv("SWITCHMET_THREADS", "6", 1);
  CHECK(thread_cap() == 6);
}

TEST_CASE("written outputs reload and reproduce themselves") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "switchmet_io_test";
  fs::remove_all(dir);

  ExperimentConfig cfg = default_config(Mode::fig3);
  cfg.trials = 8;
  cfg.n_max = 4;
  cfg.out_dir = (dir / "first").string();
  const RunResult r = run_experiment(cfg);
  const OutputPaths paths = write_outputs(r);
  REQUIRE(fs::exists(paths.csv));
  REQUIRE(fs::exists(paths.manifest));

  // Reload the manifest's embedded config, rerun elsewhere, compare bytes.
  ExperimentConfig reloaded = load_config_file(paths.manifest.string());
  reloaded.out_dir = (dir / "second").string();
  const OutputPaths paths2 = write_outputs(run_experiment(reloaded));
  CHECK(slurp(paths.csv) == slurp(paths2.csv));

  const ordered_json manifest = ordered_json::parse(slurp(paths.manifest));
  CHECK(manifest.at("tool") == "switchmet");
  CHECK(manifest.at("mode") == "fig3");
  CHECK(manifest.at("rows") == 5);
  CHECK(manifest.at("csv") == "fig3.csv");
  CHECK(manifest.at("passed") == true);
  CHECK(manifest.contains("wall_clock_ms"));

  CHECK_THROWS_AS(load_config_file((dir / "missing.json").string()), io_error);
  fs::remove_all(dir);
}
