#pragma once

// Output writers and config (de)serialization.  CSV bodies must be byte
// identical across reruns and thread counts, so they carry no timestamps;
// wall-clock timing lives only in the JSON manifest.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "switchmet/config.hpp"
#include "switchmet/experiments.hpp"
#include "switchmet/version.hpp"

namespace switchmet {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ordered_json = nlohmann::ordered_json;

inline std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (const char c : cell) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

inline ordered_json physical_to_json(const PhysicalParams& p) {
  ordered_json j;
  j["x_ref_m"] = p.x_ref_m;
  j["theta_eff_rad"] = p.theta_eff_rad;
  j["wavelength_m"] = p.wavelength_m;
  j["sigma_x_m"] = p.sigma_x_m;
  j["fluctuation"] = p.fluctuation;
  return j;
}

inline ordered_json config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["mode"] = mode_name(cfg.mode);
  j["seed"] = cfg.seed;
  j["nu"] = cfg.nu;
  j["trials"] = cfg.trials;
  j["n_min"] = cfg.n_min;
  j["n_max"] = cfg.n_max;
  j["phi0"] = cfg.phi0;
  j["eta"] = cfg.eta;
  if (cfg.true_a) {
    j["true_a"] = *cfg.true_a;
  } else {
    j["true_a"] = nullptr;
  }
  j["redraw_per_trial"] = cfg.redraw_per_trial;
  j["loss_n_values"] = cfg.loss_n_values;
  j["baseline_reps"] = cfg.baseline_reps;
  j["oracle_samples"] = cfg.oracle_samples;
  j["oracle_cutoff"] = cfg.oracle_cutoff;
  j["oracle_max_amplitude"] = cfg.oracle_max_amplitude;
  j["oracle_max_n"] = cfg.oracle_max_n;
  j["out_dir"] = cfg.out_dir;
  j["physical"] = physical_to_json(cfg.physical);
  return j;
}

namespace detail {

template <typename T>
inline T field_as(const ordered_json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config field '" + key + "': " + e.what());
  }
}

inline void reject_unknown_keys(const ordered_json& j,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const std::string& k : allowed) {
      if (k == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument("unknown " + where + " key '" + key + "'");
    }
  }
}

}  // namespace detail

inline PhysicalParams physical_from_json(const ordered_json& j) {
  if (!j.is_object()) {
    throw std::invalid_argument("config field 'physical' must be an object");
  }
  detail::reject_unknown_keys(
      j, {"x_ref_m", "theta_eff_rad", "wavelength_m", "sigma_x_m", "fluctuation"},
      "physical");
  PhysicalParams p;
  if (j.contains("x_ref_m")) p.x_ref_m = detail::field_as<double>(j, "x_ref_m");
  if (j.contains("theta_eff_rad")) {
    p.theta_eff_rad = detail::field_as<double>(j, "theta_eff_rad");
  }
  if (j.contains("wavelength_m")) {
    p.wavelength_m = detail::field_as<double>(j, "wavelength_m");
  }
  if (j.contains("sigma_x_m")) p.sigma_x_m = detail::field_as<double>(j, "sigma_x_m");
  if (j.contains("fluctuation")) {
    p.fluctuation = detail::field_as<double>(j, "fluctuation");
  }
  return p;
}

// Accepts either a bare config object or a manifest that wraps one under
// "config".  Defaults come from default_config(mode); present fields
// override, unknown fields are rejected.
inline ExperimentConfig config_from_json(const ordered_json& root) {
  const ordered_json& j = root.contains("config") ? root.at("config") : root;
  if (!j.is_object()) {
    throw std::invalid_argument("config must be a JSON object");
  }
  if (!j.contains("mode")) {
    throw std::invalid_argument("config is missing required field 'mode'");
  }
  detail::reject_unknown_keys(
      j,
      {"mode", "seed", "nu", "trials", "n_min", "n_max", "phi0", "eta", "true_a",
       "redraw_per_trial", "loss_n_values", "baseline_reps", "oracle_samples",
       "oracle_cutoff", "oracle_max_amplitude", "oracle_max_n", "out_dir",
       "physical"},
      "config");
  ExperimentConfig cfg =
      default_config(mode_from_name(detail::field_as<std::string>(j, "mode")));
  if (j.contains("seed")) cfg.seed = detail::field_as<std::uint64_t>(j, "seed");
  if (j.contains("nu")) cfg.nu = detail::field_as<long>(j, "nu");
  if (j.contains("trials")) cfg.trials = detail::field_as<long>(j, "trials");
  if (j.contains("n_min")) cfg.n_min = detail::field_as<int>(j, "n_min");
  if (j.contains("n_max")) cfg.n_max = detail::field_as<int>(j, "n_max");
  if (j.contains("phi0")) cfg.phi0 = detail::field_as<double>(j, "phi0");
  if (j.contains("eta")) cfg.eta = detail::field_as<double>(j, "eta");
  if (j.contains("true_a")) {
    if (j.at("true_a").is_null()) {
      cfg.true_a.reset();
    } else {
      cfg.true_a = detail::field_as<double>(j, "true_a");
    }
  }
  if (j.contains("redraw_per_trial")) {
    cfg.redraw_per_trial = detail::field_as<bool>(j, "redraw_per_trial");
  }
  if (j.contains("loss_n_values")) {
    cfg.loss_n_values = detail::field_as<std::vector<int>>(j, "loss_n_values");
  }
  if (j.contains("baseline_reps")) {
    cfg.baseline_reps = detail::field_as<long>(j, "baseline_reps");
  }
  if (j.contains("oracle_samples")) {
    cfg.oracle_samples = detail::field_as<long>(j, "oracle_samples");
  }
  if (j.contains("oracle_cutoff")) {
    cfg.oracle_cutoff = detail::field_as<int>(j, "oracle_cutoff");
  }
  if (j.contains("oracle_max_amplitude")) {
    cfg.oracle_max_amplitude = detail::field_as<double>(j, "oracle_max_amplitude");
  }
  if (j.contains("oracle_max_n")) {
    cfg.oracle_max_n = detail::field_as<int>(j, "oracle_max_n");
  }
  if (j.contains("out_dir")) {
    cfg.out_dir = detail::field_as<std::string>(j, "out_dir");
  }
  if (j.contains("physical")) {
    cfg.physical = physical_from_json(j.at("physical"));
  }
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open config file: " + path);
  ordered_json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config parse error in ") + path +
                                ": " + e.what());
  }
  return config_from_json(root);
}

// CSV: '#' preamble (tool, mode, compact config, seed recipe), then a header
// row and the data rows.  Everything is deterministic given the config.
inline std::string csv_text(const RunResult& result) {
  std::ostringstream os;
  os << "# tool: switchmet " << version_string << "\n";
  os << "# mode: " << mode_name(result.config.mode) << "\n";
  // The echoed config omits out_dir: the destination is not part of the
  // experiment, and the bytes must not depend on where they are written.
  ordered_json echo = config_to_json(result.config);
  echo.erase("out_dir");
  os << "# config: " << echo.dump() << "\n";
  os << "# seed_derivation: " << seed_derivation_formula << "\n";
  for (std::size_t c = 0; c < result.table.columns.size(); ++c) {
    if (c) os << ',';
    os << csv_escape(result.table.columns[c]);
  }
  os << '\n';
  for (const auto& row : result.table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      os << csv_escape(row[c]);
    }
    os << '\n';
  }
  return os.str();
}

inline ordered_json manifest_json(const RunResult& result,
                                  const std::string& csv_filename) {
  ordered_json j;
  j["tool"] = "switchmet";
  j["version"] = version_string;
  j["mode"] = mode_name(result.config.mode);
  j["config"] = config_to_json(result.config);
  j["seed_derivation"] = seed_derivation_formula;
  j["csv"] = csv_filename;
  j["columns"] = result.table.columns;
  ordered_json summary = ordered_json::object();
  for (const auto& [key, value] : result.summary) summary[key] = value;
  j["summary"] = summary;
  j["passed"] = result.passed;
  if (!result.note.empty()) j["note"] = result.note;
  j["rows"] = static_cast<long>(result.table.rows.size());
  j["wall_clock_ms"] = result.wall_clock_ms;
  return j;
}

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path manifest;
};

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << text;
  out.flush();
  if (!out) throw io_error("write failed: " + path.string());
}

inline OutputPaths write_outputs(const RunResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(result.config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw io_error("cannot create output directory " + dir.string() + ": " +
                   ec.message());
  }
  const std::string stem = mode_name(result.config.mode);
  OutputPaths paths{dir / (stem + ".csv"), dir / (stem + "_manifest.json")};
  write_text_file(paths.csv, csv_text(result));
  write_text_file(paths.manifest,
                  manifest_json(result, paths.csv.filename().string()).dump(2) + "\n");
  return paths;
}

}  // namespace switchmet
