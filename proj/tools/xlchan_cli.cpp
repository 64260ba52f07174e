// xlchan: hybrid-field XL-MIMO channel estimation experiments.
//
// Subcommands:
//   sweep-snr    NMSE vs SNR at a fixed far-field fraction gamma
//   sweep-gamma  NMSE vs gamma at a fixed SNR
//   export-dict  write the angle or polar dictionary as a binary file
//   plotdata     split a sweep CSV into per-estimator (x, nmse_db) files
//
// Configuration precedence: profile defaults, then --config file, then
// individual command line flags. The effective configuration is logged to
// stderr before any computation starts.
//
// Exit codes: 0 success, 2 configuration or I/O problem, 3 numerical
// failure during computation.

#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xlchan/xlchan.hpp"

namespace {

struct CommonFlags {
  std::string profile = "desk";
  std::string config_path;
  std::uint64_t seed = 0;
  int trials = 0;
  int threads = 0;
  int kappa = 0;
  double gamma = 0.0;
  double snr_db = 0.0;
  std::string snr_grid;
  std::string gamma_grid;
  std::string estimators;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* trials_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* kappa_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* snr_db_opt = nullptr;
  CLI::Option* snr_grid_opt = nullptr;
  CLI::Option* gamma_grid_opt = nullptr;
  CLI::Option* estimators_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--profile", flags.profile,
                  "parameter profile: desk (N=256) or large (N=512)")
      ->check(CLI::IsMember({"desk", "large"}));
  cmd->add_option("--config", flags.config_path,
                  "key = value configuration file applied over the profile");
  flags.seed_opt = cmd->add_option("--seed", flags.seed, "base RNG seed");
  flags.trials_opt =
      cmd->add_option("--trials", flags.trials, "Monte Carlo trials per point");
  flags.threads_opt =
      cmd->add_option("--threads", flags.threads, "worker threads (1 = serial)");
  flags.kappa_opt =
      cmd->add_option("--kappa", flags.kappa, "sparsity budget multiplier");
  flags.gamma_opt = cmd->add_option("--gamma", flags.gamma,
                                    "far-field fraction (SNR sweeps)");
  flags.snr_db_opt = cmd->add_option("--snr-db", flags.snr_db,
                                     "operating SNR in dB (gamma sweeps)");
  flags.snr_grid_opt = cmd->add_option(
      "--snr-grid", flags.snr_grid, "comma separated SNR grid in dB");
  flags.gamma_grid_opt = cmd->add_option(
      "--gamma-grid", flags.gamma_grid, "comma separated gamma grid");
  flags.estimators_opt = cmd->add_option(
      "--estimators", flags.estimators,
      "comma separated subset of ff-omp,nf-omp,hf-omp,ls,mmse");
}

xlchan::ExperimentConfig assemble_config(const CommonFlags& flags) {
  xlchan::ExperimentConfig cfg =
      flags.profile == "large" ? xlchan::large_profile() : xlchan::desk_profile();
  if (!flags.config_path.empty())
    xlchan::apply_config_file(cfg, flags.config_path);
  if (flags.seed_opt->count()) cfg.seed = flags.seed;
  if (flags.trials_opt->count()) cfg.trials = flags.trials;
  if (flags.threads_opt->count()) cfg.threads = flags.threads;
  if (flags.kappa_opt->count()) cfg.kappa = flags.kappa;
  if (flags.gamma_opt->count()) cfg.gamma = flags.gamma;
  if (flags.snr_db_opt->count()) cfg.snr_db = flags.snr_db;
  if (flags.snr_grid_opt->count())
    xlchan::apply_config_entry(cfg, "sweep.snr_grid_db", flags.snr_grid);
  if (flags.gamma_grid_opt->count())
    xlchan::apply_config_entry(cfg, "sweep.gamma_grid", flags.gamma_grid);
  if (flags.estimators_opt->count())
    xlchan::apply_config_entry(cfg, "estimators", flags.estimators);
  cfg.validate();
  return cfg;
}

void log_effective_config(const xlchan::ExperimentConfig& cfg) {
  std::cerr << "effective configuration (hash " << xlchan::config_hash_hex(cfg)
            << "):\n";
  std::istringstream lines(xlchan::canonical_config_text(cfg));
  std::string line;
  while (std::getline(lines, line)) std::cerr << "  " << line << "\n";
}

int run_sweep_command(const CommonFlags& flags, const std::string& out_path,
                      bool gamma_sweep) {
  const xlchan::ExperimentConfig cfg = assemble_config(flags);
  log_effective_config(cfg);
  const xlchan::SweepResult result =
      gamma_sweep ? xlchan::run_gamma_sweep(cfg) : xlchan::run_snr_sweep(cfg);
  xlchan::write_sweep_csv(result, out_path);
  xlchan::write_sweep_metadata(result, out_path + ".meta");
  if (result.total_failures > 0)
    std::cerr << "warning: " << result.total_failures
              << " estimator failures were recorded; affected rows average "
                 "fewer trials\n";
  std::cout << "wrote " << result.rows.size() << " rows to " << out_path
            << " (metadata: " << out_path << ".meta, polar columns: "
            << result.achieved_polar_columns << ")\n";
  return 0;
}

int run_export_dict(const CommonFlags& flags, const std::string& kind,
                    const std::string& out_path) {
  const xlchan::ExperimentConfig cfg = assemble_config(flags);
  const xlchan::ArrayConfig array = cfg.array();
  const xlchan::Dictionary dict = kind == "angle"
                                      ? xlchan::dft_dictionary(array)
                                      : xlchan::polar_dictionary(array, cfg.dict);
  xlchan::save_dictionary(dict, out_path);
  std::cout << "wrote " << kind << " dictionary (" << dict.rows() << " x "
            << dict.cols() << ") to " << out_path << "\n";
  return 0;
}

int run_plotdata(const std::string& in_path, const std::string& out_prefix) {
  const std::vector<xlchan::SweepRow> rows = xlchan::read_sweep_csv(in_path);
  if (rows.empty()) throw xlchan::ConfigError(in_path + " holds no data rows");
  std::map<std::string, std::vector<const xlchan::SweepRow*>> by_estimator;
  for (const xlchan::SweepRow& row : rows)
    by_estimator[row.estimator].push_back(&row);
  for (const auto& [name, est_rows] : by_estimator) {
    const std::string path = out_prefix + "." + name + ".dat";
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw xlchan::ConfigError("cannot open " + path + " for writing");
    char buf[80];
    for (const xlchan::SweepRow* row : est_rows) {
      std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", row->sweep_value,
                    row->nmse_db);
      out << buf;
    }
    if (!out) throw xlchan::ConfigError("write to " + path + " failed");
    std::cout << "wrote " << est_rows.size() << " points to " << path << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid-field XL-MIMO channel estimation experiments"};
  app.require_subcommand(1);

  CommonFlags snr_flags;
  std::string snr_out;
  CLI::App* snr_cmd =
      app.add_subcommand("sweep-snr", "NMSE vs SNR at fixed gamma");
  add_common_flags(snr_cmd, snr_flags);
  snr_cmd->add_option("--out", snr_out, "output CSV path")->required();

  CommonFlags gamma_flags;
  std::string gamma_out;
  CLI::App* gamma_cmd =
      app.add_subcommand("sweep-gamma", "NMSE vs gamma at fixed SNR");
  add_common_flags(gamma_cmd, gamma_flags);
  gamma_cmd->add_option("--out", gamma_out, "output CSV path")->required();

  CommonFlags dict_flags;
  std::string dict_kind;
  std::string dict_out;
  CLI::App* dict_cmd =
      app.add_subcommand("export-dict", "write a dictionary as a binary file");
  add_common_flags(dict_cmd, dict_flags);
  dict_cmd->add_option("--kind", dict_kind, "angle or polar")
      ->required()
      ->check(CLI::IsMember({"angle", "polar"}));
  dict_cmd->add_option("--out", dict_out, "output file path")->required();

  std::string plot_in;
  std::string plot_prefix;
  CLI::App* plot_cmd = app.add_subcommand(
      "plotdata", "split a sweep CSV into per-estimator x/nmse_db files");
  plot_cmd->add_option("--in", plot_in, "sweep CSV path")->required();
  plot_cmd->add_option("--out-prefix", plot_prefix,
                       "output prefix; files are <prefix>.<estimator>.dat")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.get_name() << ": " << e.what() << "\n";
    return 2;
  }

  try {
    if (snr_cmd->parsed()) return run_sweep_command(snr_flags, snr_out, false);
    if (gamma_cmd->parsed())
      return run_sweep_command(gamma_flags, gamma_out, true);
    if (dict_cmd->parsed())
      return run_export_dict(dict_flags, dict_kind, dict_out);
    if (plot_cmd->parsed()) return run_plotdata(plot_in, plot_prefix);
  } catch (const xlchan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const xlchan::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
