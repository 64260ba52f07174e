#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "xlchan/array.hpp"
#include "xlchan/channel.hpp"
#include "xlchan/dictionary.hpp"
#include "xlchan/errors.hpp"
#include "xlchan/estimators.hpp"
#include "xlchan/measurement.hpp"
#include "xlchan/rng.hpp"
#include "xlchan/version.hpp"

// Monte Carlo NMSE sweeps.
//
// Reproducibility contract: a sweep is fully determined by its
// ExperimentConfig (seed included). Trial t of sweep point p draws from the
// child stream (seed, TRIAL, p, t) in a fixed order: channel paths, then
// pilot signs, then measurement noise, then (if enabled) the extra
// identity-pilot noise for MMSE. MMSE training channels come from the
// separate stream (seed, TRAIN, p), so they can never collide with
// evaluation draws. Per-trial results are stored by trial index and reduced
// serially afterwards, which makes the output byte-identical whether trials
// run on one thread or many.

namespace xlchan {

inline constexpr std::uint64_t stream_tag_trial = 0x545249414cULL;
inline constexpr std::uint64_t stream_tag_training = 0x545241494eULL;

enum class EstimatorId { ff_omp, nf_omp, hf_omp, ls, mmse };

inline EstimatorId parse_estimator_name(const std::string& name) {
  if (name == "ff-omp") return EstimatorId::ff_omp;
  if (name == "nf-omp") return EstimatorId::nf_omp;
  if (name == "hf-omp") return EstimatorId::hf_omp;
  if (name == "ls") return EstimatorId::ls;
  if (name == "mmse") return EstimatorId::mmse;
  throw ConfigError("unknown estimator \"" + name +
                    "\" (known: ff-omp, nf-omp, hf-omp, ls, mmse)");
}

struct ExperimentConfig {
  // array
  int num_antennas = 256;
  double wavelength = 0.01;        // meters
  double antenna_spacing = -1.0;   // meters; < 0 means lambda/2
  // channel
  int num_paths = 6;
  double gamma = 0.5;
  PathSamplingConfig sampling;
  // pilots
  int pilot_count = 128;
  PilotKind pilot_kind = PilotKind::random_sign;
  bool allow_oversampled = false;
  // operating point and sweep grids
  double snr_db = 5.0;  // used by the gamma sweep
  std::vector<double> snr_grid_db = {0.0, 2.0, 4.0, 6.0, 8.0, 10.0};
  std::vector<double> gamma_grid;  // empty: multiples of 1/num_paths
  // estimators
  std::vector<std::string> estimators = {"ff-omp", "nf-omp", "hf-omp", "mmse"};
  int kappa = 12;  // sparsity budget = kappa * num_paths
  // polar dictionary
  PolarGridParams dict;
  // mmse benchmark
  bool mmse_identity_pilots = true;  // give MMSE its own full-rank observation
  int mmse_train_factor = 10;        // covariance draws = factor * N
  // run control
  int trials = 500;
  std::uint64_t seed = 12345;
  int threads = 1;

  double spacing() const {
    return antenna_spacing < 0.0 ? wavelength / 2.0 : antenna_spacing;
  }

  ArrayConfig array() const {
    return ArrayConfig(num_antennas, wavelength, spacing());
  }

  std::vector<double> effective_gamma_grid() const {
    if (!gamma_grid.empty()) return gamma_grid;
    std::vector<double> grid;
    for (int k = 0; k <= num_paths; ++k)
      grid.push_back(static_cast<double>(k) / num_paths);
    return grid;
  }

  void validate() const {
    array();  // validates geometry fields
    sampling.validate();
    if (num_paths < 1) throw ConfigError("channel.num_paths must be >= 1");
    if (!(gamma >= 0.0 && gamma <= 1.0))
      throw ConfigError("channel.gamma must lie in [0, 1]");
    if (pilot_count < 1) throw ConfigError("pilot.count must be >= 1");
    if (pilot_count > num_antennas && !allow_oversampled &&
        pilot_kind == PilotKind::random_sign)
      throw ConfigError("pilot.count exceeds array.num_antennas; set "
                        "pilot.allow_oversampled to permit this");
    if (kappa < 1) throw ConfigError("omp.kappa must be >= 1");
    if (static_cast<long>(kappa) * num_paths > num_antennas)
      throw ConfigError("omp.kappa * channel.num_paths exceeds the angle "
                        "dictionary size");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (mmse_train_factor < 1) throw ConfigError("mmse.train_factor must be >= 1");
    if (estimators.empty()) throw ConfigError("estimators list is empty");
    for (const std::string& name : estimators) parse_estimator_name(name);
    if (snr_grid_db.empty()) throw ConfigError("sweep.snr_grid_db is empty");
    for (double g : gamma_grid)
      if (!(g >= 0.0 && g <= 1.0))
        throw ConfigError("sweep.gamma_grid values must lie in [0, 1]");
  }
};

// N = 256 half-scale setup: quick enough for desk iteration, same physics.
inline ExperimentConfig desk_profile() { return ExperimentConfig{}; }

// Full-scale setup: N = 512, M = 256, denser distance rings (beta = 2.4
// puts the polar grid in the low-thousands of columns).
inline ExperimentConfig large_profile() {
  ExperimentConfig cfg;
  cfg.num_antennas = 512;
  cfg.pilot_count = 256;
  cfg.dict.beta = 2.4;
  return cfg;
}

inline double nmse(const CVector& truth, const CVector& estimate) {
  if (truth.size() != estimate.size())
    throw DomainError("nmse: vector lengths differ");
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) throw DomainError("nmse: reference vector has zero norm");
  return (truth - estimate).squaredNorm() / denom;
}

struct SweepPoint {
  int index = 0;       // position in the sweep grid, part of the stream tag
  double gamma = 0.5;
  double snr_db = 5.0;
  double sigma2 = 0.0;
};

struct SweepAssets {
  Dictionary angle_dict;
  Dictionary polar_dict;
};

inline SweepAssets prepare_assets(const ExperimentConfig& cfg) {
  cfg.validate();
  const ArrayConfig array = cfg.array();
  SweepAssets assets;
  assets.angle_dict = dft_dictionary(array);
  assets.polar_dict = polar_dictionary(array, cfg.dict);
  return assets;
}

struct TrialOutcome {
  std::vector<double> nmse_linear;  // one slot per configured estimator
  std::vector<std::uint8_t> failed;
};

// One Monte Carlo trial at one sweep point. mmse_solver must be non-null
// when "mmse" is configured with identity-pilot benchmarking (the driver
// precomputes it per point); mmse_covariance must be non-null when "mmse"
// is configured to share the sweep pilots instead.
inline TrialOutcome run_trial(const ExperimentConfig& cfg,
                              const SweepAssets& assets,
                              const SweepPoint& point,
                              const MmseSolver* mmse_solver,
                              const CMatrix* mmse_covariance,
                              int trial_index) {
  const ArrayConfig array = cfg.array();
  RandomStream rng = RandomStream::child(
      cfg.seed, {stream_tag_trial, static_cast<std::uint64_t>(point.index),
                 static_cast<std::uint64_t>(trial_index)});

  const ChannelRealization chan =
      sample_channel(array, cfg.num_paths, point.gamma, cfg.sampling, rng);
  const PilotMatrix pilots =
      cfg.pilot_kind == PilotKind::identity
          ? identity_pilots(cfg.num_antennas)
          : random_pilots(cfg.pilot_count, cfg.num_antennas, rng,
                          cfg.allow_oversampled);
  const MeasurementRecord rec = observe(pilots, chan, point.sigma2, rng);

  const bool wants_mmse =
      std::find(cfg.estimators.begin(), cfg.estimators.end(), "mmse") !=
      cfg.estimators.end();
  std::optional<MeasurementRecord> mmse_rec;
  if (wants_mmse && cfg.mmse_identity_pilots &&
      cfg.pilot_kind != PilotKind::identity)
    mmse_rec = observe(identity_pilots(cfg.num_antennas), chan, point.sigma2,
                       rng);

  const int budget = cfg.kappa * cfg.num_paths;
  TrialOutcome out;
  out.nmse_linear.resize(cfg.estimators.size(), 0.0);
  out.failed.resize(cfg.estimators.size(), 0);
  for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
    try {
      CVector h_hat;
      switch (parse_estimator_name(cfg.estimators[e])) {
        case EstimatorId::ff_omp:
          h_hat = ff_omp_estimate(rec, assets.angle_dict, budget).h_hat;
          break;
        case EstimatorId::nf_omp:
          h_hat = nf_omp_estimate(rec, assets.polar_dict, budget).h_hat;
          break;
        case EstimatorId::hf_omp:
          h_hat = hf_omp_estimate(rec, assets.angle_dict, assets.polar_dict,
                                  cfg.num_paths, point.gamma, cfg.kappa)
                      .h_hat;
          break;
        case EstimatorId::ls:
          h_hat = ls_estimate(rec.observation, rec.pilots);
          break;
        case EstimatorId::mmse: {
          const MeasurementRecord& mr = mmse_rec ? *mmse_rec : rec;
          if (mmse_solver)
            h_hat = mmse_solver->apply(mr.observation);
          else if (mmse_covariance)
            h_hat = mmse_estimate(mr.observation, mr.pilots, *mmse_covariance,
                                  point.sigma2);
          else
            throw NumericalError("run_trial: mmse requested without a solver "
                                 "or covariance");
          break;
        }
      }
      out.nmse_linear[e] = nmse(chan.h, h_hat);
    } catch (const std::exception&) {
      out.failed[e] = 1;
    }
  }
  return out;
}

struct SweepRow {
  double sweep_value = 0.0;
  std::string estimator;
  double nmse_linear = 0.0;
  double nmse_db = 0.0;
  int trials = 0;  // successful trials behind the mean
  double stderr_db = 0.0;
  int failures = 0;
};

struct SweepResult {
  std::string sweep_name;  // "snr_db" or "gamma"
  std::vector<SweepRow> rows;
  Index achieved_polar_columns = 0;
  std::uint64_t seed = 0;
  std::string config_text;  // canonical key=value dump the hash covers
  std::string config_hash;
  int total_failures = 0;
};

namespace detail {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline void run_trials(int trials, int threads,
                       const std::function<void(int)>& body) {
  if (threads <= 1) {
    for (int t = 0; t < trials; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) body(t);
  };
  std::vector<std::thread> pool;
  const int n_workers = std::min(threads, trials);
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
}

} // namespace detail

inline std::string canonical_config_text(const ExperimentConfig& cfg) {
  using detail::format_g17;
  std::ostringstream out;
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += detail::format_g17(v[i]);
    }
    return s;
  };
  auto names = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += v[i];
    }
    return s;
  };
  out << "array.antenna_spacing=" << format_g17(cfg.spacing()) << "\n";
  out << "array.num_antennas=" << cfg.num_antennas << "\n";
  out << "array.wavelength=" << format_g17(cfg.wavelength) << "\n";
  out << "channel.angle_max=" << format_g17(cfg.sampling.angle_max) << "\n";
  out << "channel.angle_min=" << format_g17(cfg.sampling.angle_min) << "\n";
  out << "channel.distance_max=" << format_g17(cfg.sampling.distance_max) << "\n";
  out << "channel.distance_min=" << format_g17(cfg.sampling.distance_min) << "\n";
  out << "channel.gamma=" << format_g17(cfg.gamma) << "\n";
  out << "channel.num_paths=" << cfg.num_paths << "\n";
  out << "dict.beta=" << format_g17(cfg.dict.beta) << "\n";
  out << "dict.include_far_column=" << (cfg.dict.include_far_column ? "true" : "false")
      << "\n";
  out << "dict.rho_min=" << format_g17(cfg.dict.rho_min) << "\n";
  out << "estimators=" << names(cfg.estimators) << "\n";
  out << "mmse.identity_pilots=" << (cfg.mmse_identity_pilots ? "true" : "false")
      << "\n";
  out << "mmse.train_factor=" << cfg.mmse_train_factor << "\n";
  out << "noise.snr_db=" << format_g17(cfg.snr_db) << "\n";
  out << "omp.kappa=" << cfg.kappa << "\n";
  out << "pilot.allow_oversampled=" << (cfg.allow_oversampled ? "true" : "false")
      << "\n";
  out << "pilot.count=" << cfg.pilot_count << "\n";
  out << "pilot.kind="
      << (cfg.pilot_kind == PilotKind::identity ? "identity" : "random-sign")
      << "\n";
  out << "seed=" << cfg.seed << "\n";
  out << "sweep.gamma_grid=" << list(cfg.effective_gamma_grid()) << "\n";
  out << "sweep.snr_grid_db=" << list(cfg.snr_grid_db) << "\n";
  // threads is deliberately absent: it cannot affect results, so it is not
  // part of the experiment's identity.
  out << "trials=" << cfg.trials << "\n";
  return out.str();
}

inline std::string config_hash_hex(const ExperimentConfig& cfg) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(
                    detail::fnv1a64(canonical_config_text(cfg))));
  return buf;
}

namespace detail {

inline SweepResult run_sweep(const ExperimentConfig& cfg,
                             const std::vector<SweepPoint>& points,
                             const std::string& sweep_name) {
  const SweepAssets assets = prepare_assets(cfg);
  const ArrayConfig array = cfg.array();
  const bool wants_mmse =
      std::find(cfg.estimators.begin(), cfg.estimators.end(), "mmse") !=
      cfg.estimators.end();

  SweepResult result;
  result.sweep_name = sweep_name;
  result.achieved_polar_columns = assets.polar_dict.cols();
  result.seed = cfg.seed;
  result.config_text = canonical_config_text(cfg);
  result.config_hash = config_hash_hex(cfg);

  const std::size_t n_est = cfg.estimators.size();
  for (const SweepPoint& point : points) {
    std::optional<SampleCovariance> cov;
    std::optional<MmseSolver> solver;
    if (wants_mmse) {
      RandomStream train = RandomStream::child(
          cfg.seed,
          {stream_tag_training, static_cast<std::uint64_t>(point.index)});
      cov = sample_covariance(array, cfg.num_paths, point.gamma, cfg.sampling,
                              cfg.mmse_train_factor * cfg.num_antennas, train);
      if (cfg.mmse_identity_pilots || cfg.pilot_kind == PilotKind::identity)
        solver.emplace(cov->matrix, identity_pilots(cfg.num_antennas),
                       point.sigma2);
    }
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    detail::run_trials(cfg.trials, cfg.threads, [&](int t) {
      outcomes[static_cast<std::size_t>(t)] =
          run_trial(cfg, assets, point, solver ? &*solver : nullptr,
                    cov ? &cov->matrix : nullptr, t);
    });
    for (std::size_t e = 0; e < n_est; ++e) {
      SweepRow row;
      row.sweep_value = sweep_name == "gamma" ? point.gamma : point.snr_db;
      row.estimator = cfg.estimators[e];
      double sum = 0.0;
      int n_ok = 0;
      for (const TrialOutcome& o : outcomes) {
        if (o.failed[e]) {
          ++row.failures;
          continue;
        }
        sum += o.nmse_linear[e];
        ++n_ok;
      }
      result.total_failures += row.failures;
      row.trials = n_ok;
      if (n_ok > 0) {
        const double mean = sum / n_ok;
        double ss = 0.0;
        for (const TrialOutcome& o : outcomes) {
          if (o.failed[e]) continue;
          const double dev = o.nmse_linear[e] - mean;
          ss += dev * dev;
        }
        const double se_linear =
            n_ok > 1 ? std::sqrt(ss / (static_cast<double>(n_ok) * (n_ok - 1)))
                     : 0.0;
        row.nmse_linear = mean;
        row.nmse_db = 10.0 * std::log10(mean);
        // delta method: d(10 log10 x)/dx = 10 / (x ln 10)
        row.stderr_db = mean > 0.0 ? 10.0 / std::log(10.0) * se_linear / mean : 0.0;
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

} // namespace detail

inline SweepResult run_snr_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < cfg.snr_grid_db.size(); ++i) {
    SweepPoint p;
    p.index = static_cast<int>(i);
    p.gamma = cfg.gamma;
    p.snr_db = cfg.snr_grid_db[i];
    p.sigma2 = snr_db_to_sigma2(p.snr_db);
    points.push_back(p);
  }
  return detail::run_sweep(cfg, points, "snr_db");
}

inline SweepResult run_gamma_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<double> grid = cfg.effective_gamma_grid();
  std::vector<SweepPoint> points;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SweepPoint p;
    p.index = static_cast<int>(i);
    p.gamma = grid[i];
    p.snr_db = cfg.snr_db;
    p.sigma2 = snr_db_to_sigma2(p.snr_db);
    points.push_back(p);
  }
  return detail::run_sweep(cfg, points, "gamma");
}

inline void write_sweep_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
  if (!out)
    throw ConfigError("write_sweep_csv: cannot open " + path + " for writing");
  out << "sweep_value,estimator,nmse_linear,nmse_db,trials,stderr_db\n";
  for (const SweepRow& row : result.rows) {
    out << detail::format_g17(row.sweep_value) << "," << row.estimator << ","
        << detail::format_g17(row.nmse_linear) << ","
        << detail::format_g17(row.nmse_db) << "," << row.trials << ","
        << detail::format_g17(row.stderr_db) << "\n";
  }
  if (!out) throw ConfigError("write_sweep_csv: write to " + path + " failed");
}

// key=value sidecar capturing everything needed to reproduce the run.
inline void write_sweep_metadata(const SweepResult& result,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("write_sweep_metadata: cannot open " + path +
                      " for writing");
  out << "library_version=" << version_string << "\n";
  out << "sweep=" << result.sweep_name << "\n";
  out << "config_hash=" << result.config_hash << "\n";
  out << "base_seed=" << result.seed << "\n";
  out << "achieved_polar_columns=" << result.achieved_polar_columns << "\n";
  out << "estimator_failures=" << result.total_failures << "\n";
  std::istringstream lines(result.config_text);
  std::string line;
  while (std::getline(lines, line)) out << "config." << line << "\n";
  if (!out)
    throw ConfigError("write_sweep_metadata: write to " + path + " failed");
}

inline std::vector<SweepRow> read_sweep_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_sweep_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "sweep_value,estimator,nmse_linear,nmse_db,trials,stderr_db")
    throw ConfigError("read_sweep_csv: " + path + " has an unexpected header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    std::vector<std::string> fields;
    while (std::getline(cells, cell, ',')) fields.push_back(cell);
    if (fields.size() != 6)
      throw ConfigError("read_sweep_csv: malformed row \"" + line + "\"");
    SweepRow row;
    row.sweep_value = std::stod(fields[0]);
    row.estimator = fields[1];
    row.nmse_linear = std::stod(fields[2]);
    row.nmse_db = std::stod(fields[3]);
    row.trials = std::stoi(fields[4]);
    row.stderr_db = std::stod(fields[5]);
    rows.push_back(std::move(row));
  }
  return rows;
}

} // namespace xlchan
