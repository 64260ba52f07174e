#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xlchan/errors.hpp"
#include "xlchan/experiments.hpp"

// Flat key = value configuration files. '#' starts a comment, blank lines
// are ignored, keys use the same dotted names the metadata sidecar dumps,
// so a sidecar's config.* block (with the prefix stripped) is itself a
// valid config file. Unknown keys are rejected by name rather than
// silently ignored.

namespace xlchan {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": invalid number \"" + value + "\"");
  }
}

inline int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": invalid integer \"" + value + "\"");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    // stoull would wrap a negative value around instead of rejecting it
    if (value.find('-') != std::string::npos) throw std::invalid_argument(value);
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": invalid integer \"" + value + "\"");
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("config key " + key + ": expected true or false, got \"" +
                    value + "\"");
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) items.push_back(trim(item));
  return items;
}

inline std::vector<double> parse_double_list(const std::string& key,
                                             const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value))
    out.push_back(parse_double(key, item));
  return out;
}

} // namespace detail

// Apply one key/value pair on top of cfg. Values are parsed but not
// cross-validated here; call cfg.validate() once everything is applied.
inline void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                               const std::string& value) {
  using namespace detail;
  if (key == "array.num_antennas") cfg.num_antennas = parse_int(key, value);
  else if (key == "array.wavelength") cfg.wavelength = parse_double(key, value);
  else if (key == "array.antenna_spacing") cfg.antenna_spacing = parse_double(key, value);
  else if (key == "channel.num_paths") cfg.num_paths = parse_int(key, value);
  else if (key == "channel.gamma") cfg.gamma = parse_double(key, value);
  else if (key == "channel.angle_min") cfg.sampling.angle_min = parse_double(key, value);
  else if (key == "channel.angle_max") cfg.sampling.angle_max = parse_double(key, value);
  else if (key == "channel.distance_min") cfg.sampling.distance_min = parse_double(key, value);
  else if (key == "channel.distance_max") cfg.sampling.distance_max = parse_double(key, value);
  else if (key == "pilot.count") cfg.pilot_count = parse_int(key, value);
  else if (key == "pilot.kind") {
    if (value == "random-sign") cfg.pilot_kind = PilotKind::random_sign;
    else if (value == "identity") cfg.pilot_kind = PilotKind::identity;
    else throw ConfigError("config key pilot.kind: expected random-sign or "
                           "identity, got \"" + value + "\"");
  }
  else if (key == "pilot.allow_oversampled") cfg.allow_oversampled = parse_bool(key, value);
  else if (key == "noise.snr_db") cfg.snr_db = parse_double(key, value);
  else if (key == "sweep.snr_grid_db") cfg.snr_grid_db = parse_double_list(key, value);
  else if (key == "sweep.gamma_grid") cfg.gamma_grid = parse_double_list(key, value);
  else if (key == "estimators") cfg.estimators = split_list(value);
  else if (key == "omp.kappa") cfg.kappa = parse_int(key, value);
  else if (key == "dict.beta") cfg.dict.beta = parse_double(key, value);
  else if (key == "dict.rho_min") cfg.dict.rho_min = parse_double(key, value);
  else if (key == "dict.include_far_column") cfg.dict.include_far_column = parse_bool(key, value);
  else if (key == "mmse.identity_pilots") cfg.mmse_identity_pilots = parse_bool(key, value);
  else if (key == "mmse.train_factor") cfg.mmse_train_factor = parse_int(key, value);
  else if (key == "trials") cfg.trials = parse_int(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "threads") cfg.threads = parse_int(key, value);
  else throw ConfigError("unknown config key \"" + key + "\"");
}

inline void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    apply_config_entry(cfg, key, value);
  }
}

} // namespace xlchan
