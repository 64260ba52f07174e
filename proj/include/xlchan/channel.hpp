#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "xlchan/array.hpp"
#include "xlchan/dictionary.hpp"
#include "xlchan/errors.hpp"
#include "xlchan/rng.hpp"

// Hybrid-field multipath channel synthesis.
//
// A channel with L paths, a fraction gamma of them far-field, is
//   h = sqrt(N/L) * sum_l alpha_l * steer_l
// where steer_l is far_steering(theta_l) for far paths and
// near_steering(theta_l, r_l) for near paths. Gains are CN(0,1), so
// E||h||^2 = N regardless of gamma (each steering vector has unit norm).
//
// The far path count is round(gamma*L) with halves rounding up, i.e. ties
// go to the far-field side; gamma = 0 and gamma = 1 degenerate to purely
// near- and purely far-field channels.

namespace xlchan {

enum class FieldType { far, near };

struct PathComponent {
  std::complex<double> gain;  // alpha ~ CN(0,1) when sampled
  double angle;               // normalized, in [-1, 1]
  double distance;            // meters; +inf for far-field paths
  FieldType field;
};

struct ChannelRealization {
  CVector h;
  std::vector<PathComponent> paths;
  double gamma;  // far-field fraction this realization was drawn with
};

struct PathSamplingConfig {
  double angle_min = -1.0;
  double angle_max = 1.0;
  double distance_min = 10.0;  // meters
  double distance_max = 80.0;

  void validate() const {
    if (!(angle_min < angle_max) || angle_min < -1.0 || angle_max > 1.0)
      throw ConfigError("PathSamplingConfig: angle range must be a non-empty "
                        "subinterval of [-1, 1]");
    if (!(distance_min < distance_max) || !(distance_min > 0.0))
      throw ConfigError("PathSamplingConfig: distance range must be a "
                        "non-empty positive interval");
  }
};

inline int far_path_count(int num_paths, double gamma) {
  if (num_paths < 1) throw DomainError("far_path_count: need at least 1 path");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw DomainError("far_path_count: gamma must lie in [0, 1]");
  return static_cast<int>(std::round(gamma * num_paths));
}

// Draw L path parameters. Ordering and draw sequence are fixed: far paths
// first, each consuming (gain, angle); then near paths, each consuming
// (gain, angle, distance).
inline std::vector<PathComponent> sample_paths(int num_paths, double gamma,
                                               const PathSamplingConfig& sampling,
                                               RandomStream& rng) {
  sampling.validate();
  const int n_far = far_path_count(num_paths, gamma);
  std::vector<PathComponent> paths;
  paths.reserve(static_cast<std::size_t>(num_paths));
  for (int l = 0; l < n_far; ++l) {
    PathComponent p;
    p.gain = rng.cgaussian();
    p.angle = rng.uniform(sampling.angle_min, sampling.angle_max);
    p.distance = std::numeric_limits<double>::infinity();
    p.field = FieldType::far;
    paths.push_back(p);
  }
  for (int l = n_far; l < num_paths; ++l) {
    PathComponent p;
    p.gain = rng.cgaussian();
    p.angle = rng.uniform(sampling.angle_min, sampling.angle_max);
    p.distance = rng.uniform(sampling.distance_min, sampling.distance_max);
    p.field = FieldType::near;
    paths.push_back(p);
  }
  return paths;
}

inline CVector synthesize_vector(const ArrayConfig& cfg,
                                 const std::vector<PathComponent>& paths) {
  if (paths.empty()) throw DomainError("synthesize_vector: no paths");
  const double scale =
      std::sqrt(static_cast<double>(cfg.num_antennas) / paths.size());
  CVector h = CVector::Zero(cfg.num_antennas);
  for (const PathComponent& p : paths) {
    const CVector steer = p.field == FieldType::far
                              ? far_steering(cfg, p.angle)
                              : near_steering(cfg, p.angle, p.distance);
    h.noalias() += p.gain * steer;
  }
  return scale * h;
}

inline ChannelRealization synthesize(const ArrayConfig& cfg,
                                     std::vector<PathComponent> paths,
                                     double gamma) {
  ChannelRealization real;
  real.h = synthesize_vector(cfg, paths);
  real.paths = std::move(paths);
  real.gamma = gamma;
  return real;
}

inline ChannelRealization sample_channel(const ArrayConfig& cfg, int num_paths,
                                         double gamma,
                                         const PathSamplingConfig& sampling,
                                         RandomStream& rng) {
  return synthesize(cfg, sample_paths(num_paths, gamma, sampling, rng), gamma);
}

// Monte Carlo estimate of E||h||^2 / N; should sit near 1 for any gamma.
inline double mean_channel_power(const ArrayConfig& cfg, int num_paths,
                                 double gamma,
                                 const PathSamplingConfig& sampling,
                                 int trials, RandomStream& rng) {
  if (trials < 1) throw DomainError("mean_channel_power: trials must be >= 1");
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ChannelRealization real =
        sample_channel(cfg, num_paths, gamma, sampling, rng);
    acc += real.h.squaredNorm();
  }
  return acc / (static_cast<double>(trials) * cfg.num_antennas);
}

// Channel vectors reuse the dictionary container (kind = channel, one
// column, a single placeholder grid record).
inline void save_channel(const CVector& h, const std::string& path) {
  Dictionary dict;
  dict.kind = DictionaryKind::channel;
  dict.matrix = h;
  dict.grid = {{0.0, std::numeric_limits<double>::infinity()}};
  save_dictionary(dict, path);
}

inline CVector load_channel(const std::string& path) {
  const Dictionary dict = load_dictionary(path);
  if (dict.kind != DictionaryKind::channel || dict.cols() != 1)
    throw ConfigError("load_channel: " + path + " does not hold a channel");
  return dict.matrix.col(0);
}

} // namespace xlchan
