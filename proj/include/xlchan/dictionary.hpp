#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "xlchan/array.hpp"
#include "xlchan/errors.hpp"

// Sparsifying dictionaries.
//
// Angle domain: the N-point unitary DFT grid theta_n = (2n - N - 1)/N,
// n = 1..N. At half-wavelength spacing the columns are exactly orthonormal.
//
// Polar domain: the same N angles, each paired with distance samples placed
// uniformly in 1/r,
//   r_s = N^2 d^2 (1 - theta^2) / (2 lambda beta^2 s),   s = 1, 2, ...
// kept while r_s >= rho_min, plus one infinite-distance column per angle
// (the far-field steering vector, i.e. the exact r -> inf limit). beta
// controls how finely curvature is sampled; larger beta means denser
// distance rings. Columns are ordered by angle index, and within an angle
// by increasing 1/r: far column first, then s = 1, 2, ...

namespace xlchan {

enum class DictionaryKind : std::uint8_t { angle = 0, polar = 1, channel = 2 };

struct GridPoint {
  double angle;     // normalized angle in [-1, 1]
  double distance;  // meters; +inf marks a far-field column

  bool is_far() const { return std::isinf(distance); }
};

struct Dictionary {
  CMatrix matrix;               // N x C, unit-norm columns
  std::vector<GridPoint> grid;  // one record per column
  DictionaryKind kind = DictionaryKind::angle;

  Index rows() const { return matrix.rows(); }
  Index cols() const { return matrix.cols(); }
};

// Normalized DFT angle grid point n (0-based) of an N-point grid.
inline double dft_angle(int n, int num_antennas) {
  return (2.0 * (n + 1) - num_antennas - 1) / num_antennas;
}

// Unitary angle-domain dictionary: column n is far_steering(dft_angle(n)).
inline Dictionary dft_dictionary(const ArrayConfig& cfg) {
  const int n_ant = cfg.num_antennas;
  Dictionary dict;
  dict.kind = DictionaryKind::angle;
  dict.matrix.resize(n_ant, n_ant);
  dict.grid.resize(n_ant);
  for (int n = 0; n < n_ant; ++n) {
    const double theta = dft_angle(n, n_ant);
    dict.matrix.col(n) = far_steering(cfg, theta);
    dict.grid[n] = {theta, std::numeric_limits<double>::infinity()};
  }
  return dict;
}

struct PolarGridParams {
  double beta = 1.2;              // distance oversampling factor
  double rho_min = 10.0;          // smallest sampled distance [m]
  bool include_far_column = true; // one r = inf column per angle
};

inline Dictionary polar_dictionary(const ArrayConfig& cfg,
                                   const PolarGridParams& params) {
  if (!(params.beta > 0.0))
    throw ConfigError("polar_dictionary: beta must be > 0");
  if (!(params.rho_min > 0.0))
    throw ConfigError("polar_dictionary: rho_min must be > 0");
  if (params.rho_min < cfg.guard_radius())
    throw ConfigError("polar_dictionary: rho_min " +
                      std::to_string(params.rho_min) +
                      " m is below the guard radius N*d = " +
                      std::to_string(cfg.guard_radius()) + " m");

  const int n_ant = cfg.num_antennas;
  const double d = cfg.antenna_spacing;
  const double cap_scale = n_ant * n_ant * d * d /
                           (2.0 * cfg.wavelength * params.beta * params.beta);

  // First pass: distance counts per angle.
  std::vector<int> finite_counts(n_ant);
  Index total = 0;
  for (int n = 0; n < n_ant; ++n) {
    const double theta = dft_angle(n, n_ant);
    const double cap = cap_scale * (1.0 - theta * theta);
    // largest s with cap/s >= rho_min
    const int s_max = cap >= params.rho_min
                          ? static_cast<int>(std::floor(cap / params.rho_min))
                          : 0;
    finite_counts[n] = s_max;
    total += s_max;
  }
  if (total == 0)
    throw ConfigError(
        "polar_dictionary: no finite-distance samples at any angle; "
        "decrease rho_min or increase beta");
  if (params.include_far_column) total += n_ant;

  Dictionary dict;
  dict.kind = DictionaryKind::polar;
  dict.matrix.resize(n_ant, total);
  dict.grid.reserve(static_cast<std::size_t>(total));
  Index col = 0;
  for (int n = 0; n < n_ant; ++n) {
    const double theta = dft_angle(n, n_ant);
    const double cap = cap_scale * (1.0 - theta * theta);
    if (params.include_far_column) {
      dict.matrix.col(col++) = far_steering(cfg, theta);
      dict.grid.push_back({theta, std::numeric_limits<double>::infinity()});
    }
    for (int s = 1; s <= finite_counts[n]; ++s) {
      const double r = cap / s;
      dict.matrix.col(col++) = near_steering(cfg, theta, r);
      dict.grid.push_back({theta, r});
    }
  }
  return dict;
}

// Worst-case and binned |<c_i, c_j>| over all column pairs. Columns are
// unit norm, so values lie in [0, 1] up to rounding.
struct CoherenceReport {
  double max_abs = 0.0;
  std::array<std::int64_t, 20> histogram{};  // bin k covers [k/20, (k+1)/20)
};

inline CoherenceReport column_coherence_report(const Dictionary& dict) {
  const Index cols = dict.cols();
  if (cols < 2)
    throw ConfigError("column_coherence_report: need at least 2 columns");
  CoherenceReport rep;
  const Index block = 256;
  for (Index j0 = 0; j0 < cols; j0 += block) {
    const Index jn = std::min(block, cols - j0);
    const CMatrix gram =
        dict.matrix.adjoint() * dict.matrix.middleCols(j0, jn);
    for (Index j = 0; j < jn; ++j) {
      for (Index i = 0; i < j0 + j; ++i) {
        const double v = std::abs(gram(i, j));
        rep.max_abs = std::max(rep.max_abs, v);
        const int bin = std::min(19, static_cast<int>(v * 20.0));
        ++rep.histogram[static_cast<std::size_t>(bin)];
      }
    }
  }
  return rep;
}

// Binary container, little-endian:
//   "XLDZ" | u32 version | u32 rows | u32 cols | u8 kind
//   rows*cols complex values, row-major, interleaved (re, im) float64
//   cols grid records, (angle, distance) float64, +inf marking far columns
// Doubles are written bit-exactly, so save followed by load reproduces the
// matrix and grid down to the last ulp (including infinities).

namespace detail {

inline constexpr char dict_magic[4] = {'X', 'L', 'D', 'Z'};
inline constexpr std::uint32_t dict_format_version = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const char* what) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in)
    throw ConfigError(std::string("dictionary file truncated while reading ") +
                      what);
  return value;
}

} // namespace detail

inline void save_dictionary(const Dictionary& dict, const std::string& path) {
  if (dict.grid.size() != static_cast<std::size_t>(dict.cols()))
    throw DomainError("save_dictionary: grid size does not match column count");
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ConfigError("save_dictionary: cannot open " + path + " for writing");
  out.write(detail::dict_magic, 4);
  detail::write_pod(out, detail::dict_format_version);
  detail::write_pod(out, static_cast<std::uint32_t>(dict.rows()));
  detail::write_pod(out, static_cast<std::uint32_t>(dict.cols()));
  detail::write_pod(out, static_cast<std::uint8_t>(dict.kind));
  std::vector<double> row(static_cast<std::size_t>(dict.cols()) * 2);
  for (Index i = 0; i < dict.rows(); ++i) {
    for (Index j = 0; j < dict.cols(); ++j) {
      row[static_cast<std::size_t>(2 * j)] = dict.matrix(i, j).real();
      row[static_cast<std::size_t>(2 * j) + 1] = dict.matrix(i, j).imag();
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  for (const GridPoint& g : dict.grid) {
    detail::write_pod(out, g.angle);
    detail::write_pod(out, g.distance);
  }
  if (!out) throw ConfigError("save_dictionary: write to " + path + " failed");
}

inline Dictionary load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_dictionary: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, detail::dict_magic, 4) != 0)
    throw ConfigError("load_dictionary: " + path +
                      " is not a dictionary file (bad magic)");
  const auto version = detail::read_pod<std::uint32_t>(in, "version");
  if (version != detail::dict_format_version)
    throw ConfigError("load_dictionary: unsupported format version " +
                      std::to_string(version));
  const auto rows = detail::read_pod<std::uint32_t>(in, "row count");
  const auto cols = detail::read_pod<std::uint32_t>(in, "column count");
  const auto kind = detail::read_pod<std::uint8_t>(in, "kind");
  if (rows == 0 || cols == 0)
    throw ConfigError("load_dictionary: empty matrix in " + path);
  if (kind > static_cast<std::uint8_t>(DictionaryKind::channel))
    throw ConfigError("load_dictionary: unknown kind byte " +
                      std::to_string(kind));
  Dictionary dict;
  dict.kind = static_cast<DictionaryKind>(kind);
  dict.matrix.resize(rows, cols);
  std::vector<double> row(static_cast<std::size_t>(cols) * 2);
  for (std::uint32_t i = 0; i < rows; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in)
      throw ConfigError("dictionary file truncated while reading matrix row " +
                        std::to_string(i));
    for (std::uint32_t j = 0; j < cols; ++j)
      dict.matrix(i, j) = {row[2 * j], row[2 * j + 1]};
  }
  dict.grid.resize(cols);
  for (std::uint32_t j = 0; j < cols; ++j) {
    dict.grid[j].angle = detail::read_pod<double>(in, "grid angle");
    dict.grid[j].distance = detail::read_pod<double>(in, "grid distance");
  }
  return dict;
}

} // namespace xlchan
