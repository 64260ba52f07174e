#pragma once

#include <cmath>
#include <string>

#include "xlchan/array.hpp"
#include "xlchan/channel.hpp"
#include "xlchan/errors.hpp"
#include "xlchan/rng.hpp"

// Pilot measurement model: y = P h + n, with P a real M x N pilot matrix
// and n ~ CN(0, sigma2 * I).
//
// Noise convention: sigma2 is the TOTAL variance of one complex sample
// (sigma2/2 per real and imaginary part), and SNR = 1/sigma2, i.e.
// sigma2 = 10^(-snr_db/10). Channel power is normalized to E||h||^2 = N,
// steering phases have unit magnitude, so this matches the usual
// "transmit power 1" reading of the SNR axis.

namespace xlchan {

enum class PilotKind { random_sign, identity };

struct PilotMatrix {
  RMatrix values;  // M x N, real
  PilotKind kind = PilotKind::random_sign;

  Index measurements() const { return values.rows(); }
  Index antennas() const { return values.cols(); }
};

// Random pilots: i.i.d. entries +-1/sqrt(M), one sign draw per entry in
// column-major order. M > N is refused unless explicitly allowed, since an
// oversampled pilot block usually indicates a swapped argument.
inline PilotMatrix random_pilots(int measurements, int antennas,
                                 RandomStream& rng,
                                 bool allow_oversampled = false) {
  if (measurements < 1 || antennas < 1)
    throw DomainError("random_pilots: dimensions must be >= 1");
  if (measurements > antennas && !allow_oversampled)
    throw ConfigError("random_pilots: M > N requires allow_oversampled");
  PilotMatrix pilots;
  pilots.kind = PilotKind::random_sign;
  pilots.values.resize(measurements, antennas);
  const double scale = 1.0 / std::sqrt(static_cast<double>(measurements));
  for (Index j = 0; j < antennas; ++j)
    for (Index i = 0; i < measurements; ++i)
      pilots.values(i, j) = rng.sign() * scale;
  return pilots;
}

inline PilotMatrix identity_pilots(int antennas) {
  if (antennas < 1) throw DomainError("identity_pilots: dimension must be >= 1");
  PilotMatrix pilots;
  pilots.kind = PilotKind::identity;
  pilots.values = RMatrix::Identity(antennas, antennas);
  return pilots;
}

inline double snr_db_to_sigma2(double snr_db) {
  return std::pow(10.0, -snr_db / 10.0);
}

struct MeasurementRecord {
  CVector observation;        // y = P h + noise
  PilotMatrix pilots;         // P
  double noise_power = 0.0;   // sigma2
  CVector noise;              // the exact draw, retained for audit
  ChannelRealization truth;   // channel the observation was generated from
};

// Apply pilots and add noise. sigma2 = 0 produces a noiseless record
// (nothing is drawn from the stream in that case). P is real, so P h is
// evaluated as two real mat-vecs.
inline MeasurementRecord observe(const PilotMatrix& pilots,
                                 const ChannelRealization& truth,
                                 double sigma2, RandomStream& rng) {
  if (pilots.antennas() != truth.h.size())
    throw DomainError("observe: pilot columns (" +
                      std::to_string(pilots.antennas()) +
                      ") do not match channel length (" +
                      std::to_string(truth.h.size()) + ")");
  if (!(sigma2 >= 0.0)) throw DomainError("observe: sigma2 must be >= 0");
  const Index m = pilots.measurements();
  MeasurementRecord rec;
  rec.pilots = pilots;
  rec.noise_power = sigma2;
  rec.truth = truth;
  CVector clean(m);
  clean.real() = pilots.values * truth.h.real();
  clean.imag() = pilots.values * truth.h.imag();
  rec.noise = CVector::Zero(m);
  if (sigma2 > 0.0) {
    const double sd = std::sqrt(sigma2);
    for (Index i = 0; i < m; ++i) rec.noise[i] = sd * rng.cgaussian();
  }
  rec.observation = clean + rec.noise;
  return rec;
}

} // namespace xlchan
