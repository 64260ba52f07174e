#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "xlchan/array.hpp"
#include "xlchan/dictionary.hpp"
#include "xlchan/errors.hpp"
#include "xlchan/measurement.hpp"
#include "xlchan/rng.hpp"

// Channel estimators.
//
// ff_omp / nf_omp: orthogonal matching pursuit against the angle / polar
// dictionary. Each iteration picks the unselected sensing column with the
// largest |correlation|^2 (ties to the lowest index), refits every selected
// coefficient by least squares, and recomputes the residual from the
// observation, so per-iteration residual norms are non-increasing and the
// final residual is orthogonal to the selected columns.
//
// hf_omp: two sequential OMP stages with a shared sparsity budget kappa*L.
// Stage 1 recovers K_f = round(gamma*kappa*L) angle-domain atoms from y;
// stage 2 recovers the remaining K_n = kappa*L - K_f polar-domain atoms
// from the stage-1 residual. The final estimate is the sum of both stage
// synthesis terms. With gamma = 1 (or 0) only one stage runs and the
// result is bit-identical to ff_omp (or nf_omp) under the same budget.
//
// ls / mmse: classical baselines. ls is the minimum-norm least-squares
// solution; mmse is R P^H (P R P^H + sigma2 I)^-1 y with R supplied by the
// caller (in the experiment driver: a sample covariance from a reserved
// training stream).

namespace xlchan {

using SupportSet = std::vector<Index>;

// A = P * D evaluated as two real GEMMs (P is real). Identity pilots short-
// circuit to a copy.
inline CMatrix sensing_matrix(const PilotMatrix& pilots, const CMatrix& dict) {
  if (pilots.antennas() != dict.rows())
    throw DomainError("sensing_matrix: pilot columns do not match dictionary rows");
  if (pilots.kind == PilotKind::identity) return dict;
  CMatrix a(pilots.measurements(), dict.cols());
  a.real().noalias() = pilots.values * dict.real();
  a.imag().noalias() = pilots.values * dict.imag();
  return a;
}

// Thin QR maintained one column at a time (modified Gram-Schmidt with a
// single reorthogonalization pass). Lets OMP refit K coefficients across K
// iterations in O(M K^2) total instead of refactorizing each round.
class IncrementalQr {
public:
  IncrementalQr(Index rows, Index max_cols)
      : q_(rows, max_cols), r_(CMatrix::Zero(max_cols, max_cols)) {}

  Index rank() const { return k_; }

  // False when the column is numerically dependent on the span so far; the
  // factorization is left unchanged in that case.
  bool add_column(const CVector& col) {
    if (k_ >= r_.rows()) throw DomainError("IncrementalQr: capacity exceeded");
    CVector v = col;
    CVector head = CVector::Zero(k_);
    if (k_ > 0) {
      const auto q = q_.leftCols(k_);
      CVector h1 = q.adjoint() * v;
      v.noalias() -= q * h1;
      CVector h2 = q.adjoint() * v;
      v.noalias() -= q * h2;
      head = h1 + h2;
    }
    const double norm = v.norm();
    if (!(norm > 1e-12 * col.norm())) return false;
    r_.col(k_).head(k_) = head;
    r_(k_, k_) = norm;
    q_.col(k_) = v / norm;
    ++k_;
    return true;
  }

  // y - Q Q^H y: the residual of projecting y onto the selected span.
  CVector residual(const CVector& y) const {
    if (k_ == 0) return y;
    const auto q = q_.leftCols(k_);
    return y - q * (q.adjoint() * y).eval();
  }

  // Least-squares coefficients of y against the added columns, in the order
  // they were added.
  CVector solve(const CVector& y) const {
    const CVector qy = q_.leftCols(k_).adjoint() * y;
    return r_.topLeftCorner(k_, k_).triangularView<Eigen::Upper>().solve(qy);
  }

private:
  CMatrix q_;
  CMatrix r_;
  Index k_ = 0;
};

struct SparseEstimate {
  CVector coefficients;  // dictionary-length, exactly zero off the support
  SupportSet support;    // column indices in selection order
};

struct OmpResult {
  SparseEstimate estimate;
  CVector residual;                   // observation minus fitted part
  std::vector<double> residual_norms; // ||y||, then ||r|| after each iteration
  bool rank_deficient = false;
};

inline OmpResult omp(const CVector& y, const CMatrix& sensing, int sparsity) {
  const Index cols = sensing.cols();
  if (sensing.rows() != y.size())
    throw DomainError("omp: sensing rows do not match observation length");
  if (sparsity < 1) throw DomainError("omp: sparsity must be >= 1");
  if (sparsity > cols)
    throw DomainError("omp: sparsity exceeds dictionary size");

  OmpResult out;
  out.residual_norms.reserve(static_cast<std::size_t>(sparsity) + 1);
  out.residual_norms.push_back(y.norm());
  out.estimate.support.reserve(static_cast<std::size_t>(sparsity));

  IncrementalQr qr(y.size(), sparsity);
  std::vector<char> selected(static_cast<std::size_t>(cols), 0);
  CVector r = y;
  CVector corr(cols);
  for (int k = 0; k < sparsity; ++k) {
    corr.noalias() = sensing.adjoint() * r;
    Index best = -1;
    double best_val = -1.0;
    for (Index i = 0; i < cols; ++i) {
      if (selected[static_cast<std::size_t>(i)]) continue;
      const double val = std::norm(corr[i]);
      if (val > best_val) {
        best_val = val;
        best = i;
      }
    }
    out.estimate.support.push_back(best);
    selected[static_cast<std::size_t>(best)] = 1;
    if (!qr.add_column(sensing.col(best))) out.rank_deficient = true;
    r = qr.residual(y);
    out.residual_norms.push_back(r.norm());
  }

  const Index k_support = static_cast<Index>(out.estimate.support.size());
  out.estimate.coefficients = CVector::Zero(cols);
  if (!out.rank_deficient) {
    const CVector x = qr.solve(y);
    for (Index k = 0; k < k_support; ++k)
      out.estimate.coefficients[out.estimate.support[static_cast<std::size_t>(k)]] =
          x[k];
    out.residual = std::move(r);
  } else {
    // Dependent columns stay in the support but the plain triangular solve
    // no longer applies; fall back to the minimum-norm solution on the
    // support submatrix.
    CMatrix sub(y.size(), k_support);
    for (Index k = 0; k < k_support; ++k)
      sub.col(k) = sensing.col(out.estimate.support[static_cast<std::size_t>(k)]);
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(sub);
    const CVector x = cod.solve(y);
    for (Index k = 0; k < k_support; ++k)
      out.estimate.coefficients[out.estimate.support[static_cast<std::size_t>(k)]] =
          x[k];
    out.residual = y - sub * x;
  }
  return out;
}

struct StageTrace {
  DictionaryKind domain = DictionaryKind::angle;
  SupportSet support;
  std::vector<double> residual_norms;
  bool rank_deficient = false;
};

struct EstimateResult {
  CVector h_hat;
  std::vector<StageTrace> stages;  // one per executed OMP stage

  bool rank_deficient() const {
    for (const StageTrace& s : stages)
      if (s.rank_deficient) return true;
    return false;
  }
};

// sum over the support of coefficient * dictionary column.
inline CVector synthesize_from_atoms(const Dictionary& dict,
                                     const SparseEstimate& est) {
  CVector h = CVector::Zero(dict.rows());
  for (Index idx : est.support)
    h.noalias() += est.coefficients[idx] * dict.matrix.col(idx);
  return h;
}

namespace detail {

inline StageTrace make_trace(const OmpResult& res, DictionaryKind domain) {
  StageTrace trace;
  trace.domain = domain;
  trace.support = res.estimate.support;
  trace.residual_norms = res.residual_norms;
  trace.rank_deficient = res.rank_deficient;
  return trace;
}

} // namespace detail

inline EstimateResult ff_omp_estimate(const MeasurementRecord& rec,
                                      const Dictionary& angle_dict,
                                      int sparsity) {
  const CMatrix a = sensing_matrix(rec.pilots, angle_dict.matrix);
  const OmpResult res = omp(rec.observation, a, sparsity);
  EstimateResult out;
  out.h_hat = synthesize_from_atoms(angle_dict, res.estimate);
  out.stages.push_back(detail::make_trace(res, DictionaryKind::angle));
  return out;
}

inline EstimateResult nf_omp_estimate(const MeasurementRecord& rec,
                                      const Dictionary& polar_dict,
                                      int sparsity) {
  const CMatrix a = sensing_matrix(rec.pilots, polar_dict.matrix);
  const OmpResult res = omp(rec.observation, a, sparsity);
  EstimateResult out;
  out.h_hat = synthesize_from_atoms(polar_dict, res.estimate);
  out.stages.push_back(detail::make_trace(res, DictionaryKind::polar));
  return out;
}

// Angle-domain share of the kappa*L sparsity budget; halves round up, the
// same tie rule as the far path count.
inline int hf_far_budget(int num_paths, double gamma, int kappa) {
  if (num_paths < 1) throw DomainError("hf_far_budget: need at least 1 path");
  if (kappa < 1) throw DomainError("hf_far_budget: kappa must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw DomainError("hf_far_budget: gamma must lie in [0, 1]");
  return static_cast<int>(std::round(gamma * kappa * num_paths));
}

inline EstimateResult hf_omp_estimate(const MeasurementRecord& rec,
                                      const Dictionary& angle_dict,
                                      const Dictionary& polar_dict,
                                      int num_paths, double gamma, int kappa) {
  const int k_far = hf_far_budget(num_paths, gamma, kappa);
  const int k_near = kappa * num_paths - k_far;
  EstimateResult out;
  out.h_hat = CVector::Zero(angle_dict.rows());
  CVector stage2_obs = rec.observation;
  if (k_far > 0) {
    const CMatrix a_far = sensing_matrix(rec.pilots, angle_dict.matrix);
    const OmpResult res = omp(rec.observation, a_far, k_far);
    out.h_hat += synthesize_from_atoms(angle_dict, res.estimate);
    out.stages.push_back(detail::make_trace(res, DictionaryKind::angle));
    stage2_obs = res.residual;
  }
  if (k_near > 0) {
    const CMatrix a_near = sensing_matrix(rec.pilots, polar_dict.matrix);
    const OmpResult res = omp(stage2_obs, a_near, k_near);
    out.h_hat += synthesize_from_atoms(polar_dict, res.estimate);
    out.stages.push_back(detail::make_trace(res, DictionaryKind::polar));
  }
  return out;
}

// Minimum-norm least squares: h = P^+ y. P is real, so the pseudoinverse
// is applied to the real and imaginary parts separately.
inline CVector ls_estimate(const CVector& y, const PilotMatrix& pilots) {
  if (pilots.measurements() != y.size())
    throw DomainError("ls_estimate: pilot rows do not match observation length");
  Eigen::CompleteOrthogonalDecomposition<RMatrix> cod(pilots.values);
  CVector h(pilots.antennas());
  h.real() = cod.solve(y.real());
  h.imag() = cod.solve(y.imag());
  return h;
}

struct SampleCovariance {
  CMatrix matrix;  // N x N Hermitian PSD
  int draws = 0;
};

// R = (1/K) sum h h^H over channels drawn from a dedicated stream. The
// caller is responsible for keeping that stream disjoint from evaluation
// trials (the experiment driver tags it separately).
inline SampleCovariance sample_covariance(const ArrayConfig& cfg, int num_paths,
                                          double gamma,
                                          const PathSamplingConfig& sampling,
                                          int draws, RandomStream& rng) {
  if (draws < 1) throw DomainError("sample_covariance: draws must be >= 1");
  SampleCovariance cov;
  cov.draws = draws;
  cov.matrix = CMatrix::Zero(cfg.num_antennas, cfg.num_antennas);
  const double w = 1.0 / draws;
  for (int t = 0; t < draws; ++t) {
    const ChannelRealization real =
        sample_channel(cfg, num_paths, gamma, sampling, rng);
    cov.matrix.selfadjointView<Eigen::Lower>().rankUpdate(real.h, w);
  }
  const CMatrix full = cov.matrix.selfadjointView<Eigen::Lower>();
  cov.matrix = full;
  return cov;
}

// Linear MMSE with a fixed prior covariance: h = R P^H (P R P^H + s2 I)^-1 y.
// The Cholesky factor is formed once so repeated trials only pay two
// triangular solves.
class MmseSolver {
public:
  MmseSolver(const CMatrix& covariance, const PilotMatrix& pilots,
             double sigma2) {
    if (covariance.rows() != covariance.cols())
      throw DomainError("MmseSolver: covariance must be square");
    if (pilots.antennas() != covariance.rows())
      throw DomainError("MmseSolver: pilot columns do not match covariance size");
    if (!(sigma2 >= 0.0)) throw DomainError("MmseSolver: sigma2 must be >= 0");
    CMatrix gram;
    if (pilots.kind == PilotKind::identity) {
      r_ph_ = covariance;
      gram = covariance;
    } else {
      CMatrix pc(pilots.measurements(), pilots.antennas());
      pc.real() = pilots.values;
      pc.imag().setZero();
      r_ph_ = covariance * pc.adjoint();
      gram = pc * r_ph_;
    }
    gram.diagonal().array() += sigma2;
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success)
      throw NumericalError("MmseSolver: P R P^H + sigma2 I is not positive "
                           "definite; increase sigma2 or check the covariance");
  }

  CVector apply(const CVector& y) const {
    if (y.size() != llt_.matrixL().rows())
      throw DomainError("MmseSolver: observation length mismatch");
    return r_ph_ * llt_.solve(y);
  }

private:
  CMatrix r_ph_;  // R P^H
  Eigen::LLT<CMatrix> llt_;
};

inline CVector mmse_estimate(const CVector& y, const PilotMatrix& pilots,
                             const CMatrix& covariance, double sigma2) {
  return MmseSolver(covariance, pilots, sigma2).apply(y);
}

} // namespace xlchan
