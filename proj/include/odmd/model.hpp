///
/// \file model.hpp
///
/// The exponential DMD model shared by both solvers.
///
/// Snapshots are stored time-major: row n of `H` is the snapshot taken at
/// `times(n)`. For eigenvalues \f$\alpha \in \mathbb{C}^R\f$ the basis is
/// \f$\Phi(\alpha)_{nr} = e^{\alpha_r t_n}\f$ and the amplitudes are recovered
/// by variable projection, \f$B = \Phi^+ H\f$.
///
/// The multiplicative-noise energy of a denoised state \f$\tilde H\f$ is
///
/// \f[
///   E(\tilde H, \alpha) = \sum_{H_{nm} \ne 0}
///     \left( \log|\tilde H_{nm}| + \frac{H_{nm}}{\tilde H_{nm}} \right)
///   + \frac{\eta}{2} \| \tilde H - \Phi\Phi^+ \tilde H \|_F^2 ,
/// \f]
///
/// restricted to the sign cone of \f$H\f$. Points where the fidelity is
/// singular, or that leave the cone, evaluate to `+inf`.
///
#ifndef ODMD_MODEL_HPP
#define ODMD_MODEL_HPP

#include <cmath>
#include <limits>
#include <optional>

#include "odmd/numerics.hpp"

namespace odmd {

using EigenvalueVector = ComplexVector;

/// Two eigenvalues closer than this are treated as coincident.
inline constexpr double kDistinctTolerance = 1e-10;

struct SnapshotSet {
  RealVector times;
  RealMatrix H;

  Index samples() const { return H.rows(); }
  Index width() const { return H.cols(); }

  void validate() const {
    if (times.size() != H.rows())
      throw ShapeError("SnapshotSet: times length does not match row count");
    if (H.rows() < 2) throw InvalidInput("SnapshotSet: need at least two snapshots");
    if (H.cols() < 1) throw InvalidInput("SnapshotSet: empty snapshot");
    if (!H.allFinite() || !times.allFinite())
      throw InvalidInput("SnapshotSet: non-finite entry");
    for (Index n = 1; n < times.size(); ++n)
      if (!(times(n) > times(n - 1)))
        throw InvalidInput("SnapshotSet: times must be strictly increasing");
  }
};

inline ComplexMatrix build_phi(const EigenvalueVector& alpha, const RealVector& times) {
  ComplexMatrix phi(times.size(), alpha.size());
  for (Index r = 0; r < alpha.size(); ++r)
    for (Index n = 0; n < times.size(); ++n) phi(n, r) = std::exp(alpha(r) * times(n));
  return phi;
}

inline double min_separation(const EigenvalueVector& alpha) {
  double best = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < alpha.size(); ++i)
    for (Index j = i + 1; j < alpha.size(); ++j)
      best = std::min(best, std::abs(alpha(i) - alpha(j)));
  return best;
}

inline bool has_distinct_entries(const EigenvalueVector& alpha,
                                 double tol = kDistinctTolerance) {
  return min_separation(alpha) >= tol;
}

inline void require_distinct(const EigenvalueVector& alpha) {
  if (!alpha.allFinite()) throw InvalidInput("eigenvalues must be finite");
  if (!has_distinct_entries(alpha))
    throw DegenerateSpectrum("eigenvalues are not pairwise distinct");
}

///
/// Phi(alpha) together with its truncated SVD; every projection and
/// pseudoinverse product at a fixed alpha goes through one factorization.
///
class ExponentialBasis {
 public:
  ExponentialBasis(const EigenvalueVector& alpha, const RealVector& times,
                   std::optional<double> rtol = std::nullopt)
      : alpha_(alpha), times_(times), phi_(build_phi(alpha, times)),
        range_(factor_range(phi_, rtol)) {}

  const EigenvalueVector& alpha() const { return alpha_; }
  const RealVector& times() const { return times_; }
  const ComplexMatrix& phi() const { return phi_; }
  const RangeFactor& range() const { return range_; }
  Index rank() const { return alpha_.size(); }

  bool full_rank() const { return range_.full_column_rank(); }

  void require_full_rank() const {
    if (!full_rank())
      throw DegenerateSpectrum("exponential basis is rank deficient");
  }

  ComplexMatrix pinv() const { return range_.pinv(); }

  /// Phi^+ K.
  ComplexMatrix coefficients(const RealMatrix& k) const {
    check_rows(k);
    return range_.V * (range_.sigma.cwiseInverse().asDiagonal() *
                       (range_.U.adjoint() * k.cast<Complex>()));
  }

  /// Phi Phi^+ K.
  ComplexMatrix project(const RealMatrix& k) const {
    check_rows(k);
    return range_.U * (range_.U.adjoint() * k.cast<Complex>());
  }

  /// (I - Phi Phi^+) K.
  ComplexMatrix residual(const RealMatrix& k) const {
    check_rows(k);
    const ComplexMatrix kc = k.cast<Complex>();
    return kc - range_.U * (range_.U.adjoint() * kc);
  }

  /// ||(I - Phi Phi^+) K||_F^2, formed explicitly (the ||K||^2 - ||U^H K||^2
  /// shortcut cancels catastrophically near a fit).
  double residual_norm_sq(const RealMatrix& k) const {
    return residual(k).squaredNorm();
  }

 private:
  void check_rows(const RealMatrix& k) const {
    if (k.rows() != phi_.rows()) throw ShapeError("basis/data row count mismatch");
  }

  EigenvalueVector alpha_;
  RealVector times_;
  ComplexMatrix phi_;
  RangeFactor range_;
};

/// B = Phi(alpha)^+ K, the amplitude matrix minimising ||K - Phi B||_F.
inline ComplexMatrix amplitudes(const RealMatrix& source, const EigenvalueVector& alpha,
                                const RealVector& times) {
  require_distinct(alpha);
  if (source.rows() < alpha.size())
    throw InvalidInput("amplitudes: fewer snapshots than eigenvalues");
  const ExponentialBasis basis(alpha, times);
  basis.require_full_rank();
  return basis.coefficients(source);
}

/// Re(Phi Phi^+ source): H for the baseline model, the denoised state for the
/// multiplicative model.
inline RealMatrix reconstruct(const EigenvalueVector& alpha, const RealVector& times,
                              const RealMatrix& source) {
  require_distinct(alpha);
  const ExponentialBasis basis(alpha, times);
  basis.require_full_rank();
  return basis.project(source).real();
}

// ---------------------------------------------------------------------------
// Sign cone

inline bool is_zero_entry(double h, double zero_threshold) {
  return std::abs(h) <= zero_threshold;
}

/// Euclidean projection onto S_H, entrywise.
inline RealMatrix project_sign_cone(const RealMatrix& k, const RealMatrix& h,
                                    double zero_threshold = 0.0) {
  if (k.rows() != h.rows() || k.cols() != h.cols())
    throw ShapeError("project_sign_cone: shape mismatch");
  RealMatrix out(k.rows(), k.cols());
  for (Index m = 0; m < k.cols(); ++m)
    for (Index n = 0; n < k.rows(); ++n) {
      const double hv = h(n, m);
      if (is_zero_entry(hv, zero_threshold))
        out(n, m) = 0.0;
      else if (hv > 0.0)
        out(n, m) = std::max(k(n, m), 0.0);
      else
        out(n, m) = std::min(k(n, m), 0.0);
    }
  return out;
}

inline bool in_sign_cone(const RealMatrix& k, const RealMatrix& h,
                         double zero_threshold = 0.0) {
  for (Index m = 0; m < k.cols(); ++m)
    for (Index n = 0; n < k.rows(); ++n) {
      const double hv = h(n, m), kv = k(n, m);
      if (is_zero_entry(hv, zero_threshold) ? kv != 0.0 : (hv > 0.0 ? kv < 0.0 : kv > 0.0))
        return false;
    }
  return true;
}

/// Strict-sign interior S_H°: same sign as H wherever H is nonzero.
inline bool in_open_sign_cone(const RealMatrix& k, const RealMatrix& h,
                              double zero_threshold = 0.0) {
  for (Index m = 0; m < k.cols(); ++m)
    for (Index n = 0; n < k.rows(); ++n) {
      const double hv = h(n, m), kv = k(n, m);
      if (is_zero_entry(hv, zero_threshold) ? kv != 0.0 : !(hv * kv > 0.0)) return false;
    }
  return true;
}

// ---------------------------------------------------------------------------
// Energy

inline constexpr double kInfiniteEnergy = std::numeric_limits<double>::infinity();

/// Sum over nonzero H of (log|H| + 1), the minimum of the fidelity term.
inline double fidelity_floor(const RealMatrix& h, double zero_threshold = 0.0) {
  double acc = 0.0;
  for (Index m = 0; m < h.cols(); ++m)
    for (Index n = 0; n < h.rows(); ++n)
      if (!is_zero_entry(h(n, m), zero_threshold)) acc += std::log(std::abs(h(n, m))) + 1.0;
  return acc;
}

/// Sum over nonzero H of (log|Ht/H| + H/Ht - 1) >= 0; +inf off the open cone.
inline double shifted_fidelity(const RealMatrix& h, const RealMatrix& ht,
                               double zero_threshold = 0.0) {
  if (h.rows() != ht.rows() || h.cols() != ht.cols())
    throw ShapeError("fidelity: shape mismatch");
  double acc = 0.0;
  for (Index m = 0; m < h.cols(); ++m)
    for (Index n = 0; n < h.rows(); ++n) {
      const double hv = h(n, m), tv = ht(n, m);
      if (is_zero_entry(hv, zero_threshold)) {
        if (tv != 0.0) return kInfiniteEnergy;
        continue;
      }
      if (!(hv * tv > 0.0)) return kInfiniteEnergy;
      const double ratio = tv / hv;
      acc += std::log(ratio) + 1.0 / ratio - 1.0;
    }
  return acc;
}

/// Shifted energy: E minus its fidelity floor. Nonnegative on S_H.
inline double energy_shifted(const RealMatrix& h, const RealMatrix& ht,
                             const ExponentialBasis& basis, double eta,
                             double zero_threshold = 0.0) {
  const double fid = shifted_fidelity(h, ht, zero_threshold);
  if (!std::isfinite(fid)) return kInfiniteEnergy;
  return fid + 0.5 * eta * basis.residual_norm_sq(ht);
}

inline double energy(const RealMatrix& h, const RealMatrix& ht,
                     const ExponentialBasis& basis, double eta, double zero_threshold = 0.0) {
  const double shifted = energy_shifted(h, ht, basis, eta, zero_threshold);
  if (!std::isfinite(shifted)) return kInfiniteEnergy;
  return shifted + fidelity_floor(h, zero_threshold);
}

inline double energy(const SnapshotSet& data, const RealMatrix& ht,
                     const EigenvalueVector& alpha, double eta, double zero_threshold = 0.0) {
  return energy(data.H, ht, ExponentialBasis(alpha, data.times), eta, zero_threshold);
}

inline double energy_shifted(const SnapshotSet& data, const RealMatrix& ht,
                             const EigenvalueVector& alpha, double eta,
                             double zero_threshold = 0.0) {
  return energy_shifted(data.H, ht, ExponentialBasis(alpha, data.times), eta,
                        zero_threshold);
}

/// Energy of the penalty form with explicit amplitudes B (no variable
/// projection); used to check that Phi^+ Ht is the optimal B.
inline double energy_with_amplitudes(const SnapshotSet& data, const RealMatrix& ht,
                                     const EigenvalueVector& alpha, const ComplexMatrix& b,
                                     double eta, double zero_threshold = 0.0) {
  const double fid = shifted_fidelity(data.H, ht, zero_threshold);
  if (!std::isfinite(fid)) return kInfiniteEnergy;
  const ComplexMatrix diff = ht.cast<Complex>() - build_phi(alpha, data.times) * b;
  return fid + fidelity_floor(data.H, zero_threshold) + 0.5 * eta * diff.squaredNorm();
}

}  // namespace odmd

#endif  // ODMD_MODEL_HPP
