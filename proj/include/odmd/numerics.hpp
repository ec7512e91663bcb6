///
/// \file numerics.hpp
///
/// Dense matrix kernels shared by the solvers: SVD-based pseudoinverse,
/// orthogonal projectors onto the range of a complex matrix, and norms.
///
#ifndef ODMD_NUMERICS_HPP
#define ODMD_NUMERICS_HPP

#include <algorithm>
#include <complex>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "odmd/errors.hpp"

namespace odmd {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Default relative cutoff for the numerical rank: machine epsilon scaled by
/// the larger dimension.
inline double default_rank_tolerance(Index rows, Index cols) {
  return std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max(rows, cols));
}

///
/// Thin singular value decomposition truncated at the numerical rank.
///
/// Only the singular triplets with \f$\sigma_i > \mathrm{rtol}\,\sigma_{\max}\f$
/// are kept, so `U` is an orthonormal basis of the numerical range and
/// `V diag(1/sigma) U^H` is the Moore-Penrose pseudoinverse.
///
struct RangeFactor {
  ComplexMatrix U;
  RealVector sigma;
  ComplexMatrix V;
  Index cols = 0;

  Index rank() const { return sigma.size(); }
  bool full_column_rank() const { return rank() == cols; }

  ComplexMatrix pinv() const {
    return V * sigma.cwiseInverse().asDiagonal() * U.adjoint();
  }
};

inline RangeFactor factor_range(const ComplexMatrix& a,
                                std::optional<double> rtol = std::nullopt) {
  if (!a.allFinite()) throw InvalidInput("factor_range: non-finite entry");
  const double tol = rtol.value_or(default_rank_tolerance(a.rows(), a.cols()));
  if (tol < 0.0) throw InvalidInput("factor_range: negative rank tolerance");

  Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  Index rank = 0;
  if (s.size() > 0 && s(0) > 0.0) {
    const double cutoff = tol * s(0);
    while (rank < s.size() && s(rank) > cutoff) ++rank;
  }

  RangeFactor f;
  f.U = svd.matrixU().leftCols(rank);
  f.V = svd.matrixV().leftCols(rank);
  f.sigma = s.head(rank);
  f.cols = a.cols();
  return f;
}

inline ComplexMatrix pinv(const ComplexMatrix& a,
                          std::optional<double> rtol = std::nullopt) {
  return factor_range(a, rtol).pinv();
}

/// (I - Phi Phi^+) K for a real right-hand side.
inline ComplexMatrix projector_residual(const ComplexMatrix& phi, const RealMatrix& k) {
  if (phi.rows() != k.rows())
    throw ShapeError("projector_residual: Phi and K row counts differ");
  if (!k.allFinite()) throw InvalidInput("projector_residual: non-finite K");
  const RangeFactor f = factor_range(phi);
  const ComplexMatrix kc = k.cast<Complex>();
  return kc - f.U * (f.U.adjoint() * kc);
}

template <typename Derived>
double frob_norm(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

template <typename Derived>
double l2_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.norm();
}

/// num / den with 0/0 = 0 and x/0 = inf, for relative-change stop tests.
inline double relative_change(double num, double den) {
  if (den > 0.0) return num / den;
  return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace odmd

#endif  // ODMD_NUMERICS_HPP
