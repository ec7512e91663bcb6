///
/// \file ak_solver.hpp
///
/// Baseline optimized DMD: minimise 1/2 ||H - Phi(alpha) Phi(alpha)^+ H||_F^2
/// over alpha with Levenberg-Marquardt.
///
/// The residual is not holomorphic in alpha, so the solver works in the 2R
/// real coordinates (Re alpha, Im alpha). Derivatives of the projection
/// P = Phi Phi^+ come from the Golub-Pereyra formula, split into its Wirtinger
/// halves
///
///   dP/d alpha_r      K = (I - P) Phi_r' Phi^+ K
///   dP/d conj(alpha_r) K = (Phi^+)^H Phi_r'^H (I - P) K
///
/// where Phi_r' has t_n exp(alpha_r t_n) in column r and zeros elsewhere. Each
/// half is a rank-one N x M matrix, which keeps Gram products cheap.
///
#ifndef ODMD_AK_SOLVER_HPP
#define ODMD_AK_SOLVER_HPP

#include <cmath>
#include <string>
#include <vector>

#include "odmd/model.hpp"

namespace odmd {

/// H - Phi Phi^+ H.
inline ComplexMatrix varpro_residual(const SnapshotSet& data, const EigenvalueVector& alpha) {
  require_distinct(alpha);
  const ExponentialBasis basis(alpha, data.times);
  basis.require_full_rank();
  return basis.residual(data.H);
}

class VarproJacobian {
 public:
  VarproJacobian(const ExponentialBasis& basis, const RealMatrix& k) {
    basis.require_full_rank();
    const Index rank = basis.rank();
    const ComplexMatrix& u = basis.range().U;
    const ComplexMatrix pinv = basis.pinv();
    const ComplexMatrix b = pinv * k.cast<Complex>();
    const ComplexMatrix resid = basis.residual(k);

    holo_.reserve(rank);
    conj_.reserve(rank);
    for (Index r = 0; r < rank; ++r) {
      const ComplexVector d = basis.phi().col(r).cwiseProduct(basis.times().cast<Complex>());
      holo_.push_back({d - u * (u.adjoint() * d), b.row(r).transpose()});
      conj_.push_back({pinv.row(r).adjoint(), resid.transpose() * d.conjugate()});
    }
    rows_ = k.rows();
    cols_ = k.cols();
  }

  Index rank() const { return static_cast<Index>(holo_.size()); }

  /// d(P K)/d alpha_r with conj(alpha_r) held fixed.
  ComplexMatrix holomorphic_block(Index r) const { return holo_[r].dense(); }

  /// d(P K)/d conj(alpha_r) with alpha_r held fixed.
  ComplexMatrix conjugate_block(Index r) const { return conj_[r].dense(); }

  /// NM x R, column r = vec(d(P K)/d Re alpha_r): the full Golub-Pereyra column.
  ComplexMatrix dense() const { return stacked(Complex(1.0, 0.0), Complex(1.0, 0.0)); }

  /// NM x R, column r = vec(d(P K)/d Im alpha_r).
  ComplexMatrix dense_imag() const { return stacked(Complex(0.0, 1.0), Complex(0.0, -1.0)); }

  /// Gram matrix J^T J of the real Jacobian of the residual (I - P) K with
  /// respect to [Re alpha; Im alpha].
  RealMatrix real_gram() const {
    const ComplexMatrix w = coordinate_weights();
    const Index atoms = 2 * rank();
    ComplexMatrix q(atoms, atoms);
    for (Index a = 0; a < atoms; ++a)
      for (Index c = a; c < atoms; ++c) {
        const Outer& x = atom(a);
        const Outer& y = atom(c);
        q(a, c) = x.left.dot(y.left) * x.right.dot(y.right);
        q(c, a) = std::conj(q(a, c));
      }
    return (w.adjoint() * q * w).real();
  }

  /// Gradient of 1/2 ||residual||^2 in [Re alpha; Im alpha], where
  /// `residual` = (I - P) K at the same point.
  RealVector real_gradient(const ComplexMatrix& residual) const {
    const Index atoms = 2 * rank();
    ComplexVector t(atoms);
    for (Index a = 0; a < atoms; ++a) {
      const Outer& x = atom(a);
      t(a) = x.left.dot(residual * x.right.conjugate());
    }
    return -(coordinate_weights().adjoint() * t).real();
  }

  /// Complex gradient d/dRe + i d/dIm of 1/2 ||residual||^2; equals J^H r for
  /// the Wirtinger Jacobian J of the residual.
  ComplexVector complex_gradient(const ComplexMatrix& residual) const {
    const RealVector g = real_gradient(residual);
    const Index rank_ = rank();
    ComplexVector out(rank_);
    for (Index r = 0; r < rank_; ++r) out(r) = Complex(g(r), g(rank_ + r));
    return out;
  }

 private:
  struct Outer {
    ComplexVector left;
    ComplexVector right;
    ComplexMatrix dense() const { return left * right.transpose(); }
  };

  const Outer& atom(Index a) const { return a < rank() ? holo_[a] : conj_[a - rank()]; }

  // Real coordinate k as a combination of the 2R Wirtinger atoms:
  // d/dRe = d/dalpha + d/dconj(alpha), d/dIm = i (d/dalpha - d/dconj(alpha)).
  ComplexMatrix coordinate_weights() const {
    const Index rank_ = rank();
    ComplexMatrix w = ComplexMatrix::Zero(2 * rank_, 2 * rank_);
    for (Index r = 0; r < rank_; ++r) {
      w(r, r) = 1.0;
      w(rank_ + r, r) = 1.0;
      w(r, rank_ + r) = Complex(0.0, 1.0);
      w(rank_ + r, rank_ + r) = Complex(0.0, -1.0);
    }
    return w;
  }

  ComplexMatrix stacked(Complex holo_weight, Complex conj_weight) const {
    ComplexMatrix out(rows_ * cols_, rank());
    for (Index r = 0; r < rank(); ++r) {
      const ComplexMatrix block = holo_weight * holo_[r].dense() + conj_weight * conj_[r].dense();
      out.col(r) = block.reshaped();
    }
    return out;
  }

  std::vector<Outer> holo_;
  std::vector<Outer> conj_;
  Index rows_ = 0;
  Index cols_ = 0;
};

// ---------------------------------------------------------------------------
// Levenberg-Marquardt

struct LmConfig {
  double lambda0 = 1.0;
  double lambda_up = 2.0;
  double lambda_down = 1.0 / 3.0;
  double tol = 1e-5;
  int max_iters = 200;

  void validate() const {
    if (!(lambda0 > 0.0)) throw InvalidInput("LmConfig: lambda0 must be positive");
    if (!(lambda_up > 1.0)) throw InvalidInput("LmConfig: lambda_up must exceed 1");
    if (!(lambda_down > 0.0 && lambda_down < 1.0))
      throw InvalidInput("LmConfig: lambda_down must lie in (0, 1)");
    if (!(tol > 0.0)) throw InvalidInput("LmConfig: tol must be positive");
    if (max_iters < 1) throw InvalidInput("LmConfig: max_iters must be positive");
  }
};

enum class LmStatus { converged, max_iters, degenerate };

inline std::string to_string(LmStatus s) {
  switch (s) {
    case LmStatus::converged: return "converged";
    case LmStatus::max_iters: return "max_iters";
    case LmStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

struct LmResult {
  EigenvalueVector alpha;
  std::vector<double> residual_norms;  // ||H - P H||_F at each accepted iterate
  int iterations = 0;
  LmStatus status = LmStatus::max_iters;
};

namespace detail {

inline constexpr int kMaxDampingIncreases = 60;

inline RealVector damped_step(const RealMatrix& gram, const RealVector& grad, double lambda) {
  const double floor = std::max(gram.diagonal().maxCoeff(), 1.0) * 1e-14;
  RealMatrix lhs = gram;
  for (Index i = 0; i < lhs.rows(); ++i) lhs(i, i) += lambda * std::max(gram(i, i), floor);
  return lhs.ldlt().solve(-grad);
}

inline EigenvalueVector shift(const EigenvalueVector& alpha, const RealVector& step) {
  const Index r = alpha.size();
  EigenvalueVector out(r);
  for (Index i = 0; i < r; ++i) out(i) = alpha(i) + Complex(step(i), step(r + i));
  return out;
}

}  // namespace detail

///
/// Levenberg-Marquardt on the variable-projection residual. A trial step is
/// accepted when it does not increase the residual norm; otherwise the
/// damping grows. Stops when ||alpha_k - alpha_{k-1}|| / ||alpha_k|| < tol,
/// when no damping yields descent (stationary to rounding), or at max_iters.
///
inline LmResult lm_solve(const SnapshotSet& data, const EigenvalueVector& alpha0,
                         const LmConfig& cfg = {}) {
  data.validate();
  cfg.validate();
  require_distinct(alpha0);
  if (data.samples() < alpha0.size())
    throw InvalidInput("lm_solve: fewer snapshots than eigenvalues");

  LmResult out;
  out.alpha = alpha0;
  ExponentialBasis basis(alpha0, data.times);
  basis.require_full_rank();
  ComplexMatrix resid = basis.residual(data.H);
  double norm = resid.norm();
  out.residual_norms.push_back(norm);

  double lambda = cfg.lambda0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const VarproJacobian jac(basis, data.H);
    const RealMatrix gram = jac.real_gram();
    const RealVector grad = jac.real_gradient(resid);

    bool accepted = false;
    bool any_valid = false;
    for (int attempt = 0; attempt < detail::kMaxDampingIncreases; ++attempt) {
      const RealVector step = detail::damped_step(gram, grad, lambda);
      const EigenvalueVector cand = detail::shift(out.alpha, step);
      if (cand.allFinite() && has_distinct_entries(cand)) {
        ExponentialBasis cand_basis(cand, data.times);
        if (cand_basis.full_rank()) {
          any_valid = true;
          ComplexMatrix cand_resid = cand_basis.residual(data.H);
          const double cand_norm = cand_resid.norm();
          if (cand_norm <= norm) {
            const double change = (cand - out.alpha).norm();
            out.alpha = cand;
            basis = std::move(cand_basis);
            resid = std::move(cand_resid);
            norm = cand_norm;
            lambda = std::max(lambda * cfg.lambda_down, 1e-14);
            out.residual_norms.push_back(norm);
            out.iterations = it;
            accepted = true;
            if (relative_change(change, out.alpha.norm()) < cfg.tol) {
              out.status = LmStatus::converged;
              return out;
            }
            break;
          }
        }
      }
      lambda *= cfg.lambda_up;
    }
    if (!accepted) {
      out.iterations = it;
      out.status = any_valid ? LmStatus::converged : LmStatus::degenerate;
      return out;
    }
  }
  out.status = LmStatus::max_iters;
  return out;
}

}  // namespace odmd

#endif  // ODMD_AK_SOLVER_HPP
