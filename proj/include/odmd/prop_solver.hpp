///
/// \file prop_solver.hpp
///
/// Alternating projected gradient descent for the multiplicative-noise DMD
/// energy, with per-block backtracking, plus the two alpha initialisers and
/// the driver that runs both and keeps the lower-energy result.
///
#ifndef ODMD_PROP_SOLVER_HPP
#define ODMD_PROP_SOLVER_HPP

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "odmd/ak_solver.hpp"
#include "odmd/model.hpp"

namespace odmd {

/// Axis-aligned box for alpha in the complex plane (applied to every entry).
struct AlphaBounds {
  double re_min = -std::numeric_limits<double>::infinity();
  double re_max = std::numeric_limits<double>::infinity();
  double im_min = -std::numeric_limits<double>::infinity();
  double im_max = std::numeric_limits<double>::infinity();

  EigenvalueVector clamp(const EigenvalueVector& alpha) const {
    EigenvalueVector out(alpha.size());
    for (Index r = 0; r < alpha.size(); ++r)
      out(r) = Complex(std::clamp(alpha(r).real(), re_min, re_max),
                       std::clamp(alpha(r).imag(), im_min, im_max));
    return out;
  }
};

struct ModelConfig {
  Index rank = 2;
  double eta = 1e3;
  double tol = 1e-5;
  int max_outer_iters = 10000;
  double tau_h0 = 0.1;
  std::optional<double> tau_alpha0;  // 0.1 / eta when unset
  std::optional<AlphaBounds> alpha_bounds;
  double zero_threshold = 0.0;
  int max_halvings = 60;

  double initial_tau_alpha() const { return tau_alpha0.value_or(0.1 / eta); }

  void validate() const {
    if (rank < 1) throw InvalidInput("ModelConfig: rank must be positive");
    if (!(eta > 0.0)) throw InvalidInput("ModelConfig: eta must be positive");
    if (!(tol > 0.0)) throw InvalidInput("ModelConfig: tol must be positive");
    if (max_outer_iters < 1) throw InvalidInput("ModelConfig: max_outer_iters must be positive");
    if (!(tau_h0 > 0.0) || !(initial_tau_alpha() > 0.0))
      throw InvalidInput("ModelConfig: step sizes must be positive");
    if (zero_threshold < 0.0) throw InvalidInput("ModelConfig: zero_threshold must be >= 0");
    if (max_halvings < 1) throw InvalidInput("ModelConfig: max_halvings must be positive");
  }
};

enum class SolveStatus { converged, max_iters, degenerate, stagnated };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::degenerate: return "degenerate";
    case SolveStatus::stagnated: return "stagnated";
  }
  return "unknown";
}

struct IterateState {
  RealMatrix Ht;
  EigenvalueVector alpha;
  double tau_h = 0.1;
  double tau_alpha = 1e-4;
  int k = 0;
  double energy = kInfiniteEnergy;  // shifted energy at (Ht, alpha)
  std::shared_ptr<const ExponentialBasis> basis;  // Phi(alpha) factorization
};

struct SolveTrace {
  std::vector<double> energies;  // E(Ht^k, alpha^k), k = 0, 1, ...
  std::vector<double> h_steps;   // ||Ht^k - Ht^{k-1}||_F
  std::vector<double> alpha_steps;
  int h_halvings = 0;
  int alpha_halvings = 0;
  SolveStatus status = SolveStatus::max_iters;
};

struct SolveResult {
  RealMatrix Ht;
  EigenvalueVector alpha;
  ComplexMatrix B;
  double energy = kInfiniteEnergy;
  double shifted_energy = kInfiniteEnergy;
  int iterations = 0;
  SolveTrace trace;

  SolveStatus status() const { return trace.status; }
  bool failed() const { return trace.status == SolveStatus::degenerate; }
};

// ---------------------------------------------------------------------------
// Gradients

/// D(Ht)_nm = 1/Ht_nm - H_nm/Ht_nm^2 where H_nm != 0, else 0.
inline RealMatrix fidelity_grad_matrix(const RealMatrix& h, const RealMatrix& ht,
                                       double zero_threshold = 0.0) {
  if (h.rows() != ht.rows() || h.cols() != ht.cols())
    throw ShapeError("fidelity_grad_matrix: shape mismatch");
  RealMatrix d(h.rows(), h.cols());
  for (Index m = 0; m < h.cols(); ++m)
    for (Index n = 0; n < h.rows(); ++n) {
      const double hv = h(n, m), tv = ht(n, m);
      if (is_zero_entry(hv, zero_threshold)) {
        d(n, m) = 0.0;
        continue;
      }
      if (!(hv * tv > 0.0))
        throw SingularityError("fidelity gradient: denoised entry outside the open sign cone");
      d(n, m) = (1.0 - hv / tv) / tv;
    }
  return d;
}

inline RealMatrix grad_h(const RealMatrix& h, const RealMatrix& ht,
                         const ExponentialBasis& basis, double eta,
                         double zero_threshold = 0.0) {
  return fidelity_grad_matrix(h, ht, zero_threshold) + eta * basis.residual(ht).real();
}

inline RealMatrix grad_h(const SnapshotSet& data, const RealMatrix& ht,
                         const EigenvalueVector& alpha, double eta,
                         double zero_threshold = 0.0) {
  return grad_h(data.H, ht, ExponentialBasis(alpha, data.times), eta, zero_threshold);
}

/// eta J^H (Ht - P Ht); the real-coordinate derivatives are its real and
/// imaginary parts.
inline ComplexVector grad_alpha(const RealMatrix& ht, const ExponentialBasis& basis, double eta) {
  const VarproJacobian jac(basis, ht);
  return eta * jac.complex_gradient(basis.residual(ht));
}

inline ComplexVector grad_alpha(const RealMatrix& ht, const EigenvalueVector& alpha,
                                const RealVector& times, double eta) {
  require_distinct(alpha);
  return grad_alpha(ht, ExponentialBasis(alpha, times), eta);
}

// ---------------------------------------------------------------------------
// Descent blocks

namespace detail {

/// Phi(alpha) factorization, or nothing when the exponentials overflow.
inline std::shared_ptr<const ExponentialBasis> try_basis(const EigenvalueVector& alpha,
                                                         const RealVector& times) {
  if (!alpha.allFinite()) return nullptr;
  try {
    return std::make_shared<const ExponentialBasis>(alpha, times);
  } catch (const InvalidInput&) {
    return nullptr;
  }
}

}  // namespace detail

struct BlockResult {
  IterateState state;
  int halvings = 0;
  double step = 0.0;  // norm of the accepted update
  bool stagnated = false;
  bool degenerate = false;
};

inline IterateState make_state(const SnapshotSet& data, const RealMatrix& ht,
                               const EigenvalueVector& alpha, const ModelConfig& cfg) {
  IterateState s;
  s.Ht = ht;
  s.alpha = alpha;
  s.tau_h = cfg.tau_h0;
  s.tau_alpha = cfg.initial_tau_alpha();
  s.basis = detail::try_basis(alpha, data.times);
  if (!s.basis) throw InvalidInput("initial eigenvalues overflow the exponential basis");
  s.energy = energy_shifted(data.H, ht, *s.basis, cfg.eta, cfg.zero_threshold);
  return s;
}

///
/// Projected gradient step in Ht with backtracking: tau_h is doubled once,
/// then halved until E(Ht+, alpha) <= E(Ht, alpha) - ||Ht+ - Ht||^2 / (2 tau_h).
/// A candidate on the cone boundary has infinite energy and is always
/// rejected. After max_halvings failures the state is returned unchanged
/// with `stagnated` set.
///
inline BlockResult descend_h(const IterateState& state, const SnapshotSet& data,
                             const ModelConfig& cfg) {
  if (!std::isfinite(state.energy))
    throw InvalidInput("descend_h: energy at the current state is not finite");
  const ExponentialBasis& basis = *state.basis;
  const RealMatrix grad = grad_h(data.H, state.Ht, basis, cfg.eta, cfg.zero_threshold);

  BlockResult out{state};
  double tau = 2.0 * state.tau_h;
  for (int halvings = 0; halvings <= cfg.max_halvings; ++halvings) {
    RealMatrix cand = project_sign_cone(state.Ht - tau * grad, data.H, cfg.zero_threshold);
    const double e = energy_shifted(data.H, cand, basis, cfg.eta, cfg.zero_threshold);
    const double dist_sq = (cand - state.Ht).squaredNorm();
    if (e <= state.energy - dist_sq / (2.0 * tau)) {
      out.state.Ht = std::move(cand);
      out.state.energy = e;
      out.state.tau_h = tau;
      out.halvings = halvings;
      out.step = std::sqrt(dist_sq);
      return out;
    }
    tau *= 0.5;
  }
  out.halvings = cfg.max_halvings;
  out.stagnated = true;
  return out;
}

/// Gradient step in alpha with the same backtracking rule. A candidate with
/// coincident entries aborts the block with `degenerate` set.
inline BlockResult descend_alpha(const IterateState& state, const SnapshotSet& data,
                                 const ModelConfig& cfg) {
  if (!std::isfinite(state.energy))
    throw InvalidInput("descend_alpha: energy at the current state is not finite");
  const ComplexVector grad = grad_alpha(state.Ht, *state.basis, cfg.eta);

  BlockResult out{state};
  double tau = 2.0 * state.tau_alpha;
  for (int halvings = 0; halvings <= cfg.max_halvings; ++halvings) {
    EigenvalueVector cand = state.alpha - tau * grad;
    if (cfg.alpha_bounds) cand = cfg.alpha_bounds->clamp(cand);
    if (cand.allFinite() && !has_distinct_entries(cand)) {
      out.halvings = halvings;
      out.degenerate = true;
      return out;
    }
    auto basis = detail::try_basis(cand, data.times);
    if (basis) {
      const double e = energy_shifted(data.H, state.Ht, *basis, cfg.eta, cfg.zero_threshold);
      const double dist_sq = (cand - state.alpha).squaredNorm();
      if (e <= state.energy - dist_sq / (2.0 * tau)) {
        out.state.alpha = std::move(cand);
        out.state.basis = std::move(basis);
        out.state.energy = e;
        out.state.tau_alpha = tau;
        out.halvings = halvings;
        out.step = std::sqrt(dist_sq);
        return out;
      }
    }
    tau *= 0.5;
  }
  out.halvings = cfg.max_halvings;
  out.stagnated = true;
  return out;
}

// ---------------------------------------------------------------------------
// Alternating descent

namespace detail {

inline SolveResult finish(const SnapshotSet& data, const IterateState& s, double floor,
                          SolveTrace trace) {
  SolveResult r;
  r.Ht = s.Ht;
  r.alpha = s.alpha;
  r.B = s.basis->coefficients(s.Ht);
  r.shifted_energy = s.energy;
  r.energy = s.energy + floor;
  r.iterations = s.k;
  r.trace = std::move(trace);
  (void)data;
  return r;
}

}  // namespace detail

///
/// Alternating descent: one projected Ht block, then one alpha block, per
/// outer iteration. Stops when
/// max(||dHt||_F / ||Ht||_F, ||dalpha||_2 / ||alpha||_2) < tol, when both
/// blocks stagnate, on a degenerate alpha, or at max_outer_iters.
///
inline SolveResult alternating_descent(const SnapshotSet& data, const EigenvalueVector& alpha0,
                                       const std::optional<RealMatrix>& ht0,
                                       const ModelConfig& cfg) {
  data.validate();
  cfg.validate();
  // The alpha block is a projected step, so the start must lie in the box.
  const EigenvalueVector alpha_start = cfg.alpha_bounds ? cfg.alpha_bounds->clamp(alpha0) : alpha0;
  require_distinct(alpha_start);
  // Default start is H with sub-threshold entries zeroed.
  const RealMatrix start = ht0 ? *ht0 : project_sign_cone(data.H, data.H, cfg.zero_threshold);
  if (start.rows() != data.H.rows() || start.cols() != data.H.cols())
    throw ShapeError("alternating_descent: initial state shape mismatch");
  if (!in_open_sign_cone(start, data.H, cfg.zero_threshold))
    throw InvalidInput("alternating_descent: initial state is not in the open sign cone");

  IterateState state = make_state(data, start, alpha_start, cfg);
  if (!std::isfinite(state.energy))
    throw InvalidInput("alternating_descent: initial energy is not finite");
  const double floor = fidelity_floor(data.H, cfg.zero_threshold);

  SolveTrace trace;
  trace.energies.push_back(state.energy + floor);
  for (int k = 1; k <= cfg.max_outer_iters; ++k) {
    const BlockResult hb = descend_h(state, data, cfg);
    trace.h_halvings += hb.halvings;
    const BlockResult ab = descend_alpha(hb.state, data, cfg);
    trace.alpha_halvings += ab.halvings;

    state = ab.state;
    state.k = k;
    trace.energies.push_back(state.energy + floor);
    trace.h_steps.push_back(hb.step);
    trace.alpha_steps.push_back(ab.step);

    if (ab.degenerate) {
      trace.status = SolveStatus::degenerate;
      return detail::finish(data, state, floor, std::move(trace));
    }
    if (hb.stagnated && ab.stagnated) {
      trace.status = SolveStatus::stagnated;
      return detail::finish(data, state, floor, std::move(trace));
    }
    const double rel_h = relative_change(hb.step, state.Ht.norm());
    const double rel_a = relative_change(ab.step, state.alpha.norm());
    if (std::max(rel_h, rel_a) < cfg.tol) {
      trace.status = SolveStatus::converged;
      return detail::finish(data, state, floor, std::move(trace));
    }
  }
  trace.status = SolveStatus::max_iters;
  return detail::finish(data, state, floor, std::move(trace));
}

// ---------------------------------------------------------------------------
// Initialisation

namespace detail {

/// Relative singular-value floor below which a POD coordinate is treated as
/// roundoff when choosing the embedding depth.
inline constexpr double kPodRankTolerance = 1e-10;

inline bool uniformly_sampled(const RealVector& times) {
  const double h = times(1) - times(0);
  for (Index n = 2; n < times.size(); ++n)
    if (std::abs((times(n) - times(n - 1)) - h) > 1e-9 * std::abs(h)) return false;
  return true;
}

/// Rows n = 0..N-depth of [x_n, x_{n+1}, ..., x_{n+depth-1}].
inline RealMatrix delay_embed(const RealMatrix& h, Index depth) {
  const Index rows = h.rows() - depth + 1;
  RealMatrix out(rows, h.cols() * depth);
  for (Index d = 0; d < depth; ++d) out.middleCols(d * h.cols(), h.cols()) = h.middleRows(d, rows);
  return out;
}

}  // namespace detail

///
/// Finite-difference initial guess: project the snapshots onto their leading
/// R POD modes, fit the reduced operator A in least squares to the
/// trapezoidal relation
///
///   (x^{n+1} - x^n) / (t_{n+1} - t_n) = A (x^{n+1} + x^n) / 2,
///
/// and return the eigenvalues of A.
///
/// Standing-wave data can have fewer than R independent spatial patterns
/// even though R exponentials are present. When the snapshots have numerical
/// rank below R and the sampling is uniform, consecutive snapshots are
/// stacked (delay embedding, which keeps the continuous-time eigenvalues)
/// until the rank reaches R.
///
/// With `max_abs_real`, real parts are clamped to that magnitude; entries
/// made coincident by the clamp are pulled apart toward zero.
///
inline EigenvalueVector fd_init(const SnapshotSet& data, Index rank,
                                std::optional<double> max_abs_real = std::nullopt) {
  data.validate();
  if (rank < 1) throw InvalidInput("fd_init: rank must be positive");
  if (data.samples() < rank + 1) throw InvalidInput("fd_init: need at least rank + 1 snapshots");

  const bool can_embed = detail::uniformly_sampled(data.times);
  RealMatrix x;
  Eigen::BDCSVD<RealMatrix> svd;
  Index depth = 1;
  for (;; ++depth) {
    const Index samples = data.samples() - depth + 1;
    if (samples < rank + 1 || (depth > 1 && !can_embed))
      throw DegenerateSpectrum("fd_init: projected data has collapsed rank");
    x = detail::delay_embed(data.H, depth).transpose();  // (M depth) x samples
    if (x.rows() < rank) continue;
    svd.compute(x, Eigen::ComputeThinU);
    const RealVector& s = svd.singularValues();
    if (s(0) > 0.0 && s(rank - 1) > detail::kPodRankTolerance * s(0)) break;
  }
  const RealMatrix reduced = svd.matrixU().leftCols(rank).transpose() * x;  // R x samples

  const Index steps = reduced.cols() - 1;
  RealMatrix rates(rank, steps), mids(rank, steps);
  for (Index n = 0; n < steps; ++n) {
    const double dt = data.times(n + 1) - data.times(n);
    rates.col(n) = (reduced.col(n + 1) - reduced.col(n)) / dt;
    mids.col(n) = 0.5 * (reduced.col(n + 1) + reduced.col(n));
  }
  // rates = A mids  <=>  mids^T A^T = rates^T
  const RealMatrix a =
      mids.transpose().completeOrthogonalDecomposition().solve(rates.transpose()).transpose();
  Eigen::EigenSolver<RealMatrix> eig(a, false);
  if (eig.info() != Eigen::Success) throw DegenerateSpectrum("fd_init: eigensolver failed");
  EigenvalueVector alpha = eig.eigenvalues();
  if (max_abs_real) {
    const double bound = *max_abs_real;
    if (!(bound > 0.0)) throw InvalidInput("fd_init: max_abs_real must be positive");
    for (Index i = 0; i < alpha.size(); ++i) {
      double re = std::clamp(alpha(i).real(), -bound, bound);
      auto clashes = [&] {
        for (Index j = 0; j < i; ++j)
          if (std::abs(Complex(re, alpha(i).imag()) - alpha(j)) < 1e3 * kDistinctTolerance)
            return true;
        return false;
      };
      while (clashes()) re -= std::copysign(1e-3 * bound, re == 0.0 ? 1.0 : re);
      alpha(i) = Complex(re, alpha(i).imag());
    }
  }
  return alpha;
}

struct FullSolveResult {
  SolveResult best;
  int chosen = 0;  // 1: fd initialisation, 2: baseline-solver initialisation
  EigenvalueVector fd_alpha;
  EigenvalueVector ak_alpha;
  std::optional<SolveResult> fd_run;
  std::optional<SolveResult> ak_run;
};

///
/// Run alternating descent from the finite-difference guess (computed here
/// unless supplied) and from the baseline LM solution started at that guess;
/// return whichever ends at the lower energy. A run that cannot start is
/// skipped; if both are degenerate the lower-energy one is returned as is.
///
inline FullSolveResult full_solve(const SnapshotSet& data, const ModelConfig& cfg,
                                  const LmConfig& lm_cfg = {},
                                  const std::optional<EigenvalueVector>& fd_alpha = std::nullopt) {
  cfg.validate();
  FullSolveResult out;
  out.fd_alpha = fd_alpha ? *fd_alpha : fd_init(data, cfg.rank);
  if (out.fd_alpha.size() != cfg.rank) throw InvalidInput("full_solve: initial guess has wrong length");

  try {
    out.fd_run = alternating_descent(data, out.fd_alpha, std::nullopt, cfg);
  } catch (const DegenerateSpectrum&) {
  } catch (const InvalidInput&) {
  }
  try {
    out.ak_alpha = lm_solve(data, out.fd_alpha, lm_cfg).alpha;
    out.ak_run = alternating_descent(data, out.ak_alpha, std::nullopt, cfg);
  } catch (const DegenerateSpectrum&) {
  } catch (const InvalidInput&) {
  }

  if (!out.fd_run && !out.ak_run)
    throw DegenerateSpectrum("full_solve: neither initialisation produced a valid run");

  auto rank_of = [](const std::optional<SolveResult>& r) {
    if (!r) return 2;
    return r->failed() ? 1 : 0;
  };
  bool pick_fd;
  if (rank_of(out.fd_run) != rank_of(out.ak_run))
    pick_fd = rank_of(out.fd_run) < rank_of(out.ak_run);
  else
    pick_fd = out.fd_run->energy <= out.ak_run->energy;
  out.chosen = pick_fd ? 1 : 2;
  out.best = pick_fd ? *out.fd_run : *out.ak_run;
  return out;
}

}  // namespace odmd

#endif  // ODMD_PROP_SOLVER_HPP
