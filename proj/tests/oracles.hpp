// Independent reference computations shared by the unit tests and the
// acceptance runner. Nothing here calls the solver code it is used to check.
#ifndef ODMD_TESTS_ORACLES_HPP
#define ODMD_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "odmd/bench.hpp"

namespace oracle {

using namespace odmd;

inline RealMatrix random_real(Index rows, Index cols, std::mt19937_64& rng, double lo = -1.0,
                              double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  RealMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m(i) = u(rng);
  return m;
}

inline ComplexMatrix random_complex(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m(i) = Complex(g(rng), g(rng));
  return m;
}

/// R eigenvalues with Re in [-re, re], Im in [-im, im], pairwise at least `sep` apart.
inline EigenvalueVector random_alpha(Index r, std::mt19937_64& rng, double re = 1.0, double im = 3.0,
                                     double sep = 0.3) {
  std::uniform_real_distribution<double> ur(-re, re), ui(-im, im);
  EigenvalueVector a(r);
  for (Index i = 0; i < r; ++i) {
    bool ok = false;
    while (!ok) {
      a(i) = Complex(ur(rng), ui(rng));
      ok = true;
      for (Index j = 0; j < i; ++j) ok = ok && std::abs(a(i) - a(j)) >= sep;
    }
  }
  return a;
}

/// Fourth-order central difference of a scalar function of one real variable.
inline double central_diff(const std::function<double(double)>& f, double h) {
  return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
}

/// d/dHt of a scalar function of Ht, entry by entry.
inline RealMatrix fd_matrix_gradient(const std::function<double(const RealMatrix&)>& f,
                                     const RealMatrix& x, double rel_step = 1e-5) {
  RealMatrix g(x.rows(), x.cols());
  for (Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(std::abs(x(i)), 1e-3);
    g(i) = central_diff(
        [&](double d) {
          RealMatrix y = x;
          y(i) += d;
          return f(y);
        },
        h);
  }
  return g;
}

/// Derivatives of f(alpha) in Re alpha_r and Im alpha_r packed as
/// d/dRe + i d/dIm.
inline ComplexVector fd_alpha_gradient(const std::function<double(const EigenvalueVector&)>& f,
                                       const EigenvalueVector& a, double h = 1e-5) {
  ComplexVector g(a.size());
  for (Index r = 0; r < a.size(); ++r) {
    auto along = [&](Complex dir) {
      return central_diff(
          [&](double d) {
            EigenvalueVector b = a;
            b(r) += d * dir;
            return f(b);
          },
          h);
    };
    g(r) = Complex(along({1.0, 0.0}), along({0.0, 1.0}));
  }
  return g;
}

/// min over all permutations of ||a - b[p]||_2.
inline double brute_force_distance(const EigenvalueVector& a, const EigenvalueVector& b) {
  std::vector<Index> p(static_cast<std::size_t>(a.size()));
  std::iota(p.begin(), p.end(), Index{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (Index i = 0; i < a.size(); ++i) s += std::norm(a(i) - b(p[static_cast<std::size_t>(i)]));
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return std::sqrt(best);
}

/// Largest relative violation of the four Penrose conditions.
inline double penrose_violation(const ComplexMatrix& a, const ComplexMatrix& x) {
  const double na = std::max(a.norm(), 1e-300), nx = std::max(x.norm(), 1e-300);
  const ComplexMatrix ax = a * x, xa = x * a;
  return std::max({(a * x * a - a).norm() / na, (x * a * x - x).norm() / nx,
                   (ax.adjoint() - ax).norm() / std::max(ax.norm(), 1e-300),
                   (xa.adjoint() - xa).norm() / std::max(xa.norm(), 1e-300)});
}

/// z'' + eps z' + w^2 z = 0, z(0) = z0, z'(0) = v0, underdamped.
inline std::pair<double, double> damped_oscillator(double w, double eps, double z0, double v0,
                                                   double t) {
  const double wd = std::sqrt(w * w - 0.25 * eps * eps);
  const double a = z0, b = (v0 + 0.5 * eps * z0) / wd;
  const double e = std::exp(-0.5 * eps * t);
  const double c = std::cos(wd * t), s = std::sin(wd * t);
  const double z = e * (a * c + b * s);
  const double dz = -0.5 * eps * z + e * (-a * wd * s + b * wd * c);
  return {z, dz};
}

/// Least-squares slope of log power against log frequency over bins whose
/// frequency lies in [f_lo, f_hi], with the periodogram from a direct DFT.
inline double periodogram_slope(const RealVector& x, double dt, double f_lo, double f_hi) {
  const Index n = x.size();
  std::vector<double> lx, ly;
  for (Index k = 1; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) / (static_cast<double>(n) * dt);
    if (f < f_lo || f > f_hi) continue;
    Complex acc = 0.0;
    for (Index m = 0; m < n; ++m)
      acc += x(m) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * m % n) /
                                         static_cast<double>(n));
    lx.push_back(std::log(f));
    ly.push_back(std::log(std::norm(acc)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

/// RK4 for the combustor equations with the heat release driven by the
/// instantaneous velocity (no delay), written out independently of the
/// stepper class.
inline RealVector instantaneous_combustor(const CombustorConfig& cfg, long steps) {
  const int J = cfg.j_max;
  auto rhs = [&](const RealVector& y) {
    double u = 0.0;
    for (int j = 1; j <= J; ++j) u += y(j - 1) * std::cos(j * std::numbers::pi * cfg.x_f);
    const double q = std::sqrt(std::abs(1.0 / 3.0 + u)) - std::sqrt(1.0 / 3.0);
    RealVector f(2 * J);
    for (int j = 1; j <= J; ++j) {
      const double jp = j * std::numbers::pi;
      f(j - 1) = y(J + j - 1);
      f(J + j - 1) = -cfg.k_Q * 2.0 * jp / (cfg.gamma * cfg.Ma) * std::sin(jp * cfg.x_f) * q -
                     jp * jp * y(j - 1) - cfg.damping(j) * y(J + j - 1);
    }
    return f;
  };
  RealVector y = RealVector::Zero(2 * J);
  y(0) = cfg.zeta1_initial;
  const double h = cfg.dt;
  for (long n = 0; n < steps; ++n) {
    const RealVector k1 = rhs(y);
    const RealVector k2 = rhs(y + 0.5 * h * k1);
    const RealVector k3 = rhs(y + 0.5 * h * k2);
    const RealVector k4 = rhs(y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

/// Max |x| over samples with times in [a, b].
inline double window_peak(const RealVector& x, const RealVector& t, double a, double b) {
  double m = 0.0;
  for (Index i = 0; i < t.size(); ++i)
    if (t(i) >= a && t(i) <= b) m = std::max(m, std::abs(x(i)));
  return m;
}

}  // namespace oracle

#endif  // ODMD_TESTS_ORACLES_HPP
