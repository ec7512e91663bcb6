///
/// \file systems.hpp
///
/// Test-data generators: a 2-D periodic linear system, two travelling waves
/// with hidden (growing and decaying) dynamics, and a Galerkin model of a
/// 1-D thermoacoustic combustor with delayed, noisy heat release.
///
#ifndef ODMD_SYSTEMS_HPP
#define ODMD_SYSTEMS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "odmd/model.hpp"
#include "odmd/noise.hpp"

namespace odmd {

struct GeneratedData {
  SnapshotSet noisy;
  SnapshotSet clean;
  EigenvalueVector alpha_exact;
};

// ---------------------------------------------------------------------------
// Periodic system: z' = [1 -2; 1 -1] z, z(0) = (c1, c2)

struct PeriodicConfig {
  Index N = 64;
  double dt = 0.1;
  double c1 = 1.0;
  double c2 = 0.1;

  void validate() const {
    if (N < 2) throw InvalidInput("PeriodicConfig: N must be at least 2");
    if (!(dt > 0.0)) throw InvalidInput("PeriodicConfig: dt must be positive");
  }
};

inline Eigen::Vector2d periodic_state(const PeriodicConfig& cfg, double t) {
  const double s = std::sin(t), c = std::cos(t);
  return {cfg.c1 * (s + c) - 2.0 * cfg.c2 * s, cfg.c1 * s + cfg.c2 * (c - s)};
}

inline GeneratedData gen_periodic(const PeriodicConfig& cfg, double sigma2, std::uint64_t seed) {
  cfg.validate();
  if (sigma2 < 0.0) throw InvalidInput("gen_periodic: sigma2 must be nonnegative");
  GeneratedData g;
  g.clean.times.resize(cfg.N);
  g.clean.H.resize(cfg.N, 2);
  for (Index n = 0; n < cfg.N; ++n) {
    const double t = static_cast<double>(n) * cfg.dt;
    g.clean.times(n) = t;
    g.clean.H.row(n) = periodic_state(cfg, t).transpose();
  }
  g.noisy.times = g.clean.times;
  g.noisy.H = apply_multiplicative(g.clean.H, sigma2, seed);
  g.alpha_exact.resize(2);
  g.alpha_exact << Complex(0.0, 1.0), Complex(0.0, -1.0);
  return g;
}

// ---------------------------------------------------------------------------
// Hidden dynamics: z(x, t) = sin(k1 x - w1 t) e^{g1 t} + sin(k2 x - w2 t) e^{g2 t}

struct HiddenConfig {
  Index M = 300;
  Index N = 64;
  double x_max = 15.0;
  double t_max = 1.0;
  double k1 = 1.0, omega1 = 1.0, gamma1 = 1.0;
  double k2 = 0.4, omega2 = 3.7, gamma2 = -0.2;

  void validate() const {
    if (M < 2 || N < 2) throw InvalidInput("HiddenConfig: M and N must be at least 2");
    if (!(x_max > 0.0) || !(t_max > 0.0))
      throw InvalidInput("HiddenConfig: domain lengths must be positive");
  }
};

inline double hidden_field(const HiddenConfig& cfg, double x, double t) {
  return std::sin(cfg.k1 * x - cfg.omega1 * t) * std::exp(cfg.gamma1 * t) +
         std::sin(cfg.k2 * x - cfg.omega2 * t) * std::exp(cfg.gamma2 * t);
}

inline GeneratedData gen_hidden(const HiddenConfig& cfg, double sigma2, std::uint64_t seed) {
  cfg.validate();
  if (sigma2 < 0.0) throw InvalidInput("gen_hidden: sigma2 must be nonnegative");
  const double dx = cfg.x_max / static_cast<double>(cfg.M - 1);
  const double dt = cfg.t_max / static_cast<double>(cfg.N - 1);
  GeneratedData g;
  g.clean.times.resize(cfg.N);
  g.clean.H.resize(cfg.N, cfg.M);
  for (Index n = 0; n < cfg.N; ++n) {
    const double t = static_cast<double>(n) * dt;
    g.clean.times(n) = t;
    for (Index m = 0; m < cfg.M; ++m)
      g.clean.H(n, m) = hidden_field(cfg, static_cast<double>(m) * dx, t);
  }
  g.noisy.times = g.clean.times;
  g.noisy.H = apply_multiplicative(g.clean.H, sigma2, seed);
  g.alpha_exact.resize(4);
  g.alpha_exact << Complex(cfg.gamma1, cfg.omega1), Complex(cfg.gamma1, -cfg.omega1),
      Complex(cfg.gamma2, cfg.omega2), Complex(cfg.gamma2, -cfg.omega2);
  return g;
}

// ---------------------------------------------------------------------------
// Combustor
//
//   zeta_j'' + (j pi)^2 zeta_j + eps_j zeta_j'
//     = -k_Q (2 j pi / (gamma Ma)) sin(j pi x_f) (sqrt|1/3 + u_f(t - tau) + d| - sqrt(1/3))
//   u_f = sum_j zeta_j cos(j pi x_f),  p = -sum_j (gamma Ma / (j pi)) zeta_j' sin(j pi x)

enum class NoiseProfile { weak, intermediate, strong };

inline double profile_intensity(NoiseProfile p) {
  switch (p) {
    case NoiseProfile::weak: return 0.0016;
    case NoiseProfile::intermediate: return 0.0031;
    case NoiseProfile::strong: return 0.0079;
  }
  return 0.0;
}

inline std::string to_string(NoiseProfile p) {
  switch (p) {
    case NoiseProfile::weak: return "weak";
    case NoiseProfile::intermediate: return "intermediate";
    case NoiseProfile::strong: return "strong";
  }
  return "unknown";
}

struct CombustorConfig {
  double Ma = 0.005;
  double x_f = 0.25;
  double tau = 0.16;
  double k_Q = 0.0035;
  double gamma = 1.4;
  int j_max = 10;
  double dt = 0.01;
  double t_end = 200.0;
  int spatial_segments = 500;
  int output_stride = 10;  // integration steps per stored snapshot
  double zeta1_initial = 0.02;
  std::optional<PinkNoise> noise;
  std::optional<double> reference_rms;  // u_0 for noise scaling; computed when unset

  double damping(int j) const { return 0.1 + 0.06 * std::sqrt(static_cast<double>(j)); }

  long steps() const { return std::lround(t_end / dt); }

  void validate() const {
    if (!(dt > 0.0)) throw InvalidInput("CombustorConfig: dt must be positive");
    if (!(tau >= 0.0)) throw InvalidInput("CombustorConfig: tau must be nonnegative");
    if (j_max < 1) throw InvalidInput("CombustorConfig: j_max must be positive");
    if (!(t_end > 0.0)) throw InvalidInput("CombustorConfig: t_end must be positive");
    if (std::abs(static_cast<double>(steps()) * dt - t_end) > 1e-9 * t_end)
      throw InvalidInput("CombustorConfig: t_end must be a multiple of dt");
    if (spatial_segments < 1) throw InvalidInput("CombustorConfig: spatial_segments must be positive");
    if (output_stride < 1 || steps() % output_stride != 0)
      throw InvalidInput("CombustorConfig: output_stride must divide the step count");
    if (!(Ma > 0.0) || !(gamma > 0.0)) throw InvalidInput("CombustorConfig: Ma and gamma must be positive");
    if (noise && !(noise->intensity >= 0.0))
      throw InvalidInput("CombustorConfig: noise intensity must be nonnegative");
  }
};

/// sin(pi * k / n) with exact zeros at multiples of n.
inline double sin_pi_ratio(long k, long n) {
  const long m = ((k % (2 * n)) + 2 * n) % (2 * n);
  if (m == 0 || m == n) return 0.0;
  return std::sin(std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
}

///
/// Classical RK4 on the 2 j_max first-order system. u_f is stored at every
/// step; the delayed value at a stage time is linearly interpolated from that
/// history, or, when the delay is shorter than the step, between the start of
/// the step and the stage's own u_f. History before t = 0 is zero.
///
class CombustorStepper {
 public:
  explicit CombustorStepper(const CombustorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int J = cfg_.j_max;
    y_ = RealVector::Zero(2 * J);
    cos_f_.resize(J);
    force_.resize(J);
    omega2_.resize(J);
    eps_.resize(J);
    for (int j = 1; j <= J; ++j) {
      const double jp = j * std::numbers::pi;
      cos_f_(j - 1) = std::cos(jp * cfg_.x_f);
      force_(j - 1) = -cfg_.k_Q * 2.0 * jp / (cfg_.gamma * cfg_.Ma) * std::sin(jp * cfg_.x_f);
      omega2_(j - 1) = jp * jp;
      eps_(j - 1) = cfg_.damping(j);
    }
    y_(0) = cfg_.zeta1_initial;
    history_.push_back(velocity(y_));
  }

  /// Layout: [zeta_1..zeta_J, zeta_dot_1..zeta_dot_J].
  void set_state(const RealVector& y) {
    if (y.size() != y_.size()) throw ShapeError("CombustorStepper: state size mismatch");
    if (step_ != 0) throw InvalidInput("CombustorStepper: state can only be set before stepping");
    y_ = y;
    history_.assign(1, velocity(y_));
  }

  const RealVector& state() const { return y_; }
  long step_index() const { return step_; }
  double time() const { return static_cast<double>(step_) * cfg_.dt; }
  double velocity() const { return history_.back(); }

  double velocity(const RealVector& y) const { return cos_f_.dot(y.head(cfg_.j_max)); }

  /// Advance one step; d0 and d1 are the noise values at the step ends.
  void step(double d0 = 0.0, double d1 = 0.0) {
    const double h = cfg_.dt;
    const double dm = 0.5 * (d0 + d1);
    const RealVector k1 = rhs(0.0, y_, d0);
    const RealVector k2 = rhs(0.5, y_ + 0.5 * h * k1, dm);
    const RealVector k3 = rhs(0.5, y_ + 0.5 * h * k2, dm);
    const RealVector k4 = rhs(1.0, y_ + h * k3, d1);
    y_ += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    ++step_;
    if (!y_.allFinite()) throw SimulationDiverged("combustor state is not finite", time());
    history_.push_back(velocity(y_));
  }

  /// Pressure at x = i / segments, i = 0..segments.
  RealVector pressure() const {
    const int J = cfg_.j_max;
    const long S = cfg_.spatial_segments;
    RealVector p = RealVector::Zero(S + 1);
    for (int j = 1; j <= J; ++j) {
      const double w = -cfg_.gamma * cfg_.Ma / (j * std::numbers::pi) * y_(J + j - 1);
      for (long i = 0; i <= S; ++i) p(i) += w * sin_pi_ratio(j * i, S);
    }
    return p;
  }

 private:
  double delayed_velocity(double c, const RealVector& y_stage) const {
    const double lag = cfg_.tau / cfg_.dt;
    const double pos = static_cast<double>(step_) + c - lag;  // in step units
    if (pos < 0.0) return 0.0;
    if (pos > static_cast<double>(step_)) {
      const double frac = (pos - static_cast<double>(step_)) / c;
      return (1.0 - frac) * history_.back() + frac * velocity(y_stage);
    }
    // Snap to the grid so that integer lags read samples exactly.
    const double nearest = std::round(pos);
    const double p = std::abs(pos - nearest) < 1e-9 ? nearest : pos;
    const long k = std::min(static_cast<long>(std::floor(p)), step_);
    const double frac = p - static_cast<double>(k);
    if (frac == 0.0) return history_[static_cast<std::size_t>(k)];
    return (1.0 - frac) * history_[static_cast<std::size_t>(k)] +
           frac * history_[static_cast<std::size_t>(k + 1)];
  }

  RealVector rhs(double c, const RealVector& y, double d) const {
    const int J = cfg_.j_max;
    const double u = delayed_velocity(c, y);
    const double q = std::sqrt(std::abs(1.0 / 3.0 + u + d)) - std::sqrt(1.0 / 3.0);
    RealVector f(2 * J);
    f.head(J) = y.tail(J);
    f.tail(J) = force_ * q - omega2_.cwiseProduct(y.head(J)) - eps_.cwiseProduct(y.tail(J));
    return f;
  }

  CombustorConfig cfg_;
  RealVector y_;
  RealVector cos_f_, force_, omega2_, eps_;
  std::vector<double> history_;
  long step_ = 0;
};

struct CombustorRun {
  RealVector times;     // output times
  RealVector x;         // spatial grid
  RealMatrix pressure;  // time x space
  RealVector velocity;  // u_f at output times
  RealVector noise;     // d at output times
  double reference_rms = 0.0;
};

namespace detail {

inline CombustorRun integrate_combustor(const CombustorConfig& cfg, const RealVector& d) {
  CombustorStepper stepper(cfg);
  const long steps = cfg.steps();
  const long outputs = steps / cfg.output_stride + 1;
  CombustorRun run;
  run.times.resize(outputs);
  run.pressure.resize(outputs, cfg.spatial_segments + 1);
  run.velocity.resize(outputs);
  run.noise.resize(outputs);
  run.x.resize(cfg.spatial_segments + 1);
  for (int i = 0; i <= cfg.spatial_segments; ++i)
    run.x(i) = static_cast<double>(i) / cfg.spatial_segments;

  auto record = [&](long o) {
    run.times(o) = static_cast<double>(o * cfg.output_stride) * cfg.dt;
    run.pressure.row(o) = stepper.pressure().transpose();
    run.velocity(o) = stepper.velocity();
    run.noise(o) = d(o * cfg.output_stride);
  };
  record(0);
  for (long n = 0; n < steps; ++n) {
    stepper.step(d(n), d(n + 1));
    if ((n + 1) % cfg.output_stride == 0) record((n + 1) / cfg.output_stride);
  }
  return run;
}

}  // namespace detail

/// RMS of u_f over the second half of a noise-free run.
inline double combustor_reference_rms(const CombustorConfig& cfg) {
  CombustorConfig clean = cfg;
  clean.noise.reset();
  const CombustorRun run = detail::integrate_combustor(clean, RealVector::Zero(cfg.steps() + 1));
  const Index start = run.times.size() / 2;
  const RealVector tail = run.velocity.tail(run.times.size() - start);
  return std::sqrt(tail.squaredNorm() / static_cast<double>(tail.size()));
}

inline CombustorRun simulate_combustor(const CombustorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const long steps = cfg.steps();
  RealVector d = RealVector::Zero(steps + 1);
  double ref = 0.0;
  if (cfg.noise && cfg.noise->intensity > 0.0) {
    ref = cfg.reference_rms ? *cfg.reference_rms : combustor_reference_rms(cfg);
    d = pink_noise(steps + 1, cfg.dt, cfg.noise->intensity, ref, seed);
  }
  CombustorRun run = detail::integrate_combustor(cfg, d);
  run.reference_rms = ref;
  return run;
}

///
/// Split a time-major field into `window_count` consecutive windows of equal
/// duration. Windows are half-open [a, b) except the last, which keeps the
/// final sample. Times are kept as in the field.
///
inline std::vector<SnapshotSet> segment_snapshots(const RealMatrix& field, const RealVector& times,
                                                  int window_count = 10) {
  if (field.rows() != times.size()) throw ShapeError("segment_snapshots: times/field mismatch");
  if (window_count < 1) throw InvalidInput("segment_snapshots: window_count must be positive");
  if (times.size() < 2 * window_count)
    throw InvalidInput("segment_snapshots: too few samples for the window count");
  const double t0 = times(0);
  const double width = (times(times.size() - 1) - t0) / window_count;
  const double eps = 1e-9 * width;

  std::vector<SnapshotSet> out;
  Index begin = 0;
  for (int w = 0; w < window_count; ++w) {
    Index end = times.size();
    if (w + 1 < window_count) {
      const double stop = t0 + width * (w + 1);
      end = begin;
      while (end < times.size() && times(end) < stop - eps) ++end;
    }
    SnapshotSet s;
    s.times = times.segment(begin, end - begin);
    s.H = field.middleRows(begin, end - begin);
    out.push_back(std::move(s));
    begin = end;
  }
  return out;
}

}  // namespace odmd

#endif  // ODMD_SYSTEMS_HPP
