///
/// \file bench.hpp
///
/// Metrics and Monte-Carlo drivers: permutation-free eigenvalue distance,
/// relative reconstruction error, seeded trial loops over the synthetic
/// systems, and the per-segment combustor reconstruction study.
///
#ifndef ODMD_BENCH_HPP
#define ODMD_BENCH_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "odmd/ak_solver.hpp"
#include "odmd/prop_solver.hpp"
#include "odmd/systems.hpp"

namespace odmd {

// ---------------------------------------------------------------------------
// Metrics

struct Assignment {
  std::vector<Index> column_of_row;
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(n^3)).
inline Assignment hungarian(const RealMatrix& cost) {
  if (cost.rows() != cost.cols()) throw ShapeError("hungarian: cost matrix must be square");
  if (!cost.allFinite()) throw InvalidInput("hungarian: non-finite cost");
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is a virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  Assignment a;
  a.column_of_row.assign(n, 0);
  for (Index j = 1; j <= n; ++j) a.column_of_row[match[j] - 1] = j - 1;
  for (Index i = 0; i < n; ++i) a.cost += cost(i, a.column_of_row[i]);
  return a;
}

/// min over permutations p of ||a1 - a2[p]||_2.
inline double metric_d(const EigenvalueVector& a1, const EigenvalueVector& a2) {
  if (a1.size() != a2.size()) throw ShapeError("metric_d: length mismatch");
  if (a1.size() == 0) return 0.0;
  RealMatrix cost(a1.size(), a2.size());
  for (Index i = 0; i < a1.size(); ++i)
    for (Index j = 0; j < a2.size(); ++j) cost(i, j) = std::norm(a1(i) - a2(j));
  return std::sqrt(std::max(hungarian(cost).cost, 0.0));
}

inline double recon_error(const RealMatrix& clean, const RealMatrix& recon) {
  if (clean.rows() != recon.rows() || clean.cols() != recon.cols())
    throw ShapeError("recon_error: shape mismatch");
  const double denom = clean.norm();
  if (!(denom > 0.0)) throw InvalidInput("recon_error: clean data has zero norm");
  return (clean - recon).norm() / denom;
}

// ---------------------------------------------------------------------------
// Trial aggregation

struct TrialStats {
  double mean = 0.0;
  double sample_std = 0.0;  // (n - 1) divisor; 0 when n < 2
  int trials = 0;
  int failures = 0;
  std::vector<double> values;
};

inline TrialStats aggregate(std::vector<double> values, int failures = 0) {
  TrialStats s;
  s.values = std::move(values);
  s.trials = static_cast<int>(s.values.size());
  s.failures = failures;
  if (s.trials == 0) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : s.values) sum += v;
  s.mean = sum / s.trials;
  if (s.trials > 1) {
    double sq = 0.0;
    for (double v : s.values) sq += (v - s.mean) * (v - s.mean);
    s.sample_std = std::sqrt(sq / (s.trials - 1));
  }
  return s;
}

enum class SystemId { periodic, hidden };
enum class SolverId { ak, ak_ideal, prop, prop_ideal };

inline std::string to_string(SystemId s) { return s == SystemId::periodic ? "periodic" : "hidden"; }

inline std::string to_string(SolverId s) {
  switch (s) {
    case SolverId::ak: return "AK";
    case SolverId::ak_ideal: return "AK-i";
    case SolverId::prop: return "Prop";
    case SolverId::prop_ideal: return "Prop-i";
  }
  return "unknown";
}

inline SystemId parse_system(const std::string& s) {
  if (s == "periodic") return SystemId::periodic;
  if (s == "hidden") return SystemId::hidden;
  throw InvalidInput("unknown system '" + s + "'");
}

inline SolverId parse_solver(const std::string& s) {
  if (s == "AK" || s == "ak") return SolverId::ak;
  if (s == "AK-i" || s == "ak-i") return SolverId::ak_ideal;
  if (s == "Prop" || s == "prop") return SolverId::prop;
  if (s == "Prop-i" || s == "prop-i") return SolverId::prop_ideal;
  throw InvalidInput("unknown solver '" + s + "'");
}

struct ExperimentPlan {
  SystemId system = SystemId::periodic;
  SolverId solver = SolverId::prop_ideal;
  Index N = 64;
  double sigma2 = 1e-3;
  double eta = 1e3;
  int trials = 100;
  std::uint64_t base_seed = 1;
  Index M = 300;  // hidden system only
  double tol = 1e-5;
  int max_outer_iters = 10000;
  LmConfig lm;

  void validate() const {
    if (trials < 1) throw InvalidInput("ExperimentPlan: trials must be positive");
    if (N < 2) throw InvalidInput("ExperimentPlan: N must be at least 2");
    if (sigma2 < 0.0) throw InvalidInput("ExperimentPlan: sigma2 must be nonnegative");
    if (!(eta > 0.0)) throw InvalidInput("ExperimentPlan: eta must be positive");
    lm.validate();
  }
};

inline GeneratedData generate(const ExperimentPlan& plan, std::uint64_t seed) {
  if (plan.system == SystemId::periodic) {
    PeriodicConfig cfg;
    cfg.N = plan.N;
    return gen_periodic(cfg, plan.sigma2, seed);
  }
  HiddenConfig cfg;
  cfg.N = plan.N;
  cfg.M = plan.M;
  return gen_hidden(cfg, plan.sigma2, seed);
}

/// The eigenvalues a solver returns on one data set, or nothing on failure.
inline std::optional<EigenvalueVector> run_solver(SolverId solver, const GeneratedData& g,
                                                  const ExperimentPlan& plan) {
  const Index rank = g.alpha_exact.size();
  ModelConfig mc;
  mc.rank = rank;
  mc.eta = plan.eta;
  mc.tol = plan.tol;
  mc.max_outer_iters = plan.max_outer_iters;
  try {
    switch (solver) {
      case SolverId::ak:
      case SolverId::ak_ideal: {
        const EigenvalueVector init =
            solver == SolverId::ak ? fd_init(g.noisy, rank) : g.alpha_exact;
        const LmResult r = lm_solve(g.noisy, init, plan.lm);
        if (r.status == LmStatus::degenerate) return std::nullopt;
        return r.alpha;
      }
      case SolverId::prop: {
        const FullSolveResult r = full_solve(g.noisy, mc, plan.lm);
        if (r.best.failed()) return std::nullopt;
        return r.best.alpha;
      }
      case SolverId::prop_ideal: {
        const SolveResult r = alternating_descent(g.noisy, g.alpha_exact, std::nullopt, mc);
        if (r.failed()) return std::nullopt;
        return r.alpha;
      }
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

/// Run `count` independent jobs on up to `threads` workers. Each job writes
/// only its own slot, so results do not depend on scheduling.
inline void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) job(i);
    });
  for (auto& t : pool) t.join();
}

///
/// Trial i uses seed base_seed + i for the noise; the recorded value is
/// d(alpha*, alpha_exact). Failed trials are counted and left out.
///
inline TrialStats run_trials(const ExperimentPlan& plan, int threads = 1) {
  plan.validate();
  std::vector<std::optional<double>> slots(static_cast<std::size_t>(plan.trials));
  parallel_for(plan.trials, threads, [&](int i) {
    const GeneratedData g = generate(plan, plan.base_seed + static_cast<std::uint64_t>(i));
    if (auto alpha = run_solver(plan.solver, g, plan))
      slots[static_cast<std::size_t>(i)] = metric_d(*alpha, g.alpha_exact);
  });
  std::vector<double> values;
  int failures = 0;
  for (const auto& s : slots) {
    if (s && std::isfinite(*s))
      values.push_back(*s);
    else
      ++failures;
  }
  return aggregate(std::move(values), failures);
}

// ---------------------------------------------------------------------------
// Combustor study

struct CombustorStudyConfig {
  CombustorConfig combustor;
  NoiseProfile profile = NoiseProfile::weak;
  std::uint64_t seed = 1;
  Index rank = 10;
  double eta = 1e3;
  int windows = 10;
  // |Re alpha| * (window length) bound for the initial guess and the proposed
  // solver; nullopt leaves both unconstrained.
  std::optional<double> max_window_growth = 5.0;
  double tol = 1e-5;
  int max_outer_iters = 10000;
  LmConfig lm;
  int threads = 1;
};

struct SegmentResult {
  double t_begin = 0.0;
  double t_end = 0.0;
  double ak_error = std::numeric_limits<double>::quiet_NaN();
  double prop_error = std::numeric_limits<double>::quiet_NaN();
  std::string ak_status;
  std::string prop_status;
};

struct CombustorStudyResult {
  CombustorRun noisy;
  CombustorRun clean;
  std::vector<SegmentResult> segments;
};

///
/// Reconstruction errors of one noisy segment against its clean counterpart.
/// Times are shifted to start at zero and the data are scaled to unit RMS
/// before solving; reconstructions are scaled back.
///
inline SegmentResult solve_segment(const SnapshotSet& noisy, const SnapshotSet& clean,
                                   const CombustorStudyConfig& cfg) {
  SegmentResult out;
  out.t_begin = noisy.times(0);
  out.t_end = noisy.times(noisy.times.size() - 1);

  SnapshotSet data;
  data.times = noisy.times.array() - noisy.times(0);
  const double rms = std::sqrt(noisy.H.squaredNorm() / static_cast<double>(noisy.H.size()));
  const double scale = rms > 0.0 ? 1.0 / rms : 1.0;
  data.H = noisy.H * scale;

  std::optional<double> max_re;
  if (cfg.max_window_growth) max_re = *cfg.max_window_growth / data.times(data.times.size() - 1);

  EigenvalueVector init;
  try {
    init = fd_init(data, cfg.rank, max_re);
  } catch (const Error& e) {
    out.ak_status = out.prop_status = std::string("init failed: ") + e.what();
    return out;
  }

  try {
    const LmResult ak = lm_solve(data, init, cfg.lm);
    out.ak_status = to_string(ak.status);
    const RealMatrix recon = reconstruct(ak.alpha, data.times, data.H) / scale;
    out.ak_error = recon_error(clean.H, recon);
  } catch (const Error& e) {
    out.ak_status = e.what();
  }

  try {
    ModelConfig mc;
    mc.rank = cfg.rank;
    mc.eta = cfg.eta;
    mc.tol = cfg.tol;
    mc.max_outer_iters = cfg.max_outer_iters;
    if (max_re) mc.alpha_bounds = AlphaBounds{-*max_re, *max_re};
    const FullSolveResult prop = full_solve(data, mc, cfg.lm, init);
    out.prop_status = to_string(prop.best.status());
    const RealMatrix recon = reconstruct(prop.best.alpha, data.times, prop.best.Ht) / scale;
    out.prop_error = recon_error(clean.H, recon);
  } catch (const Error& e) {
    out.prop_status = e.what();
  }
  return out;
}

inline CombustorStudyResult run_combustor_study(const CombustorStudyConfig& cfg) {
  CombustorConfig clean_cfg = cfg.combustor;
  clean_cfg.noise.reset();
  CombustorConfig noisy_cfg = cfg.combustor;
  noisy_cfg.noise = PinkNoise{profile_intensity(cfg.profile)};

  CombustorStudyResult out;
  out.clean = simulate_combustor(clean_cfg, cfg.seed);
  if (!noisy_cfg.reference_rms) noisy_cfg.reference_rms = combustor_reference_rms(clean_cfg);
  out.noisy = simulate_combustor(noisy_cfg, cfg.seed);

  const auto noisy_segs = segment_snapshots(out.noisy.pressure, out.noisy.times, cfg.windows);
  const auto clean_segs = segment_snapshots(out.clean.pressure, out.clean.times, cfg.windows);
  out.segments.resize(noisy_segs.size());
  parallel_for(static_cast<int>(noisy_segs.size()), cfg.threads, [&](int w) {
    const auto i = static_cast<std::size_t>(w);
    out.segments[i] = solve_segment(noisy_segs[i], clean_segs[i], cfg);
  });
  return out;
}

}  // namespace odmd

#endif  // ODMD_BENCH_HPP
