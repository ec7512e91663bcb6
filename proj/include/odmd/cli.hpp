///
/// \file cli.hpp
///
/// Command-line front end: gen, solve, sweep, combustor. Every flag can also
/// come from a JSON file passed with --config whose keys are the long flag
/// names (`max-iters` or `max_iters`). Precedence: flag, config, ODMD_SEED
/// (seed flags only), built-in default.
///
#ifndef ODMD_CLI_HPP
#define ODMD_CLI_HPP

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "odmd/bench.hpp"
#include "odmd/io.hpp"

namespace odmd::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kParseError = 2,
  kValidationError = 3,
  kDegenerate = 4,
  kDiverged = 5,
};

inline constexpr const char* kSeedEnv = "ODMD_SEED";

/// Flat JSON object to CLI11 config items, attached to the active subcommand.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::ostringstream ss;
    ss << input.rdbuf();
    const io::Json j = io::parse_json(ss.str(), "config");
    if (!j.is_object()) throw FormatError("config: top level must be an object");

    std::vector<std::string> parents;
    const auto active = root_->get_subcommands();
    if (!active.empty()) parents.push_back(active.front()->get_name());

    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (key == "config") continue;
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(key, v));
      } else {
        item.inputs.push_back(scalar(key, value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const std::string& key, const io::Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw FormatError("config: key '" + key + "' must hold a scalar or an array of scalars");
  }

  const CLI::App* root_;
};

inline std::uint64_t default_seed() {
  if (const char* s = std::getenv(kSeedEnv)) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(s, &used);
      if (used == std::string(s).size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidInput(std::string(kSeedEnv) + " must be a nonnegative integer");
  }
  return 1;
}

inline void make_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory '" + dir + "'");
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// ---------------------------------------------------------------------------
// gen

struct GenOptions {
  std::string system = "periodic";
  Index n = 64;
  Index m = 300;
  double sigma2 = 1e-3;
  std::uint64_t seed = 1;
  std::string out;
};

inline int cmd_gen(const GenOptions& o, std::ostream& log) {
  const SystemId system = parse_system(o.system);
  ExperimentPlan plan;
  plan.system = system;
  plan.N = o.n;
  plan.M = o.m;
  plan.sigma2 = o.sigma2;
  if (o.sigma2 < 0.0 || !std::isfinite(o.sigma2)) throw InvalidInput("gen: sigma2 must be nonnegative");
  if (o.m < 1) throw InvalidInput("gen: m must be positive");
  const GeneratedData g = generate(plan, o.seed);

  make_dir(o.out);
  io::write_snapshot_csv(join(o.out, "clean.csv"), g.clean.times, g.clean.H);
  io::write_snapshot_csv(join(o.out, "noisy.csv"), g.noisy.times, g.noisy.H);
  io::Json meta;
  meta["system"] = to_string(system);
  meta["N"] = g.noisy.samples();
  meta["M"] = g.noisy.width();
  meta["sigma2"] = o.sigma2;
  meta["seed"] = o.seed;
  meta["alpha_exact"] = io::complex_vector_json(g.alpha_exact);
  io::write_json(join(o.out, "meta.json"), meta);
  log << "wrote " << o.out << "/{clean.csv,noisy.csv,meta.json}\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOptions {
  std::string in;
  std::string solver = "proposed";
  std::optional<Index> rank;
  double eta = 1e3;
  double tol = 1e-5;
  int max_iters = 10000;
  double zero_threshold = 0.0;
  std::optional<std::string> init;
  std::uint64_t seed = 1;
  std::string out;
};

/// Eigenvalue guess stored under "alpha" or "alpha_exact" (gen's meta.json works).
inline EigenvalueVector read_alpha_file(const std::string& path) {
  const io::Json j = io::read_json(path);
  for (const char* key : {"alpha", "alpha_exact"})
    if (j.is_object() && j.contains(key)) return io::complex_vector_from_json(j[key], path);
  if (j.is_array()) return io::complex_vector_from_json(j, path);
  throw FormatError(path + ": no \"alpha\" or \"alpha_exact\" array");
}

inline std::string ht_path_for(const std::string& out) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + ".Ht.csv")).string();
}

inline int cmd_solve(const SolveOptions& o, std::ostream& log) {
  if (o.solver != "ak" && o.solver != "proposed")
    throw InvalidInput("solve: solver must be 'ak' or 'proposed'");
  const SnapshotSet data = io::read_snapshot_csv(o.in);
  data.validate();

  const std::string init = o.init.value_or(o.solver == "ak" ? "fd" : "full");
  std::optional<EigenvalueVector> file_alpha;
  if (init.rfind("file:", 0) == 0) {
    file_alpha = read_alpha_file(init.substr(5));
  } else if (init != "fd" && init != "ak" && init != "full") {
    throw InvalidInput("solve: init must be fd, ak, full or file:<path>");
  }
  if (o.solver == "ak" && (init == "ak" || init == "full"))
    throw InvalidInput("solve: init '" + init + "' applies to the proposed solver only");

  const Index rank = o.rank.value_or(file_alpha ? file_alpha->size() : 2);
  if (rank < 1) throw InvalidInput("solve: rank must be positive");
  if (rank > data.samples()) throw InvalidInput("solve: rank exceeds the number of snapshots");
  if (file_alpha && file_alpha->size() != rank)
    throw InvalidInput("solve: initial guess length does not match rank");

  ModelConfig mc;
  mc.rank = rank;
  mc.eta = o.eta;
  mc.tol = o.tol;
  mc.max_outer_iters = o.max_iters;
  mc.zero_threshold = o.zero_threshold;
  mc.validate();
  LmConfig lm;
  lm.tol = o.tol;
  lm.validate();

  io::Json res;
  res["solver"] = o.solver;
  res["input"] = o.in;
  res["init"] = init;
  res["rank"] = rank;
  res["eta"] = o.eta;
  res["tol"] = o.tol;
  res["seed"] = o.seed;
  bool degenerate = false;

  if (o.solver == "ak") {
    const EigenvalueVector a0 = file_alpha ? *file_alpha : fd_init(data, rank);
    const LmResult r = lm_solve(data, a0, lm);
    degenerate = r.status == LmStatus::degenerate;
    io::Json trace = io::Json::array();
    for (double v : r.residual_norms) trace.push_back(io::number(0.5 * v * v));
    res["alpha"] = io::complex_vector_json(r.alpha);
    res["B"] = io::complex_matrix_json(amplitudes(data.H, r.alpha, data.times));
    res["energy"] = io::number(0.5 * r.residual_norms.back() * r.residual_norms.back());
    res["energy_trace"] = trace;
    res["iterations"] = r.iterations;
    res["status"] = to_string(r.status);
  } else {
    SolveResult r;
    if (init == "full") {
      const FullSolveResult f = full_solve(data, mc, lm);
      r = f.best;
      res["chosen_init"] = f.chosen == 1 ? "fd" : "ak";
    } else {
      EigenvalueVector a0;
      if (file_alpha)
        a0 = *file_alpha;
      else if (init == "fd")
        a0 = fd_init(data, rank);
      else
        a0 = lm_solve(data, fd_init(data, rank), lm).alpha;
      r = alternating_descent(data, a0, std::nullopt, mc);
    }
    degenerate = r.failed();
    io::Json trace = io::Json::array();
    for (double v : r.trace.energies) trace.push_back(io::number(v));
    res["alpha"] = io::complex_vector_json(r.alpha);
    res["B"] = io::complex_matrix_json(r.B);
    res["energy"] = io::number(r.energy);
    res["energy_trace"] = trace;
    res["iterations"] = r.iterations;
    res["status"] = to_string(r.status());
    const std::string ht_path = ht_path_for(o.out);
    io::write_snapshot_csv(ht_path, data.times, r.Ht);
    res["Ht_path"] = ht_path;
  }
  io::write_json(o.out, res);
  log << "status " << res["status"].get<std::string>() << ", wrote " << o.out << "\n";
  return degenerate ? kDegenerate : kOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string plan;
  std::string out;
  int threads = 1;
  std::uint64_t seed = 1;
};

namespace detail {

template <class T>
std::vector<T> as_list(const io::Json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  const io::Json& v = j[key];
  std::vector<T> out;
  if (v.is_array())
    for (const auto& e : v) out.push_back(e.get<T>());
  else
    out.push_back(v.get<T>());
  if (out.empty()) throw InvalidInput(std::string("sweep plan: '") + key + "' is empty");
  return out;
}

}  // namespace detail

///
/// Plan keys (scalars or arrays): system, N, sigma2, eta, solvers; scalars:
/// trials, base_seed, M, tol, max_outer_iters. Baseline rows ignore eta and
/// are emitted once per (system, N, sigma2) with an empty eta field.
///
inline std::string run_sweep(const io::Json& plan_json, int threads, std::uint64_t default_base_seed) {
  if (!plan_json.is_object()) throw FormatError("sweep plan: top level must be an object");
  static const std::vector<std::string> known = {"system", "N", "sigma2", "eta", "solvers", "trials",
                                                 "base_seed", "M", "tol", "max_outer_iters"};
  for (const auto& [key, value] : plan_json.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw InvalidInput("sweep plan: unknown key '" + key + "'");

  const auto systems = detail::as_list<std::string>(plan_json, "system", {"periodic"});
  const auto ns = detail::as_list<Index>(plan_json, "N", {64});
  const auto sigma2s = detail::as_list<double>(plan_json, "sigma2", {1e-3});
  const auto etas = detail::as_list<double>(plan_json, "eta", {1e3});
  const auto solvers = detail::as_list<std::string>(plan_json, "solvers", {"AK-i", "Prop-i"});

  ExperimentPlan base;
  base.trials = plan_json.value("trials", 100);
  base.base_seed = plan_json.value("base_seed", default_base_seed);
  base.M = plan_json.value("M", Index{300});
  base.tol = plan_json.value("tol", 1e-5);
  base.max_outer_iters = plan_json.value("max_outer_iters", 10000);
  if (threads < 1) throw InvalidInput("sweep: threads must be positive");

  std::string csv = "system,N,sigma2,eta,solver,mean,std,trials,failures\n";
  for (const auto& sys : systems)
    for (Index n : ns)
      for (double s2 : sigma2s)
        for (const auto& sv : solvers) {
          ExperimentPlan p = base;
          p.system = parse_system(sys);
          p.solver = parse_solver(sv);
          p.N = n;
          p.sigma2 = s2;
          const bool baseline = p.solver == SolverId::ak || p.solver == SolverId::ak_ideal;
          const std::vector<double> cell_etas = baseline ? std::vector<double>{etas.front()} : etas;
          for (double eta : cell_etas) {
            p.eta = eta;
            p.validate();
            const TrialStats st = run_trials(p, threads);
            csv += to_string(p.system) + "," + std::to_string(n) + "," + io::format_double(s2) + "," +
                   (baseline ? std::string() : io::format_double(eta)) + "," + to_string(p.solver) + "," +
                   io::format_double(st.mean) + "," + io::format_double(st.sample_std) + "," +
                   std::to_string(st.trials) + "," + std::to_string(st.failures) + "\n";
          }
        }
  return csv;
}

inline int cmd_sweep(const SweepOptions& o, std::ostream& log) {
  io::Json plan;
  try {
    plan = io::read_json(o.plan);
    const std::string csv = run_sweep(plan, o.threads, o.seed);
    io::write_file(o.out, csv);
  } catch (const nlohmann::json::type_error& e) {
    throw FormatError(o.plan + ": " + e.what());
  }
  log << "wrote " << o.out << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// combustor

struct CombustorOptions {
  std::string profile = "weak";
  std::uint64_t seed = 1;
  std::string out;
  double eta = 1e3;
  Index rank = 10;
  int j_max = 10;
  int windows = 10;
  double t_end = 200.0;
  double dt = 0.01;
  double max_window_growth = 5.0;
  int threads = 1;
};

inline NoiseProfile parse_profile(const std::string& s) {
  if (s == "weak") return NoiseProfile::weak;
  if (s == "intermediate") return NoiseProfile::intermediate;
  if (s == "strong") return NoiseProfile::strong;
  throw InvalidInput("unknown noise profile '" + s + "'");
}

inline int cmd_combustor(const CombustorOptions& o, std::ostream& log) {
  CombustorStudyConfig cfg;
  cfg.profile = parse_profile(o.profile);
  cfg.seed = o.seed;
  cfg.eta = o.eta;
  cfg.rank = o.rank;
  cfg.windows = o.windows;
  cfg.threads = o.threads;
  cfg.combustor.j_max = o.j_max;
  cfg.combustor.t_end = o.t_end;
  cfg.combustor.dt = o.dt;
  if (o.max_window_growth > 0.0)
    cfg.max_window_growth = o.max_window_growth;
  else
    cfg.max_window_growth.reset();
  if (!(o.eta > 0.0)) throw InvalidInput("combustor: eta must be positive");
  if (o.rank < 1) throw InvalidInput("combustor: rank must be positive");
  if (o.threads < 1) throw InvalidInput("combustor: threads must be positive");
  cfg.combustor.validate();

  make_dir(o.out);
  const CombustorStudyResult r = run_combustor_study(cfg);
  io::write_snapshot_csv(join(o.out, "pressure.csv"), r.noisy.times, r.noisy.pressure);

  std::string noise = "t,d,u_f\n";
  for (Index n = 0; n < r.noisy.times.size(); ++n)
    noise += io::format_double(r.noisy.times(n)) + "," + io::format_double(r.noisy.noise(n)) + "," +
             io::format_double(r.noisy.velocity(n)) + "\n";
  io::write_file(join(o.out, "noise.csv"), noise);

  std::string table = "segment,t_begin,t_end,ak_error,prop_error,ak_status,prop_status\n";
  for (std::size_t i = 0; i < r.segments.size(); ++i) {
    const SegmentResult& s = r.segments[i];
    table += std::to_string(i + 1) + "," + io::format_double(s.t_begin) + "," + io::format_double(s.t_end) +
             "," + io::format_double(s.ak_error) + "," + io::format_double(s.prop_error) + ",\"" +
             s.ak_status + "\",\"" + s.prop_status + "\"\n";
    log << "segment " << i + 1 << ": AK " << s.ak_error << "  proposed " << s.prop_error << "\n";
  }
  io::write_file(join(o.out, "recon_errors.csv"), table);
  log << "wrote " << o.out << "/{pressure.csv,noise.csv,recon_errors.csv}\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// entry point

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Multiplicative-noise optimized DMD tools"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "JSON file with flag values, keyed by long flag name");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  std::uint64_t seed_default = 1;
  std::string seed_error;
  try {
    seed_default = default_seed();
  } catch (const InvalidInput& e) {
    seed_error = e.what();
  }

  GenOptions gen;
  gen.seed = seed_default;
  auto* g = app.add_subcommand("gen", "Generate clean and noisy snapshot CSVs");
  g->add_option("system", gen.system, "periodic or hidden")->check(CLI::IsMember({"periodic", "hidden"}));
  g->add_option("--n", gen.n, "Number of snapshots")->capture_default_str();
  g->add_option("--m", gen.m, "Spatial points (hidden system)")->capture_default_str();
  g->add_option("--sigma2", gen.sigma2, "Gamma noise variance")->capture_default_str();
  g->add_option("--seed", gen.seed, "Noise seed (default from ODMD_SEED)");
  g->add_option("--out", gen.out, "Output directory")->required();

  SolveOptions solve;
  solve.seed = seed_default;
  auto* s = app.add_subcommand("solve", "Fit eigenvalues to a snapshot CSV");
  s->add_option("--in", solve.in, "Snapshot CSV")->required();
  s->add_option("--solver", solve.solver, "ak or proposed")->check(CLI::IsMember({"ak", "proposed"}))->capture_default_str();
  s->add_option("--rank", solve.rank, "Number of eigenvalues (default 2, or the init file length)");
  s->add_option("--eta", solve.eta, "Penalty parameter")->capture_default_str();
  s->add_option("--tol", solve.tol, "Relative-change stopping tolerance")->capture_default_str();
  s->add_option("--max-iters", solve.max_iters, "Outer iteration cap")->capture_default_str();
  s->add_option("--zero-threshold", solve.zero_threshold, "|H| below this counts as zero")->capture_default_str();
  s->add_option("--init", solve.init, "fd, ak, full or file:<path> (default full for proposed, fd for ak)");
  s->add_option("--seed", solve.seed, "Recorded in the result (default from ODMD_SEED)");
  s->add_option("--out", solve.out, "Result JSON path")->required();

  SweepOptions sweep;
  sweep.seed = seed_default;
  auto* w = app.add_subcommand("sweep", "Run a grid of trials and write a CSV table");
  w->add_option("--plan", sweep.plan, "Plan JSON")->required();
  w->add_option("--out", sweep.out, "Output CSV")->required();
  w->add_option("--threads", sweep.threads, "Worker threads")->capture_default_str();
  w->add_option("--seed", sweep.seed, "Base seed when the plan has none (default from ODMD_SEED)");

  CombustorOptions comb;
  comb.seed = seed_default;
  auto* c = app.add_subcommand("combustor", "Simulate the combustor and compare reconstructions");
  c->add_option("--profile", comb.profile, "weak, intermediate or strong")
      ->check(CLI::IsMember({"weak", "intermediate", "strong"}))
      ->capture_default_str();
  c->add_option("--seed", comb.seed, "Noise seed (default from ODMD_SEED)");
  c->add_option("--out", comb.out, "Output directory")->required();
  c->add_option("--eta", comb.eta, "Penalty parameter")->capture_default_str();
  c->add_option("--rank", comb.rank, "Eigenvalues per segment")->capture_default_str();
  c->add_option("--j-max", comb.j_max, "Galerkin modes")->capture_default_str();
  c->add_option("--windows", comb.windows, "Number of segments")->capture_default_str();
  c->add_option("--t-end", comb.t_end, "Simulation horizon")->capture_default_str();
  c->add_option("--dt", comb.dt, "Integration step")->capture_default_str();
  c->add_option("--max-window-growth", comb.max_window_growth,
                "Bound on |Re alpha| times segment length; <= 0 disables")
      ->capture_default_str();
  c->add_option("--threads", comb.threads, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    err << e.what() << "\n";
    return kIoError;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParseError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  }

  const auto seed_given = [](const CLI::App* sub) { return sub->get_option("--seed")->count() > 0; };
  try {
    const CLI::App* active = app.get_subcommands().front();
    if (!seed_error.empty() && !seed_given(active)) throw InvalidInput(seed_error);
    if (active == g) return cmd_gen(gen, out);
    if (active == s) return cmd_solve(solve, out);
    if (active == w) return cmd_sweep(sweep, out);
    return cmd_combustor(comb, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const SimulationDiverged& e) {
    err << "error: " << e.what() << "\n";
    return kDiverged;
  } catch (const DegenerateSpectrum& e) {
    err << "error: " << e.what() << "\n";
    return kDegenerate;
  } catch (const SingularityError& e) {
    err << "error: " << e.what() << "\n";
    return kDegenerate;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  }
}

}  // namespace odmd::cli

#endif  // ODMD_CLI_HPP
