#include "besov_mkv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "besov_mkv/errors.hpp"
#include "besov_mkv/particles.hpp"

namespace besov_mkv {

namespace fs = std::filesystem;

Regime parse_regime(const std::string& name) {
  if (name == "short" || name == "short_time") return Regime::short_time;
  if (name == "long" || name == "long_time") return Regime::long_time;
  if (name == "classical") return Regime::classical;
  throw DomainError("unknown mode: " + name);
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::short_time: return "short";
    case Regime::long_time: return "long";
    case Regime::classical: return "classical";
  }
  return "short";
}

ExperimentConfig config_from_json(const Json& jin, const fs::path& base_dir) {
  const Json& j = jin.contains("config") ? jin.at("config") : jin;
  ExperimentConfig c;
  c.base_dir = base_dir;
  if (j.contains("params")) {
    c.params = parameters_from_json(j.at("params"));
  } else if (j.contains("params_file")) {
    c.params_file = j.at("params_file").get<std::string>();
    fs::path p = c.params_file;
    if (p.is_relative()) p = base_dir / p;
    if (!fs::exists(p)) throw DomainError("params file not found: " + p.string());
    c.params = parameters_from_json(read_json(p));
  } else {
    throw DomainError("config needs params or params_file");
  }
  if (j.contains("params_file")) c.params_file = j.at("params_file").get<std::string>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("kernel")) {
    Json k = j.at("kernel");
    if (!k.contains("seed")) k["seed"] = c.seed;
    c.kernel = kernel_spec_from_json(k);
  }
  if (j.contains("mu")) {
    const Json& m = j.at("mu");
    c.mu.type = m.value("type", std::string("gaussian"));
    c.mu.variance = m.value("variance", c.mu.variance);
    c.mu.file = m.value("file", std::string());
    if (c.mu.type == "file") {
      fs::path p = c.mu.file;
      if (p.is_relative()) p = base_dir / p;
      fs::path bin = p;
      if (bin.extension() != ".bin") bin += ".bin";
      if (!fs::exists(bin)) throw DomainError("mu file not found: " + bin.string());
      c.mu.file = fs::weakly_canonical(p).string();
    } else if (c.mu.type != "gaussian") {
      throw DomainError("mu type must be gaussian or file");
    }
  }
  if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
  if (c.grid.d != c.params.d) throw DomainError("grid dimension differs from params d");
  c.solver.alpha = c.params.alpha;
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    c.solver.dt = s.value("dt", c.solver.dt);
    c.solver.picard_tol = s.value("picard_tol", c.solver.picard_tol);
    c.solver.picard_max = s.value("picard_max", c.solver.picard_max);
    c.solver.mass_tol = s.value("mass_tol", c.solver.mass_tol);
    c.t0 = s.value("t0", c.t0);
    c.S = s.value("S", c.S);
    if (s.contains("epsilons")) c.epsilons = s.at("epsilons").get<std::vector<double>>();
  }
  if (c.epsilons.empty()) throw DomainError("solver.epsilons must not be empty");
  if (j.contains("mode")) c.mode = parse_regime(j.at("mode").get<std::string>());
  if (j.contains("particles")) {
    const Json& p = j.at("particles");
    c.particles = p.value("N", std::size_t{0});
    c.particle_dt = p.value("dt", 0.0);
  }
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  if (!c.params_file.empty()) j["params_file"] = c.params_file;
  j["params"] = to_json(c.params);
  j["kernel"] = to_json(c.kernel);
  Json mu{{"type", c.mu.type}};
  if (c.mu.type == "file")
    mu["file"] = c.mu.file;
  else
    mu["variance"] = c.mu.variance;
  j["mu"] = mu;
  j["grid"] = to_json(c.grid);
  j["solver"] = Json{{"dt", c.solver.dt},
                     {"t0", c.t0},
                     {"S", c.S},
                     {"epsilons", c.epsilons},
                     {"picard_tol", c.solver.picard_tol},
                     {"picard_max", c.solver.picard_max},
                     {"mass_tol", c.solver.mass_tol}};
  j["mode"] = to_string(c.mode);
  j["particles"] = Json{{"N", c.particles}, {"dt", c.particle_dt}};
  j["seed"] = c.seed;
  return j;
}

Json to_json(const ConditionReport& r) {
  return Json{{"condition", r.condition_name},
              {"satisfied", r.satisfied},
              {"margin", exponent_to_json(r.margin)},
              {"violated_clauses", r.violated_clauses}};
}

CheckBundle run_check(const ParameterSet& ps, Regime mode) {
  CheckBundle b;
  std::vector<std::string> required;
  switch (mode) {
    case Regime::short_time: required = {"C3", "MS"}; break;
    case Regime::long_time: required = {"C3", "C3LT", "WS"}; break;
    case Regime::classical: required = {"C2star"}; break;
  }
  b.feasible = true;
  Json reports = Json::array();
  for (const char* name : {"C3", "MS", "WS", "C3LT", "C2star"}) {
    ConditionReport r = check_condition(name, ps);
    bool req = std::find(required.begin(), required.end(), name) != required.end();
    if (req && !r.satisfied) b.feasible = false;
    Json jr = to_json(r);
    jr["required"] = req;
    reports.push_back(jr);
    b.reports.push_back(std::move(r));
  }
  b.json["mode"] = to_string(mode);
  b.json["feasible"] = b.feasible;
  b.json["reports"] = reports;
  auto ti = feasible_theta_interval(ps);
  if (ti) {
    Json t{{"lo", ti->interval.lo},
           {"hi", ti->interval.hi},
           {"lo_closed", ti->interval.lo_closed},
           {"hi_closed", ti->interval.hi_closed}};
    t["excluded"] = ti->excluded ? Json(*ti->excluded) : Json(nullptr);
    b.json["theta_interval"] = t;
  } else {
    b.json["theta_interval"] = nullptr;
  }
  auto dq = gamma_exponents(ps);
  b.json["derived"] = Json{{"zeta0", exponent_to_json(dq.zeta0)},
                           {"beta0_bar", exponent_to_json(dq.beta0_bar)},
                           {"gamma", exponent_to_json(dq.gamma)},
                           {"gamma1", exponent_to_json(dq.gamma1)},
                           {"gamma2", exponent_to_json(dq.gamma2)},
                           {"Gamma", exponent_to_json(dq.Gamma_cl)},
                           {"gamma_star", exponent_to_json(dq.gamma_star)},
                           {"drift_exponent", exponent_to_json(dq.drift_exponent)},
                           {"horizon_denominator", exponent_to_json(dq.horizon_denominator)},
                           {"flags", dq.flags}};
  // Horizon at unit constants; the calibrated value is reported by the envelope stage.
  b.json["horizon_unit_constants"] =
      dq.horizon_denominator < 0.0 ? Json(time_horizon(1.0, 1.0, dq.horizon_denominator)) : Json(nullptr);
  return b;
}

GridFunction initial_density(const MuSpec& mu, const Grid& grid, const fs::path& base_dir) {
  if (mu.type == "file") {
    fs::path p = mu.file;
    if (p.is_relative()) p = base_dir / p;
    auto lg = read_grid_function(p);
    if (!(lg.field.grid() == grid)) throw DomainError("mu grid differs from config grid");
    return lg.field;
  }
  const double v = mu.variance;
  if (!(v > 0.0)) throw DomainError("mu variance must be positive");
  const int d = grid.d;
  GridFunction f = GridFunction::sample(grid, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return std::exp(-0.5 * r2 / v) / std::pow(2.0 * M_PI * v, 0.5 * d);
  });
  f *= 1.0 / f.integral();
  return f;
}

DensityPath solve_in_mode(const TimeKernel& b_eps, const GridFunction& mu, double t0, double S,
                          const SolverConfig& cfg, const ParameterSet& ps, Regime mode) {
  switch (mode) {
    case Regime::short_time: return solve_mollified_fp(b_eps, mu, t0, S, cfg);
    case Regime::long_time: {
      DensityPath probe = solve_mollified_fp(b_eps, mu, t0, S, cfg);
      const double mn = initial_data_norm(mu, ps), bn = kernel_norm(b_eps, ps);
      auto fit = gronwall_envelope(probe, ps, mode, mn, bn);
      return solve_fp_longtime(b_eps, mu, t0, S, cfg, ps, long_time_gate(ps, fit.C_cal, mn, bn)).path;
    }
    case Regime::classical: return solve_fp_classical(b_eps, mu, t0, S, cfg, ps).path;
  }
  throw DomainError("unknown regime");
}

void export_fp_run(const fs::path& dir, const DensityPath& path, const TimeKernel& b_eps, const SolverConfig& cfg,
                   const GronwallFit* fit) {
  PathReport r = path_report(path, b_eps, cfg, fit);
  write_csv(dir / "norms.csv", {"s", "mass", "besov_norm", "weighted_norm", "envelope", "residual"},
            {r.s, r.mass, r.besov_norm, r.weighted_norm, r.envelope, r.residual});
  write_grid_function(dir / "terminal", path.frames.back(),
                      Json{{"time", path.times.back()}, {"epsilon", cfg.epsilon}, {"role", "density"}});
}

namespace {

template <class F>
auto stage(const std::string& name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const NumericError& e) {
    throw StageError(name, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), false);
  }
}

std::string eps_tag(std::size_t i) { return "eps" + std::to_string(i); }

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& c, const fs::path& out_dir) {
  PipelineResult res;
  res.dir = out_dir;
  fs::create_directories(out_dir);
  const ParameterSet& ps = c.params;
  const Grid& g = c.grid;

  auto check = stage("check", [&] { return run_check(ps, c.mode); });
  write_json(out_dir / "check.json", check.json);
  if (!check.feasible) throw StageError("check", "parameter set infeasible for mode " + to_string(c.mode), false);

  GridFunction mu = stage("check", [&] { return initial_density(c.mu, g, c.base_dir); });

  TimeKernel b = stage("synthesize", [&] {
    TimeKernel k = synthesize_time_kernel(c.kernel, g, c.t0, c.S);
    write_time_kernel(out_dir / "kernel", k, Json{{"spec", to_json(c.kernel)}});
    return k;
  });

  std::vector<TimeKernel> ladder = stage("mollify", [&] {
    std::vector<TimeKernel> out;
    Json lj = Json::array();
    for (double e : c.epsilons) {
      out.push_back(mollify(b, e));
      lj.push_back(Json{{"epsilon", e}, {"resolved", mollifier_resolved(g, e)}});
    }
    write_json(out_dir / "mollifier.json", lj);
    return out;
  });

  const SolverConfig cfg = solver_config(ps, c.mode, c.solver);
  const double mu_norm = stage("solve-fp", [&] { return initial_data_norm(mu, ps); });

  std::vector<DensityPath> paths = stage("solve-fp", [&] {
    std::vector<DensityPath> out;
    for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
      SolverConfig ci = cfg;
      ci.epsilon = c.epsilons[i];
      out.push_back(solve_in_mode(ladder[i], mu, c.t0, c.S, ci, ps, c.mode));
    }
    return out;
  });

  stage("cauchy", [&] {
    CauchyTable t = cauchy_table(paths, c.epsilons, ps.alpha);
    std::vector<double> eps(c.epsilons.begin() + 1, c.epsilons.end());
    write_csv(out_dir / "cauchy.csv", {"epsilon", "besov_diff", "l1_diff"}, {eps, t.besov_diff, t.l1_diff});
    return 0;
  });

  const double b_norm = stage("envelope", [&] { return kernel_norm(ladder.back(), ps); });
  GronwallFit fit = stage("envelope", [&] {
    GronwallFit f = gronwall_envelope(paths.back(), ps, c.mode, mu_norm, b_norm);
    Json ej{{"C_cal", exponent_to_json(f.C_cal)},
            {"mu_norm", mu_norm},
            {"b_norm", b_norm},
            {"horizon", exponent_to_json(f.horizon)},
            {"finite_constant", f.finite_constant},
            {"holds", envelope_holds(f)}};
    write_json(out_dir / "envelope.json", ej);
    return f;
  });

  stage("solve-fp", [&] {
    for (std::size_t i = 0; i < paths.size(); ++i) {
      SolverConfig ci = cfg;
      ci.epsilon = c.epsilons[i];
      GronwallFit fi = gronwall_envelope(paths[i], ps, c.mode, mu_norm, kernel_norm(ladder[i], ps), fit.C_cal);
      export_fp_run(out_dir / "fp" / eps_tag(i), paths[i], ladder[i], ci, &fi);
    }
    return 0;
  });

  if (c.particles > 0) {
    const double pdt = c.particle_dt > 0.0 ? c.particle_dt : cfg.dt;
    Trajectory traj = stage("simulate", [&] {
      return simulate(ladder.back(), mu, ps.alpha, c.t0, c.S, c.particles, pdt, c.seed);
    });
    stage("compare", [&] {
      const double bw = SimulationOptions{}.bandwidth_cells * g.spacing();
      TrajectorySummary sm = summarize_trajectory(traj, paths.back(), bw);
      write_csv(out_dir / "particles" / "moments.csv", {"s", "mean", "var", "l1_to_fp"},
                {sm.s, sm.mean, sm.var, sm.l1_to_fp});
      write_grid_function(out_dir / "particles" / "terminal_kde",
                          empirical_density(traj.positions.back(), g.d, g, bw),
                          Json{{"time", traj.times.back()}, {"role", "kde"}, {"particles", c.particles}});
      double terminal = sm.l1_to_fp.empty() ? std::numeric_limits<double>::quiet_NaN() : sm.l1_to_fp.back();
      write_json(out_dir / "particles" / "compare.json",
                 Json{{"terminal_l1", std::isnan(terminal) ? Json(nullptr) : Json(terminal)},
                      {"wraps", traj.wraps},
                      {"bandwidth", bw}});
      return 0;
    });
  }

  Json manifest;
  manifest["config"] = to_json(c);
  Json inputs = Json::object();
  inputs["config"] = sha256_hex(manifest["config"].dump());
  if (c.mu.type == "file") {
    fs::path bin = c.mu.file;
    if (bin.extension() != ".bin") bin += ".bin";
    inputs["mu"] = sha256_file(bin);
  }
  if (!c.params_file.empty()) {
    fs::path p = c.params_file;
    if (p.is_relative()) p = c.base_dir / p;
    if (fs::exists(p)) inputs["params_file"] = sha256_file(p);
  }
  manifest["inputs"] = inputs;
  std::map<std::string, std::string> outputs;
  for (const auto& e : fs::recursive_directory_iterator(out_dir)) {
    if (!e.is_regular_file()) continue;
    std::string rel = fs::relative(e.path(), out_dir).generic_string();
    if (rel == "manifest.json") continue;
    outputs[rel] = sha256_file(e.path());
  }
  Json oj = Json::object();
  for (const auto& [k, v] : outputs) oj[k] = v;
  manifest["outputs"] = oj;
  write_json(out_dir / "manifest.json", manifest);
  res.manifest = manifest;
  return res;
}

}  // namespace besov_mkv
