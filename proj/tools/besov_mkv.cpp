#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "acceptance.hpp"
#include "besov_mkv/besov.hpp"
#include "besov_mkv/errors.hpp"
#include "besov_mkv/fokker_planck.hpp"
#include "besov_mkv/io.hpp"
#include "besov_mkv/parallel.hpp"
#include "besov_mkv/particles.hpp"
#include "besov_mkv/pipeline.hpp"
#include "besov_mkv/stable_kernel.hpp"

using namespace besov_mkv;
namespace fs = std::filesystem;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kNumeric = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
};

double exponent_arg(const std::string& s) {
  if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
  return std::stod(s);
}

// "N,L"
Grid parse_grid(const std::string& s, int d) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw DomainError("--grid expects N,L");
  return Grid(d, std::stod(s.substr(comma + 1)), std::stoi(s.substr(0, comma)));
}

GridFunction load_mu(const std::string& arg, const Grid& grid) {
  const std::string prefix = "gaussian:";
  if (arg.rfind(prefix, 0) != 0) return read_grid_function(arg).field;
  MuSpec spec;
  spec.variance = std::stod(arg.substr(prefix.size()));
  if (!(spec.variance > 0.0)) throw DomainError("--mu: variance must be positive");
  return initial_density(spec, grid, {});
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

void emit(const Json& j, const std::string& out) {
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_json(out, j);
}

std::string require_out(const Globals& g, const char* cmd) {
  if (g.out.empty()) throw DomainError(std::string(cmd) + " needs --out");
  return g.out;
}

Regime regime_from_flags(bool longtime, bool classical) {
  if (longtime && classical) throw DomainError("--longtime and --classical are exclusive");
  return longtime ? Regime::long_time : classical ? Regime::classical : Regime::short_time;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Besov-space McKean-Vlasov experiments"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file or directory");

  // check
  auto* check = app.add_subcommand("check", "Evaluate condition sets on a parameter file");
  std::string params_file, conditions = "C3,MS,WS,C3LT,C2star";
  check->add_option("--params", params_file)->required()->check(CLI::ExistingFile);
  check->add_option("--conditions", conditions);

  // kernel
  auto* kernel = app.add_subcommand("kernel", "Dump the isotropic stable density");
  double k_alpha = 2.0, k_t = 0.1;
  std::string grid_arg;
  int dim = 1;
  kernel->add_option("--alpha", k_alpha)->required();
  kernel->add_option("--t", k_t)->required();
  kernel->add_option("--grid", grid_arg, "N,L")->required();
  kernel->add_option("--d", dim);

  // norm
  auto* norm = app.add_subcommand("norm", "Thermic Besov norm of a grid dump");
  std::string in_file, ell_arg = "inf", m_arg = "inf";
  double gamma = 0.0, n_alpha = 2.0;
  norm->add_option("--in", in_file)->required();
  norm->add_option("--gamma", gamma)->required();
  norm->add_option("--ell", ell_arg)->required();
  norm->add_option("--m", m_arg)->required();
  norm->add_option("--alpha", n_alpha, "Reference stable index");

  // synth
  auto* synth = app.add_subcommand("synth", "Synthesize a drift kernel");
  std::string kernel_spec_file, family = "random_fourier";
  double s_beta = -1.9, s_amp = 1.0, s_t0 = 0.0, s_S = 1.0;
  int s_slabs = 1;
  synth->add_option("--spec", kernel_spec_file, "Kernel spec JSON")->check(CLI::ExistingFile);
  synth->add_option("--family", family);
  synth->add_option("--beta", s_beta);
  synth->add_option("--amplitude", s_amp);
  synth->add_option("--slabs", s_slabs);
  synth->add_option("--grid", grid_arg, "N,L")->required();
  synth->add_option("--d", dim);
  synth->add_option("--t0", s_t0);
  synth->add_option("--S", s_S);

  // solve-fp, simulate, young share inputs
  std::string kernel_file, mu_file;
  double dt = 0.0, S = 0.0, t0 = 0.0, eps = 0.05;
  bool longtime = false, classical = false;
  std::size_t particles = 100000;
  std::string partition_steps = "16,8,4,2,1";
  auto add_run_inputs = [&](CLI::App* c) {
    c->add_option("--params", params_file)->required()->check(CLI::ExistingFile);
    c->add_option("--kernel", kernel_file)->required();
    c->add_option("--mu", mu_file, "Grid dump, or gaussian:<variance> on the kernel grid")->required();
    c->add_option("--dt", dt)->required();
    c->add_option("--S", S)->required();
    c->add_option("--t0", t0);
    c->add_option("--eps", eps)->required();
  };
  auto* solve = app.add_subcommand("solve-fp", "Solve the mollified Fokker-Planck equation");
  add_run_inputs(solve);
  solve->add_flag("--longtime", longtime);
  solve->add_flag("--classical", classical);

  auto* sim = app.add_subcommand("simulate", "Simulate the particle system");
  add_run_inputs(sim);
  sim->add_option("--N", particles);
  bool snapshots = false;
  sim->add_flag("--snapshots", snapshots, "Write position snapshots");

  auto* young = app.add_subcommand("young", "Young-integral reconstruction gaps");
  add_run_inputs(young);
  young->add_option("--N", particles);
  young->add_option("--steps", partition_steps, "Partition steps in time nodes, comma separated");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run the full experiment pipeline");
  std::string config_file;
  pipe->add_option("--config", config_file, "Experiment config or manifest")->required()->check(CLI::ExistingFile);

  // acceptance
  auto* acc = app.add_subcommand("acceptance", "Run an acceptance suite");
  std::string suite = "all";
  bool list = false;
  acc->add_option("--suite", suite);
  acc->add_flag("--list", list);

  for (auto* sub : {check, kernel, norm, synth, solve, sim, young, pipe, acc}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) g.seed = seed_value;
  set_thread_count(g.threads);

  try {
    if (*check) {
      ParameterSet ps = parameters_from_json(read_json(params_file));
      Json arr = Json::array();
      bool all = true;
      for (const auto& name : split(conditions, ',')) {
        auto r = check_condition(name, ps);
        all = all && r.satisfied;
        arr.push_back(to_json(r));
      }
      emit(arr, g.out);
      return all ? kPass : kFail;
    }
    if (*kernel) {
      Grid grid = parse_grid(grid_arg, dim);
      write_grid_function(fs::path(require_out(g, "kernel")).replace_extension(),
                          stable_density(k_alpha, k_t, grid), Json{{"time", k_t}, {"alpha", k_alpha}});
      return kPass;
    }
    if (*norm) {
      auto lg = read_grid_function(in_file);
      auto n = thermic_besov_norm(lg.field, {gamma, exponent_arg(ell_arg), exponent_arg(m_arg)}, n_alpha);
      emit(Json{{"low_freq", n.low_freq}, {"thermic", n.thermic}, {"total", n.total}, {"diverged", n.diverged}},
           g.out);
      return kPass;
    }
    if (*synth) {
      KernelSpec spec;
      if (!kernel_spec_file.empty()) {
        spec = kernel_spec_from_json(read_json(kernel_spec_file));
      } else {
        spec.family = parse_kernel_family(family);
        spec.beta = s_beta;
        spec.amplitude = s_amp;
        spec.slabs = s_slabs;
      }
      if (g.seed) spec.seed = *g.seed;
      spec.validate();
      Grid grid = parse_grid(grid_arg, dim);
      write_time_kernel(fs::path(require_out(g, "synth")).replace_extension(),
                        synthesize_time_kernel(spec, grid, s_t0, s_S), Json{{"spec", to_json(spec)}});
      return kPass;
    }
    if (*solve || *sim || *young) {
      ParameterSet ps = parameters_from_json(read_json(params_file));
      TimeKernel b = read_time_kernel(kernel_file);
      GridFunction mu = load_mu(mu_file, b.grid());
      const Regime mode = *solve ? regime_from_flags(longtime, classical) : Regime::short_time;
      SolverConfig cfg = solver_config(ps, mode);
      cfg.dt = dt;
      cfg.epsilon = eps;
      TimeKernel be = mollify(b, eps);
      DensityPath path = solve_in_mode(be, mu, t0, S, cfg, ps, mode);
      fs::path dir = require_out(g, "run");
      const std::uint64_t seed = g.seed.value_or(7);
      if (*solve) {
        auto fit = gronwall_envelope(path, ps, mode, initial_data_norm(mu, ps), kernel_norm(be, ps));
        export_fp_run(dir, path, be, cfg, &fit);
        write_json(dir / "summary.json", Json{{"iterations", path.iterations},
                                              {"residual", path.residual},
                                              {"picard_distances", path.picard_distances},
                                              {"C_cal", exponent_to_json(fit.C_cal)},
                                              {"horizon", exponent_to_json(fit.horizon)},
                                              {"envelope_holds", envelope_holds(fit)}});
        return kPass;
      }
      Trajectory traj = simulate(be, mu, ps.alpha, t0, S, particles, dt, seed);
      if (*sim) {
        const double bw = SimulationOptions{}.bandwidth_cells * mu.grid().spacing();
        auto sm = summarize_trajectory(traj, path, bw);
        write_csv(dir / "moments.csv", {"s", "mean", "var", "l1_to_fp"}, {sm.s, sm.mean, sm.var, sm.l1_to_fp});
        if (snapshots)
          for (std::size_t k = 0; k < traj.times.size(); ++k)
            write_grid_function(dir / "snapshots" / ("kde" + std::to_string(k)),
                                empirical_density(traj.positions[k], mu.grid().d, mu.grid(), bw),
                                Json{{"time", traj.times[k]}, {"role", "kde"}});
        write_json(dir / "summary.json", Json{{"particles", particles}, {"seed", seed}, {"wraps", traj.wraps}});
        return kPass;
      }
      std::vector<double> steps, gaps;
      for (const auto& st : split(partition_steps, ',')) {
        int k = std::stoi(st);
        std::vector<double> part;
        for (std::size_t j = 0; j < traj.times.size(); j += static_cast<std::size_t>(k)) part.push_back(traj.times[j]);
        steps.push_back(k);
        gaps.push_back(young_reconstruction(be, path, traj, part).gap);
      }
      write_csv(dir / "young.csv", {"partition_step", "gap"}, {steps, gaps});
      return kPass;
    }
    if (*pipe) {
      Json cfg_json = read_json(config_file);
      ExperimentConfig c = config_from_json(cfg_json, fs::path(config_file).parent_path());
      if (g.seed) c.seed = *g.seed;
      auto res = run_pipeline(c, require_out(g, "pipeline"));
      std::cout << "wrote " << res.manifest["outputs"].size() << " files to " << res.dir.string() << "\n";
      return kPass;
    }
    if (*acc) {
      if (list) {
        for (const auto& name : acceptance::suite_names()) {
          std::cout << name << ":";
          for (int id : acceptance::suite_members(name)) std::cout << " " << id;
          std::cout << "\n";
        }
        return kPass;
      }
      auto results = acceptance::run_suite(suite, &std::cout);
      if (!g.out.empty()) write_json(g.out, acceptance::to_json(results));
      for (const auto& r : results)
        if (!r.pass) return kFail;
      return kPass;
    }
  } catch (const StageError& e) {
    std::cerr << "stage " << e.stage << " failed: " << e.what() << "\n";
    return e.numeric ? kNumeric : kFail;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const RefinementError& e) {
    std::cerr << "numeric error: " << e.what() << " (suggested N=" << e.suggested_N << ")\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kFail;
}
