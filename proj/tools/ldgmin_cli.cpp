// Command-line driver for the L-shape benchmarks.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ldgmin/adapt.hpp"
#include "ldgmin/bench.hpp"
#include "ldgmin/errors.hpp"
#include "ldgmin/femspace.hpp"
#include "ldgmin/mesh.hpp"

namespace fs = std::filesystem;
using namespace ldgmin;

namespace {

constexpr int kExitSolver = 1;
constexpr int kExitUsage = 2;

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Exclusive lock on an output directory, released on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".ldgmin.lock") {
    file_ = std::fopen(path_.c_str(), "wx");
  }
  ~DirectoryLock() {
    if (file_) {
      std::fclose(file_);
      std::error_code ec;
      fs::remove(path_, ec);
    }
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;
  bool held() const { return file_ != nullptr; }

 private:
  fs::path path_;
  std::FILE* file_ = nullptr;
};

void dump_mesh(const fs::path& file, const LevelData& level) {
  std::ofstream out(file);
  write_mesh(level.mesh, out);
  out << "cellfield grad_vc " << level.mesh.num_cells() << '\n';
  char buf[64];
  for (int t = 0; t < level.mesh.num_cells(); ++t) {
    const Vec2 g = evaluate_gradient(level.mesh, level.conforming, t, level.mesh.centroid(t));
    std::snprintf(buf, sizeof buf, "%.17g\n", g.norm());
    out << buf;
  }
}

struct RunOptions {
  std::string benchmark = "odp";
  int k = 1;
  double r = 2.0;
  double s = 1.0;
  double epsilon = 1e-5;
  double theta = 0.5;
  std::string mode = "adaptive";
  int levels = 10;
  long ndof_budget = 0;
  std::string out = "ldgmin-out";
  bool dump_mesh = false;
  bool plot = false;
  bool deterministic = false;
};

int run(const RunOptions& opt, bool epsilon_given) {
  RunManifest manifest;
  manifest.benchmark = opt.benchmark;
  manifest.k = opt.k;
  manifest.r = opt.r;
  manifest.s = opt.s;
  manifest.epsilon = opt.epsilon;
  manifest.theta = opt.theta;
  manifest.mode = opt.mode;
  manifest.levels = opt.levels;
  manifest.ndof_budget = opt.ndof_budget;
  manifest.deterministic = opt.deterministic;
  manifest.version = library_version();
  manifest.timestamp = utc_timestamp();

  BenchmarkSpec spec;
  AdaptConfig adapt;
  ProblemConfig problem;
  try {
    spec = manifest.spec();
    if (epsilon_given && spec.id != BenchmarkId::Bingham) {
      throw ConfigError("--epsilon only applies to the bingham benchmark");
    }
    adapt = manifest.adapt();
    adapt.validate();
    problem = spec.problem();
    problem.validate();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const fs::path dir(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    std::cerr << "error: cannot create " << dir << ": " << ec.message() << '\n';
    return kExitUsage;
  }
  DirectoryLock lock(dir);
  if (!lock.held()) {
    std::cerr << "error: output directory " << dir << " is locked by another run\n";
    return kExitSolver;
  }
  std::ofstream(dir / "manifest.json") << manifest.to_json();

  std::vector<ConvergenceRecord> history;
  const LevelObserver observer = [&](const LevelData& level) {
    history.push_back(level.record);
    const ConvergenceRecord& r = level.record;
    std::fprintf(stderr, "level %d  ndof %d  eta %.6e  gap %.3e  iters %d%s\n", r.level, r.ndof, r.eta, r.gap,
                 r.iterations, r.converged ? "" : "  (not converged)");
    if (opt.dump_mesh) dump_mesh(dir / ("mesh_" + std::to_string(r.level) + ".txt"), level);
  };

  int status = 0;
  try {
    run_loop(problem, adapt, initial_lshape(problem.boundary), observer);
    if (history.empty() || !history.back().converged) status = kExitSolver;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    status = kExitSolver;
  }

  std::ofstream csv(dir / "history.csv");
  write_history_csv(csv, history, opt.deterministic);
  if (opt.plot) {
    PlotSeries series{opt.benchmark + " k=" + std::to_string(opt.k), {}, {}};
    for (const ConvergenceRecord& r : history) {
      series.ndof.push_back(r.ndof);
      series.eta.push_back(r.eta);
    }
    std::ofstream svg(dir / "convergence.svg");
    write_convergence_svg(svg, {series}, opt.k);
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LDG energy minimization benchmarks on the L-shaped domain"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());

  RunOptions opt;
  CLI::App* run_cmd = app.add_subcommand("run", "Run the adaptive or uniform refinement loop");
  // Run options live on the root app so that the config file, which CLI11 only
  // reads there, can set them; the subcommand passes them through.
  run_cmd->fallthrough();
  run_cmd->footer("Run options (--benchmark, --k, --mode, ...) are listed by `ldgmin --help`.");
  app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
  CLI::Option_group* run_opts = app.add_option_group("run", "Options of the run subcommand");
  run_opts->add_option("--benchmark", opt.benchmark, "odp, plaplace4 or bingham")
      ->check(CLI::IsMember({"odp", "plaplace4", "bingham"}));
  run_opts->add_option("--k", opt.k, "Polynomial degree")->check(CLI::PositiveNumber);
  run_opts->add_option("--r", opt.r, "Stabilization exponent (1 < r)");
  run_opts->add_option("--s", opt.s, "Stabilization power of the face diameter");
  CLI::Option* eps = run_opts->add_option("--epsilon", opt.epsilon, "Bingham regularization")->check(CLI::NonNegativeNumber);
  run_opts->add_option("--theta", opt.theta, "Doerfler marking fraction in (0, 1]");
  run_opts->add_option("--mode", opt.mode, "uniform or adaptive")->check(CLI::IsMember({"uniform", "adaptive"}));
  run_opts->add_option("--levels", opt.levels, "Number of levels to record (0 records the initial mesh only)")
      ->check(CLI::NonNegativeNumber);
  run_opts->add_option("--ndof-budget", opt.ndof_budget, "Stop once ndof reaches this value (0: none)")
      ->check(CLI::NonNegativeNumber);
  run_opts->add_option("--out", opt.out, "Output directory");
  run_opts->add_flag("--dump-mesh", opt.dump_mesh, "Write mesh_<level>.txt with |grad v_C| per cell");
  run_opts->add_flag("--plot", opt.plot, "Write convergence.svg");
  run_opts->add_flag("--deterministic", opt.deterministic, "Write 0 in the seconds column");

  std::string which = "odp";
  CLI::App* defaults_cmd = app.add_subcommand("defaults", "Print the default manifest of a benchmark");
  defaults_cmd->add_option("benchmark", which, "odp, plaplace4 or bingham")
      ->required()
      ->check(CLI::IsMember({"odp", "plaplace4", "bingham"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (*defaults_cmd) {
    RunManifest m;
    m.benchmark = which;
    m.version = library_version();
    std::cout << m.to_json();
    const BenchmarkSpec spec = defaults(parse_benchmark(which));
    switch (spec.id) {
      case BenchmarkId::OptimalDesign:
        std::printf("mu1=%.17g mu2=%.17g lambda=%.17g t1=%.17g t2=%.17g\n", spec.design.mu1, spec.design.mu2,
                    spec.design.lambda, spec.design.t1(), spec.design.t2());
        break;
      case BenchmarkId::PLaplace4:
        std::printf("p=%.17g\n", spec.p);
        break;
      case BenchmarkId::Bingham:
        std::printf("mu=%.17g g=%.17g epsilon=%.17g\n", spec.mu, spec.g, spec.epsilon);
        break;
    }
    return 0;
  }
  return run(opt, eps->count() > 0);
}
