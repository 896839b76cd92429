// Acceptance checks: one PASS/FAIL line per criterion. With arguments, only
// the listed criteria run.

#include <algorithm>
#include <array>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ldgmin/adapt.hpp"
#include "ldgmin/bench.hpp"
#include "ldgmin/duality.hpp"
#include "ldgmin/postprocess.hpp"
#include "ldgmin/solver.hpp"

using namespace ldgmin;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
const BenchmarkId kBenchmarks[] = {BenchmarkId::OptimalDesign, BenchmarkId::PLaplace4, BenchmarkId::Bingham};
constexpr double kBinghamEpsilons[] = {1e-3, 1e-4, 1e-5};
constexpr long kAdaptiveBudget = 30000;
constexpr long kPlateauBudget = 100000;

std::mt19937_64 rng(977);
double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

ProblemConfig benchmark(BenchmarkId id, int k, double epsilon = -1.0) {
  BenchmarkSpec spec = defaults(id);
  spec.k = k;
  if (epsilon > 0.0) spec.epsilon = epsilon;
  return spec.problem();
}

struct Run {
  std::string label;
  std::vector<ConvergenceRecord> history;
};

// Histories are computed once and shared by the criteria that read them.
std::map<std::string, Run> run_cache;

const Run& cached_run(const std::string& label, const std::function<std::vector<ConvergenceRecord>()>& compute) {
  auto it = run_cache.find(label);
  if (it == run_cache.end()) {
    std::fprintf(stderr, "  computing %s\n", label.c_str());
    it = run_cache.emplace(label, Run{label, compute()}).first;
  }
  return it->second;
}

std::vector<const Run*> uniform_runs() {
  std::vector<const Run*> out;
  for (BenchmarkId id : kBenchmarks) {
    for (int k = 1; k <= 2; ++k) {
      out.push_back(&cached_run(fmt("%s k=%d uniform 4 levels", benchmark_name(id).c_str(), k), [=] {
        AdaptConfig adapt;
        adapt.mode = RefinementMode::Uniform;
        adapt.max_levels = 4;
        return run_loop(benchmark(id, k), adapt);
      }));
    }
  }
  return out;
}

std::vector<const Run*> rate_runs() {
  std::vector<const Run*> out;
  for (BenchmarkId id : {BenchmarkId::OptimalDesign, BenchmarkId::PLaplace4}) {
    out.push_back(&cached_run(fmt("%s k=2 uniform 6 levels", benchmark_name(id).c_str()), [=] {
      AdaptConfig adapt;
      adapt.mode = RefinementMode::Uniform;
      adapt.max_levels = 6;
      return run_loop(benchmark(id, 2), adapt);
    }));
  }
  return out;
}

std::vector<const Run*> adaptive_runs() {
  std::vector<const Run*> out;
  for (int k = 1; k <= 2; ++k) {
    out.push_back(&cached_run(fmt("plaplace4 k=%d adaptive to ndof %ld", k, kAdaptiveBudget), [=] {
      AdaptConfig adapt;
      adapt.max_levels = 1000;
      adapt.ndof_budget = kAdaptiveBudget;
      return run_loop(benchmark(BenchmarkId::PLaplace4, k), adapt);
    }));
  }
  return out;
}

std::vector<const Run*> plateau_runs() {
  std::vector<const Run*> out;
  for (double eps : kBinghamEpsilons) {
    out.push_back(&cached_run(fmt("bingham eps=%g k=2 adaptive to ndof %ld", eps, kPlateauBudget), [=] {
      AdaptConfig adapt;
      adapt.max_levels = 1000;
      adapt.ndof_budget = kPlateauBudget;
      return run_loop(benchmark(BenchmarkId::Bingham, 2, eps), adapt);
    }));
  }
  out.push_back(&cached_run("bingham k=1 uniform 6 levels", [] {
    AdaptConfig adapt;
    adapt.mode = RefinementMode::Uniform;
    adapt.max_levels = 6;
    return run_loop(benchmark(BenchmarkId::Bingham, 1), adapt);
  }));
  return out;
}

std::vector<const Run*> all_runs() {
  std::vector<const Run*> out;
  for (auto group : {uniform_runs(), rate_runs(), adaptive_runs(), plateau_runs()}) out.insert(out.end(), group.begin(), group.end());
  return out;
}

std::vector<double> column(const std::vector<ConvergenceRecord>& h, double ConvergenceRecord::*field) {
  std::vector<double> v;
  for (const ConvergenceRecord& r : h) v.push_back(r.*field);
  return v;
}

std::vector<double> ndofs(const std::vector<ConvergenceRecord>& h) {
  std::vector<double> v;
  for (const ConvergenceRecord& r : h) v.push_back(r.ndof);
  return v;
}

// ---------------------------------------------------------------------------

Outcome strong_duality() {
  double worst = 0.0;
  int levels = 0, unconverged = 0;
  for (const Run* run : uniform_runs()) {
    for (const ConvergenceRecord& r : run->history) {
      ++levels;
      if (!r.converged) {
        ++unconverged;
        continue;
      }
      worst = std::max(worst, std::abs(r.gap) / (1.0 + std::abs(r.energy)));
    }
  }
  return {levels == 24 && unconverged == 0 && worst <= 1e-8,
          fmt("max |E_h - E*_h| / (1 + |E_h|) = %.2e over %d levels, %d unconverged", worst, levels, unconverged)};
}

Outcome stabilization_identity() {
  double worst = 0.0;
  int levels = 0;
  for (const Run* run : uniform_runs()) {
    for (const ConvergenceRecord& r : run->history) {
      if (!r.converged) continue;
      ++levels;
      worst = std::max(worst, std::abs(r.gamma - r.stabilization) / std::max(r.stabilization, 1e-300));
    }
  }
  return {levels == 24 && worst <= 1e-10, fmt("max |gamma_h - s_h| / s_h = %.2e over %d minimizers", worst, levels)};
}

Outcome divergence_consistency() {
  double worst = 0.0;
  int fields = 0;
  for (int k = 1; k <= 2; ++k) {
    Mesh mesh = initial_lshape(BoundarySpec::all_dirichlet());
    for (int level = 0; level < 2; ++level) {
      const DiscreteGradientOperator op = assemble_gradient(mesh, k);
      for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::array<double, 4>> terms;
        for (int i = 0; i <= k + 1; ++i)
          for (int j = 0; i + j <= k + 1; ++j) terms.push_back({double(i), double(j), uniform(-1, 1), uniform(-1, 1)});
        const VectorField q = [terms](const Vec2& x) {
          Vec2 v = Vec2::Zero();
          for (const auto& t : terms) v += std::pow(x.x(), t[0]) * std::pow(x.y(), t[1]) * Vec2(t[2], t[3]);
          return v;
        };
        const ScalarField div_q = [terms](const Vec2& x) {
          double d = 0.0;
          for (const auto& t : terms) {
            if (t[0] > 0) d += t[2] * t[0] * std::pow(x.x(), t[0] - 1) * std::pow(x.y(), t[1]);
            if (t[1] > 0) d += t[3] * t[1] * std::pow(x.x(), t[0]) * std::pow(x.y(), t[1] - 1);
          }
          return d;
        };
        const DgFunction div_h = div_reconstruct(mesh, op, interp_dual(mesh, k, q));
        const DgFunction expected = project(div_q, mesh, k, 2 * k + 2);
        worst = std::max(worst, (div_h.coeffs - expected.coeffs).lpNorm<Eigen::Infinity>());
        ++fields;
      }
      mesh = refine_uniform(mesh);
    }
  }
  return {worst <= 1e-11, fmt("max coefficient error %.2e over %d fields (k = 1, 2; two meshes)", worst, fields)};
}

Outcome post_processing() {
  double residual = 0.0, mismatch = 0.0;
  int levels = 0;
  for (const Run* run : all_runs()) {
    for (const ConvergenceRecord& r : run->history) {
      ++levels;
      residual = std::max(residual, r.divergence_residual);
      mismatch = std::max(mismatch, r.normal_mismatch);
    }
  }
  return {residual <= 1e-9 && mismatch <= 1e-10,
          fmt("max |div sigma_RT + f_h|_K = %.2e, max normal jump %.2e over %d solves", residual, mismatch, levels)};
}

Outcome estimator_nonnegativity() {
  double worst = INFINITY;
  int levels = 0;
  for (const Run* run : all_runs()) {
    for (const ConvergenceRecord& r : run->history) {
      ++levels;
      worst = std::min(worst, r.min_indicator_ratio);
    }
  }
  return {worst >= -1e-12, fmt("min eta(K) / (1 + eta) = %.2e over %d levels", worst, levels)};
}

Outcome derivatives() {
  double grad_err = 0.0, hess_err = 0.0;
  for (BenchmarkId id : kBenchmarks) {
    const ProblemConfig cfg = benchmark(id, 2);
    Mesh mesh = refine_uniform(initial_lshape(cfg.boundary));
    const LdgSystem sys(mesh, cfg);
    for (int point = 0; point < 20; ++point) {
      const double scale = uniform(0.05, 0.5);
      Eigen::VectorXd u(sys.ndof());
      for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = scale * uniform(-1, 1);
      const Eigen::VectorXd g = sys.gradient(u);
      const double h = 1e-6;
      Eigen::VectorXd fd(u.size());
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(u.size());
        e(i) = h;
        fd(i) = (sys.energy(u + e) - sys.energy(u - e)) / (2 * h);
      }
      grad_err = std::max(grad_err, (fd - g).norm() / g.norm());
      Eigen::VectorXd dir(u.size());
      for (Eigen::Index i = 0; i < u.size(); ++i) dir(i) = uniform(-1, 1);
      const Eigen::VectorXd hv = sys.hessian(u) * dir;
      const Eigen::VectorXd fdv = (sys.gradient(u + h * dir) - sys.gradient(u - h * dir)) / (2 * h);
      hess_err = std::max(hess_err, (fdv - hv).norm() / hv.norm());
    }
  }
  return {grad_err <= 1e-6 && hess_err <= 1e-4,
          fmt("max relative error: gradient %.2e, Hessian-vector %.2e (60 points)", grad_err, hess_err)};
}

Outcome smooth_rates() {
  const ScalarField exact = [](const Vec2& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); };
  bool pass = true;
  std::string detail;
  for (int k = 1; k <= 2; ++k) {
    ProblemConfig cfg;
    cfg.density = p_laplace(2.0);
    cfg.degree = k;
    cfg.load = [exact](const Vec2& x) { return 2 * kPi * kPi * exact(x); };
    Mesh mesh = initial_unit_square(BoundarySpec::all_dirichlet());
    std::vector<double> h, gap;
    for (int level = 0; level < 4; ++level) {
      const LdgSystem sys(mesh, cfg);
      const SolveResult res = minimize(sys, DgFunction(k, mesh.num_cells()));
      const DgFunction interp = project(exact, mesh, k, 2 * k + 8);
      h.push_back(mesh.h_max());
      gap.push_back(sys.energy(interp.coeffs) - res.report.energy);
      mesh = refine_uniform(mesh);
    }
    bool positive = true;
    for (double g : gap) positive = positive && g > 0.0;
    const double slope = positive ? loglog_slope(h, gap) : NAN;
    pass = pass && positive && slope >= 2 * k - 0.25;
    detail += fmt("%sk = %d: slope %.3f (need >= %.2f), final gap %.2e", k == 1 ? "" : "; ", k, slope, 2 * k - 0.25,
                  gap.back());
  }
  return {pass, detail};
}

Outcome uniform_rates() {
  bool pass = true;
  std::string detail;
  for (const Run* run : rate_runs()) {
    const std::vector<double> h = column(run->history, &ConvergenceRecord::h_max);
    const std::vector<double> eta = column(run->history, &ConvergenceRecord::eta);
    const double slope_h = loglog_slope(h, eta, 4);
    const double slope_ndof = loglog_slope(ndofs(run->history), eta, 4);
    pass = pass && std::abs(slope_h - 2.0 / 3.0) <= 0.15;
    detail += fmt("%s%s: eta ~ h_max^%.3f (need 0.667 +- 0.15), ndof^%.3f", detail.empty() ? "" : "; ",
                  run->label.substr(0, run->label.find(' ')).c_str(), slope_h, slope_ndof);
  }
  return {pass, detail};
}

Outcome adaptive_rates() {
  bool pass = true;
  std::string detail;
  int k = 1;
  for (const Run* run : adaptive_runs()) {
    const double slope = loglog_slope(ndofs(run->history), column(run->history, &ConvergenceRecord::eta), 4);
    const bool ok = std::abs(slope + k) <= 0.2 && run->history.back().ndof >= kAdaptiveBudget && run->history.back().converged;
    pass = pass && ok;
    detail += fmt("%sk = %d: slope %.3f at ndof %d", k == 1 ? "" : "; ", k, slope, run->history.back().ndof);
    ++k;
  }
  return {pass, detail};
}

// First level from which every successive eta ratio is >= 0.9, with at least
// two such ratios; -1 when the run never stagnates.
int stagnation_level(const std::vector<ConvergenceRecord>& h) {
  int level = -1;
  for (int l = static_cast<int>(h.size()) - 1; l >= 1; --l) {
    if (h[l].eta / h[l - 1].eta < 0.9) break;
    level = l;
  }
  if (level < 0 || static_cast<int>(h.size()) - level < 2) return -1;
  return level;
}

Outcome bingham_plateau() {
  const std::vector<const Run*> runs = plateau_runs();
  bool pass = true;
  std::string detail;
  double previous_eta = INFINITY;
  int previous_onset = -1;
  for (int i = 0; i < 3; ++i) {
    const std::vector<ConvergenceRecord>& h = runs[i]->history;
    const int onset = stagnation_level(h);
    const int onset_ndof = onset < 0 ? -1 : h[onset - 1].ndof;
    const double eta = h.back().eta;
    bool converged = true;
    for (const ConvergenceRecord& r : h) converged = converged && r.converged;
    pass = pass && converged && onset >= 0 && eta < previous_eta;
    if (i == 2) pass = pass && onset_ndof > previous_onset;
    previous_onset = std::max(previous_onset, onset_ndof);
    previous_eta = eta;
    detail += fmt("eps %g: final eta %.3e at ndof %d, stagnates from ndof %d; ", kBinghamEpsilons[i], eta,
                  h.back().ndof, onset_ndof);
  }
  const std::vector<ConvergenceRecord>& uniform = runs[3]->history;
  const double slope = loglog_slope(ndofs(uniform), column(uniform, &ConvergenceRecord::eta), 4);
  pass = pass && std::abs(-slope - 0.8) <= 0.25;
  detail += fmt("uniform k = 1: eta ~ ndof^%.3f (need -0.8 +- 0.25)", slope);
  return {pass, detail};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "ldgmin-acceptance-determinism";
  fs::remove_all(root);
  int compared = 0, identical = 0;
  for (BenchmarkId id : kBenchmarks) {
    for (int k = 1; k <= 2; ++k) {
      std::string csv[2];
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path out = root / fmt("%s-k%d-%d", benchmark_name(id).c_str(), k, rep);
        const std::string cmd = fmt("\"%s\" run --benchmark %s --k %d --mode uniform --levels 4 --deterministic --out \"%s\" > /dev/null 2>&1",
                                    LDGMIN_CLI_PATH, benchmark_name(id).c_str(), k, out.c_str());
        if (std::system(cmd.c_str()) != 0) return {false, "cli run failed: " + cmd};
        csv[rep] = read_file(out / "history.csv");
      }
      ++compared;
      if (!csv[0].empty() && csv[0] == csv[1]) ++identical;
    }
  }
  fs::remove_all(root);
  return {identical == compared, fmt("%d of %d history.csv pairs byte-identical", identical, compared)};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*check)();
};

const Criterion kCriteria[] = {
    {1, "strong duality", strong_duality},
    {2, "stabilization identity", stabilization_identity},
    {3, "divergence consistency", divergence_consistency},
    {4, "post-processing", post_processing},
    {5, "estimator nonnegativity", estimator_nonnegativity},
    {6, "derivative correctness", derivatives},
    {7, "smooth quadratic rates", smooth_rates},
    {8, "L-shape uniform rates", uniform_rates},
    {9, "adaptive 4-Laplace rates", adaptive_rates},
    {10, "Bingham regularization plateau", bingham_plateau},
    {11, "determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
