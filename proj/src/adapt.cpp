#include "ldgmin/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "ldgmin/duality.hpp"
#include "ldgmin/errors.hpp"
#include "ldgmin/postprocess.hpp"

namespace ldgmin {

void AdaptConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("marking fraction theta must lie in (0, 1]");
  if (max_levels < 0) throw ConfigError("levels must be nonnegative");
  if (ndof_budget < 0) throw ConfigError("ndof budget must be nonnegative");
  solver.validate();
}

std::vector<int> doerfler_mark(const Eigen::VectorXd& indicators, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("marking fraction theta must lie in (0, 1]");
  if ((indicators.array() < 0.0).any()) throw std::invalid_argument("doerfler_mark: negative indicator");
  std::vector<int> order(indicators.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return indicators(a) > indicators(b); });
  double total = 0.0;
  for (int i : order) total += indicators(i);
  std::vector<int> marked;
  if (total == 0.0) return marked;
  if (theta >= 1.0) {
    for (int i : order)
      if (indicators(i) > 0.0) marked.push_back(i);
    return marked;
  }
  const double target = theta * total;
  double bulk = 0.0;
  for (int i : order) {
    if (bulk >= target) break;
    marked.push_back(i);
    bulk += indicators(i);
  }
  return marked;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, int count) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_slope: size mismatch");
  const std::size_t n = count <= 0 ? x.size() : std::min<std::size_t>(count, x.size());
  if (n < 2) throw std::invalid_argument("loglog_slope: need at least two points");
  const std::size_t first = x.size() - n;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = first; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = first; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

std::vector<ConvergenceRecord> run_loop(const ProblemConfig& problem, const AdaptConfig& adapt, const Mesh& initial,
                                        const LevelObserver& observer) {
  problem.validate();
  adapt.validate();
  const int levels = std::max(1, adapt.max_levels);
  const int k = problem.degree;

  std::vector<ConvergenceRecord> history;
  Mesh mesh = initial;
  DgFunction start(k, mesh.num_cells());
  for (int level = 0; level < levels; ++level) {
    const auto t0 = std::chrono::steady_clock::now();
    const LdgSystem system(mesh, problem);
    const SolveResult solved = minimize(system, start, adapt.solver);
    const DgFunction& u = solved.solution;

    ConvergenceRecord rec;
    rec.level = level;
    rec.ndof = system.ndof();
    rec.cells = mesh.num_cells();
    rec.h_max = mesh.h_max();
    rec.iterations = solved.report.iterations;
    rec.converged = solved.report.converged;
    rec.gradient_norm = solved.report.gradient_norm;
    const EnergyParts parts = system.energy_parts(u.coeffs);
    rec.energy = parts.total;
    rec.stabilization = parts.stabilization;

    const DualField y = dual_variable(system, u);
    const DualEnergyBreakdown dual = dual_energy(system, y);
    rec.dual_energy = dual.total;
    rec.dual_feasible = dual.feasible;
    rec.gamma = dual.gamma;
    rec.gap = rec.energy - rec.dual_energy;

    const ConformingFunction vc = nodal_average(mesh, u);
    const RtFunction sigma = rt_fit(mesh, y);
    const EstimatorResult est = estimator(system, vc, sigma);
    rec.eta = est.eta;
    rec.primal = est.primal;
    rec.dual = est.dual;
    rec.clipped_mass = est.clipped_mass;
    rec.quadrature_sensitivity = est.quadrature_sensitivity;
    rec.min_indicator_ratio = est.raw.minCoeff() / (1.0 + std::abs(est.eta));
    rec.divergence_residual = divergence_residual(mesh, sigma, DgFunction(k, system.load())).maxCoeff();
    rec.normal_mismatch = normal_trace_mismatch(mesh, sigma);

    const bool last = level + 1 >= levels || !rec.converged ||
                      (adapt.ndof_budget > 0 && rec.ndof >= adapt.ndof_budget);
    std::vector<int> marked;
    if (!last) {
      if (adapt.mode == RefinementMode::Uniform) {
        marked.resize(mesh.num_cells());
        std::iota(marked.begin(), marked.end(), 0);
      } else {
        marked = doerfler_mark(est.indicators, adapt.theta);
      }
    }
    rec.marked = static_cast<int>(marked.size());
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.push_back(rec);
    if (observer) observer(LevelData{mesh, system, u, history.back(), est.indicators, marked, vc.dg});
    if (last || marked.empty()) break;

    Mesh fine = adapt.mode == RefinementMode::Uniform ? refine_uniform(mesh) : refine(mesh, marked);
    start = prolong(mesh, fine, vc.dg);
    mesh = std::move(fine);
  }
  return history;
}

std::vector<ConvergenceRecord> run_loop(const ProblemConfig& problem, const AdaptConfig& adapt,
                                        const LevelObserver& observer) {
  return run_loop(problem, adapt, initial_lshape(problem.boundary), observer);
}

}  // namespace ldgmin
