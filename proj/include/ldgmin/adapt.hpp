#ifndef LDGMIN_ADAPT_HPP
#define LDGMIN_ADAPT_HPP

#include <functional>
#include <optional>
#include <vector>

#include "ldgmin/ldg.hpp"
#include "ldgmin/mesh.hpp"
#include "ldgmin/solver.hpp"

namespace ldgmin {

struct ConvergenceRecord {
  int level = 0;
  int ndof = 0;
  double h_max = 0.0;
  double eta = 0.0;
  double energy = 0.0;       // E_h(u_h)
  double dual_energy = 0.0;  // E*_h(y)
  double gap = 0.0;
  double primal = 0.0;       // E(v_C)
  double dual = 0.0;         // E*(sigma_RT)
  int iterations = 0;
  double seconds = 0.0;
  int cells = 0;
  bool converged = false;

  // Diagnostics beyond the history columns.
  double gradient_norm = 0.0;
  double stabilization = 0.0;  // s_h(u_h)
  double gamma = 0.0;          // gamma_h(y)
  bool dual_feasible = false;
  double divergence_residual = 0.0;  // max over cells of |div sigma_RT + f_h|_{L2(K)}
  double normal_mismatch = 0.0;
  double min_indicator_ratio = 0.0;  // min eta(K) / (1 + eta)
  double clipped_mass = 0.0;
  double quadrature_sensitivity = 0.0;
  int marked = 0;
};

enum class RefinementMode { Uniform, Adaptive };

struct AdaptConfig {
  double theta = 0.5;
  RefinementMode mode = RefinementMode::Adaptive;
  int max_levels = 10;  // number of recorded levels; 0 behaves like 1
  long ndof_budget = 0;  // stop once ndof reaches the budget (0: no budget)
  SolverSettings solver;

  /// Throws ConfigError unless 0 < theta <= 1, max_levels >= 0 and ndof_budget >= 0.
  void validate() const;
};

/// Minimal set carrying at least theta of the total; indicators are taken in
/// descending order with ties broken by ascending cell index. All-zero input
/// gives the empty set.
std::vector<int> doerfler_mark(const Eigen::VectorXd& indicators, double theta);

/// Everything computed on one level, passed to the observer before refining.
struct LevelData {
  const Mesh& mesh;
  const LdgSystem& system;
  const DgFunction& solution;
  const ConvergenceRecord& record;
  const Eigen::VectorXd& indicators;
  const std::vector<int>& marked;  // empty on the last level
  const DgFunction& conforming;    // v_C in the DG basis
};
using LevelObserver = std::function<void(const LevelData&)>;

/// SOLVE, ESTIMATE, MARK, REFINE starting from `initial`. Stops after
/// max_levels records, at the ndof budget, or after a level whose solve did
/// not converge (that record is kept with converged = false).
std::vector<ConvergenceRecord> run_loop(const ProblemConfig& problem, const AdaptConfig& adapt, const Mesh& initial,
                                        const LevelObserver& observer = {});

/// As above on the L-shaped domain with the problem's boundary.
std::vector<ConvergenceRecord> run_loop(const ProblemConfig& problem, const AdaptConfig& adapt,
                                        const LevelObserver& observer = {});

/// Least-squares slope of log(y) against log(x) over the last `count` points
/// (all points if count <= 0).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, int count = 0);

}  // namespace ldgmin

#endif  // LDGMIN_ADAPT_HPP
