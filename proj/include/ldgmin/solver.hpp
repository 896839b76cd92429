#ifndef LDGMIN_SOLVER_HPP
#define LDGMIN_SOLVER_HPP

#include <vector>

#include "ldgmin/femspace.hpp"
#include "ldgmin/ldg.hpp"

namespace ldgmin {

struct SolverSettings {
  int max_iterations = 1000;
  double gradient_tolerance = 1e-15;  // max-norm of the coefficient gradient
  double step_tolerance = 1e-15;      // relative to 1 + |u|
  double function_tolerance = 1e-15;  // relative to 1 + |E|
  double hessian_shift = 1e-10;       // first shift tried when the Hessian is not positive definite
  double armijo = 1e-4;

  /// Throws ConfigError unless every tolerance is positive.
  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  double gradient_norm = 0.0;  // max-norm
  double energy = 0.0;
  bool converged = false;
  double seconds = 0.0;
  int shifted_steps = 0;  // Newton steps that needed a Hessian shift
  std::vector<double> energies;  // initial energy, then one entry per accepted step
};

struct SolveResult {
  DgFunction solution;
  SolveReport report;
};

/// Shifted Newton method with Armijo backtracking. Energy is nonincreasing
/// over accepted iterations. Throws NumericalError on NaN energy.
SolveResult minimize(const LdgSystem& system, const DgFunction& init, const SolverSettings& settings = {});

}  // namespace ldgmin

#endif  // LDGMIN_SOLVER_HPP
