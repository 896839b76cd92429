#include "ldgmin/solver.hpp"

#include <Eigen/SparseCholesky>
#include <chrono>
#include <cmath>

#include "ldgmin/errors.hpp"

namespace ldgmin {

void SolverSettings::validate() const {
  if (max_iterations < 0) throw ConfigError("max_iterations must be nonnegative");
  if (!(gradient_tolerance > 0.0) || !(step_tolerance > 0.0) || !(function_tolerance > 0.0) ||
      !(hessian_shift > 0.0)) {
    throw ConfigError("solver tolerances must be positive");
  }
  if (!(armijo > 0.0 && armijo < 1.0)) throw ConfigError("Armijo constant must lie in (0, 1)");
}

namespace {

using Factorization = Eigen::SimplicialLDLT<SparseMatrix>;

// H + shift I with the identity always in the pattern, so one symbolic analysis serves every shift.
SparseMatrix shifted(const SparseMatrix& h, double shift) {
  SparseMatrix id(h.rows(), h.cols());
  id.setIdentity();
  return h + shift * id;
}

// LDL^T of H + shift I; fails if any pivot is not safely positive.
bool factorize(Factorization& ldlt, const SparseMatrix& a) {
  ldlt.factorize(a);
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = ldlt.vectorD();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  return (d.array() > 1e-14 * scale).all();
}

double checked_energy(const LdgSystem& system, const Eigen::VectorXd& u) {
  const double e = system.energy(u);
  if (std::isnan(e)) throw NumericalError("energy evaluated to NaN");
  return e;
}

}  // namespace

SolveResult minimize(const LdgSystem& system, const DgFunction& init, const SolverSettings& settings) {
  settings.validate();
  if (init.degree != system.degree() || init.coeffs.size() != system.ndof()) {
    throw ConfigError("initial guess does not match the discrete space");
  }
  if (!init.coeffs.allFinite()) throw NumericalError("initial guess is not finite");

  const auto start = std::chrono::steady_clock::now();
  Eigen::VectorXd u = init.coeffs;
  double energy = checked_energy(system, u);
  Eigen::VectorXd grad = system.gradient(u);
  SolveReport report;
  report.energies.push_back(energy);
  Factorization ldlt;
  bool analyzed = false;
  int flat_steps = 0;  // consecutive full steps with a negligible energy change

  for (int it = 0; it < settings.max_iterations; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() <= settings.gradient_tolerance) {
      report.converged = true;
      break;
    }
    const SparseMatrix h = system.hessian(u);
    if (!analyzed) {
      ldlt.analyzePattern(shifted(h, 0.0));
      analyzed = true;
    }
    Eigen::VectorXd step;
    double shift = 0.0;
    for (;;) {
      if (factorize(ldlt, shifted(h, shift))) {
        step = -ldlt.solve(grad);
        if (step.allFinite() && step.dot(grad) < 0.0) break;
      }
      shift = shift == 0.0 ? settings.hessian_shift : 2.0 * shift;
      if (shift > 1e20) throw NumericalError("Hessian shift failed to produce a descent direction");
    }
    if (shift > 0.0) ++report.shifted_steps;

    const double slope = step.dot(grad);
    const double slack = 1e-15 * (1.0 + std::abs(energy));
    double alpha = 1.0;
    Eigen::VectorXd trial;
    double trial_energy = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = u + alpha * step;
      trial_energy = checked_energy(system, trial);
      if (trial_energy <= energy + settings.armijo * alpha * slope + slack) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    report.iterations = it + 1;
    if (!accepted) break;  // no representable decrease left

    const double decrease = energy - trial_energy;
    const double step_norm = alpha * step.norm();
    const double u_norm = u.norm();
    const double previous_gradient = grad.lpNorm<Eigen::Infinity>();
    u = std::move(trial);
    energy = trial_energy;
    report.energies.push_back(energy);
    grad = system.gradient(u);
    // In stiff directions the energy change drops below rounding long before
    // the gradient does, so a flat step only counts once the gradient stalls.
    const bool flat = alpha == 1.0 && std::abs(decrease) <= settings.function_tolerance * (1.0 + std::abs(energy)) &&
                      grad.lpNorm<Eigen::Infinity>() > 0.5 * previous_gradient;
    flat_steps = flat ? flat_steps + 1 : 0;
    if (grad.lpNorm<Eigen::Infinity>() <= settings.gradient_tolerance ||
        step_norm <= settings.step_tolerance * (1.0 + u_norm) || flat_steps >= 2) {
      report.converged = true;
      break;
    }
  }
  report.energy = system.energy(u);
  report.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {DgFunction(init.degree, std::move(u)), report};
}

}  // namespace ldgmin
