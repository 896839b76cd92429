#include <doctest.h>

#include <cmath>
#include <cstring>

#include "ldgmin/errors.hpp"
#include "ldgmin/solver.hpp"
#include "support.hpp"

using namespace ldgmin;

namespace {

ProblemConfig config(const EnergyDensity& w, int k, const BoundarySpec& spec = BoundarySpec::all_dirichlet()) {
  ProblemConfig cfg;
  cfg.density = w;
  cfg.degree = k;
  cfg.boundary = spec;
  return cfg;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("quadratic energy needs one Newton step") {
    const Mesh mesh = testing::lshape(1);
    const LdgSystem sys(mesh, config(p_laplace(2.0), 2));
    SolverSettings one;
    one.max_iterations = 1;
    const SolveResult res = minimize(sys, DgFunction(2, mesh.num_cells()), one);
    CHECK(res.report.iterations == 1);
    CHECK(sys.gradient(res.solution.coeffs).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK(res.report.energy < 0.0);
  }

  TEST_CASE("residual at convergence") {
    const OptimalDesignParameters odp;
    const EnergyDensity densities[] = {p_laplace(4.0), optimal_design(odp), bingham_regularized(1.0, 0.2, 1e-3)};
    for (const EnergyDensity& w : densities) {
      INFO(w.name());
      const Mesh mesh = testing::lshape(1);
      const LdgSystem sys(mesh, config(w, 2));
      const SolveResult res = minimize(sys, DgFunction(2, mesh.num_cells()));
      REQUIRE(res.report.converged);
      const double load_norm = sys.load().lpNorm<Eigen::Infinity>();
      CHECK(sys.gradient(res.solution.coeffs).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + load_norm));
      CHECK(res.report.energy <= sys.energy(Eigen::VectorXd::Zero(sys.ndof())));
      for (std::size_t i = 1; i < res.report.energies.size(); ++i) {
        const double prev = res.report.energies[i - 1];
        CHECK(res.report.energies[i] <= prev + 1e-14 * std::max(1.0, std::abs(prev)));
      }
    }
  }

  TEST_CASE("warm start beats cold start") {
    const Mesh coarse = testing::lshape(1);
    const LdgSystem coarse_sys(coarse, config(p_laplace(4.0), 1));
    const SolveResult coarse_res = minimize(coarse_sys, DgFunction(1, coarse.num_cells()));
    REQUIRE(coarse_res.report.converged);
    const Mesh fine = refine_uniform(coarse);
    const LdgSystem fine_sys(fine, config(p_laplace(4.0), 1));
    const SolveResult cold = minimize(fine_sys, DgFunction(1, fine.num_cells()));
    const SolveResult warm = minimize(fine_sys, prolong(coarse, fine, coarse_res.solution));
    REQUIRE(cold.report.converged);
    REQUIRE(warm.report.converged);
    CHECK(warm.report.iterations < cold.report.iterations);
    CHECK(std::abs(warm.report.energy - cold.report.energy) <= 1e-12 * (1.0 + std::abs(cold.report.energy)));
  }

  TEST_CASE("minimizer is locally minimal") {
    const Mesh mesh = testing::lshape(1, BoundarySpec::reentrant_edges());
    const LdgSystem sys(mesh, config(p_laplace(4.0), 2, BoundarySpec::reentrant_edges()));
    const SolveResult res = minimize(sys, DgFunction(2, mesh.num_cells()));
    REQUIRE(res.report.converged);
    const double e = res.report.energy;
    for (int i = 0; i < 100; ++i) {
      Eigen::VectorXd delta = testing::random_vector(sys.ndof());
      delta *= testing::uniform(0.0, 1e-3) / delta.norm();
      CHECK(sys.energy(res.solution.coeffs + delta) >= e - 1e-15 * (1.0 + std::abs(e)));
    }
  }

  TEST_CASE("degenerate Hessian of the optimal design density") {
    const Mesh mesh = testing::lshape(1);
    const LdgSystem sys(mesh, config(optimal_design(OptimalDesignParameters{}), 1));
    // large initial gradients sit in the flat middle branch
    const SolveResult res = minimize(sys, testing::random_dg(mesh, 1, 0.5));
    CHECK(res.report.converged);
    CHECK(res.report.gradient_norm <= 1e-10);
  }

  TEST_CASE("solves are bitwise reproducible") {
    const Mesh mesh = testing::lshape(1);
    const LdgSystem sys(mesh, config(optimal_design(OptimalDesignParameters{}), 2));
    const DgFunction init = testing::random_dg(mesh, 2, 0.1);
    const SolveResult a = minimize(sys, init), b = minimize(sys, init);
    REQUIRE(a.solution.coeffs.size() == b.solution.coeffs.size());
    CHECK(std::memcmp(a.solution.coeffs.data(), b.solution.coeffs.data(), sizeof(double) * a.solution.coeffs.size()) ==
          0);
    CHECK(a.report.iterations == b.report.iterations);
  }

  TEST_CASE("iteration cap and invalid input") {
    const Mesh mesh = testing::lshape(0);
    const LdgSystem sys(mesh, config(p_laplace(4.0), 1));
    SolverSettings capped;
    capped.max_iterations = 2;
    const SolveResult res = minimize(sys, DgFunction(1, mesh.num_cells()), capped);
    CHECK_FALSE(res.report.converged);
    CHECK(res.report.iterations == 2);

    SolverSettings bad;
    bad.gradient_tolerance = 0.0;
    CHECK_THROWS_AS(minimize(sys, DgFunction(1, mesh.num_cells()), bad), ConfigError);
    DgFunction nan(1, mesh.num_cells());
    nan.coeffs(0) = std::nan("");
    CHECK_THROWS_AS(minimize(sys, nan), NumericalError);
    CHECK_THROWS_AS(minimize(sys, DgFunction(2, mesh.num_cells())), ConfigError);
  }
}
