#ifndef LDGMIN_DUALITY_HPP
#define LDGMIN_DUALITY_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ldgmin/femspace.hpp"
#include "ldgmin/ldg.hpp"

namespace ldgmin {

/// Element (tau_M, tau_F) of the dual space: a volume field evaluatable per
/// cell plus one normal-trace polynomial per face, zero on Neumann faces.
struct DualField {
  int degree = 1;  // face degree k; the volume projection lives in P_{k-1}
  std::function<Vec2(int cell, const Vec2& x)> volume;
  /// Pi_{k-1} tau_M in the row layout of the discrete gradient operator.
  Eigen::VectorXd volume_projection;
  std::vector<FacePolynomial> faces;
};

/// sigma_M = DW(G u) and sigma_F = {Pi_{k-1} sigma_M} . nu - h^{-s} |[u]|^{r-2} [u]
/// projected onto P_k(S) on interior and Dirichlet faces.
DualField dual_variable(const LdgSystem& system, const DgFunction& u);

/// I_h* q = (q, Pi_k(q . nu_S)). Throws std::invalid_argument if q . nu does
/// not vanish (to 1e-12) on a Neumann face.
DualField interp_dual(const Mesh& mesh, int k, const VectorField& q, int quadrature_degree = -1);

/// The P_k(M) function with int div_h tau phi = -int tau_M . grad phi + sum_S int tau_S [phi]
/// over interior and Dirichlet faces.
DgFunction div_reconstruct(const Mesh& mesh, const DiscreteGradientOperator& grad, const DualField& tau);

/// sum_S h_S^{s/(r-1)} int_S |tau_S - {Pi_{k-1} tau_M} . nu|^{r'}
double dual_stabilization(const LdgSystem& system, const DualField& tau);

struct DualEnergyBreakdown {
  double conjugate_volume = 0.0;  // int W*(tau_M)
  bool feasible = false;          // div_h tau = -f_h
  double constraint_residual = 0.0;
  double gamma = 0.0;
  double total = 0.0;  // -inf when infeasible
};

DualEnergyBreakdown dual_energy(const LdgSystem& system, const DualField& tau);

}  // namespace ldgmin

#endif  // LDGMIN_DUALITY_HPP
