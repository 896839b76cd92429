#ifndef LDGMIN_POSTPROCESS_HPP
#define LDGMIN_POSTPROCESS_HPP

#include <Eigen/Dense>
#include <vector>

#include "ldgmin/duality.hpp"
#include "ldgmin/femspace.hpp"
#include "ldgmin/ldg.hpp"

namespace ldgmin {

/// Continuous P_k function given by values at the global Lagrange nodes.
struct ConformingFunction {
  int degree = 1;
  std::vector<Vec2> nodes;
  std::vector<bool> dirichlet;
  Eigen::VectorXd values;
  /// Global node of each local node; local nodes are (i/k, j/k) in reference
  /// coordinates, j-major.
  std::vector<std::vector<int>> cell_nodes;
  /// The same function in the DG basis.
  DgFunction dg;
};

/// Reference Lagrange nodes of P_k in the local order used by ConformingFunction.
std::vector<Vec2> lagrange_nodes(int k);

/// Averages the limits of u from all cells sharing each node; nodes on
/// Dirichlet faces get 0.
ConformingFunction nodal_average(const Mesh& mesh, const DgFunction& u);

/// Raviart-Thomas RT_k field, stored per cell in the local basis
/// {phi_i e_x, phi_i e_y, X X^{k-l} Y^l} with X = (x - c_K) / h_K.
struct RtFunction {
  int degree = 1;
  Eigen::VectorXd coeffs;

  static constexpr int cell_dim(int k) { return (k + 1) * (k + 3); }
  Vec2 evaluate(const Mesh& mesh, int t, const Vec2& x) const;
  double divergence(const Mesh& mesh, int t, const Vec2& x) const;
};

/// Local RT basis values (N x 2) and divergences (N) of cell t at x.
void rt_basis(const Mesh& mesh, int t, int k, const Vec2& x, Eigen::MatrixXd& values, Eigen::VectorXd& divergence);

/// The RT_k field whose face moments against P_k(S) equal those of tau_F and
/// whose interior moments against P_{k-1}(K)^2 equal those of tau_M.
RtFunction rt_fit(const Mesh& mesh, const DualField& tau);

/// Largest mismatch of sigma . nu between the two sides of interior faces,
/// sampled at k + 1 Gauss points per face.
double normal_trace_mismatch(const Mesh& mesh, const RtFunction& sigma);

/// Per-cell L2 norm of div sigma + f_h.
Eigen::VectorXd divergence_residual(const Mesh& mesh, const RtFunction& sigma, const DgFunction& f_h);

struct EstimatorResult {
  Eigen::VectorXd indicators;  // eta(K), clipped at 0
  Eigen::VectorXd raw;         // eta(K) before clipping
  double eta = 0.0;            // sum of raw indicators
  double primal = 0.0;         // E(v_C) = int W(grad v_C) - int f_h v_C
  double dual = 0.0;           // E*(sigma_RT) = -int W*(sigma_RT)
  double min_pointwise = 0.0;  // smallest Fenchel-Young integrand at a quadrature point
  double clipped_mass = 0.0;   // sum of the negative parts removed by clipping
  double quadrature_sensitivity = 0.0;  // |eta - eta computed with degree + 4|
};

/// eta(K) = int_K W(grad v_C) - sigma . grad v_C + W*(sigma) with the
/// estimator density of the system's configuration.
EstimatorResult estimator(const LdgSystem& system, const ConformingFunction& v, const RtFunction& sigma);

}  // namespace ldgmin

#endif  // LDGMIN_POSTPROCESS_HPP
