#ifndef LDGMIN_LDG_HPP
#define LDGMIN_LDG_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "ldgmin/densities.hpp"
#include "ldgmin/femspace.hpp"
#include "ldgmin/mesh.hpp"

namespace ldgmin {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Lifted discrete gradient G = D - L mapping P_k(M) coefficients to
/// P_{k-1}(M)^2 coefficients. Row layout per cell: t * 2m + d * m + j with
/// m = poly_dim(k - 1), d the component and j the basis index.
struct DiscreteGradientOperator {
  int degree = 1;
  SparseMatrix matrix;     // G
  SparseMatrix piecewise;  // D: (D v)_{t,d,j} = int_K d_d v phi_j
  SparseMatrix lifting;    // L: sum over non-Neumann faces of int_S [v] {Phi} . nu

  int vector_dim() const { return 2 * poly_dim(degree - 1); }
};

/// Faces are classified by the mesh's boundary labels.
DiscreteGradientOperator assemble_gradient(const Mesh& mesh, int k);

struct ProblemConfig {
  EnergyDensity density;
  /// Density used by the estimator; defaults to `density`. Bingham runs solve
  /// with the regularized density and estimate with the plain one.
  std::optional<EnergyDensity> estimator_density;
  int degree = 1;
  double r = 2.0;
  double s = 1.0;
  ScalarField load = [](const Vec2&) { return 1.0; };
  BoundarySpec boundary = BoundarySpec::all_dirichlet();
  double epsilon = 0.0;

  const EnergyDensity& estimate_density() const { return estimator_density ? *estimator_density : density; }
  /// Exactness degree for nonlinear volume integrands: 2 p k + 1.
  int volume_quadrature_degree() const;
  int face_quadrature_degree() const;
  /// Throws ConfigError unless k >= 1 and 1 < r < inf.
  void validate() const;
};

/// s_h(v; w) over all interior and Dirichlet faces.
double stabilization(const Mesh& mesh, const DgFunction& v, const DgFunction& w, double r, double s);

struct EnergyParts {
  double volume = 0.0;         // int W(G u)
  double load = 0.0;           // int f_h u
  double stabilization = 0.0;  // s_h(u)
  double total = 0.0;          // volume - load + stabilization / r
};

/// The discrete problem on one mesh: E_h, its gradient and Hessian, with all
/// quadrature data precomputed. Holds a reference to the mesh.
class LdgSystem {
 public:
  LdgSystem(const Mesh& mesh, ProblemConfig cfg);

  const Mesh& mesh() const { return *mesh_; }
  const ProblemConfig& config() const { return cfg_; }
  const DiscreteGradientOperator& gradient_operator() const { return grad_; }
  int degree() const { return cfg_.degree; }
  int ndof() const { return mesh_->num_cells() * poly_dim(cfg_.degree); }

  /// Coefficients of f_h = Pi_k f, equal to the moments int f phi_i.
  const Eigen::VectorXd& load() const { return load_; }

  double energy(const Eigen::VectorXd& u) const { return energy_parts(u).total; }
  EnergyParts energy_parts(const Eigen::VectorXd& u) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;
  /// Sparsity pattern is independent of u.
  SparseMatrix hessian(const Eigen::VectorXd& u) const;

  double stabilization(const Eigen::VectorXd& v) const;
  /// Vector with entries s_h(u; phi_i).
  Eigen::VectorXd stabilization_gradient(const Eigen::VectorXd& u) const;
  /// Moments int DW(G u) . e_d phi_j, i.e. the coefficients of Pi_{k-1} DW(G u).
  Eigen::VectorXd stress_moments(const Eigen::VectorXd& u) const;

  const QuadratureRule& volume_rule() const { return *volume_tab_->rule; }
  /// Value of the piecewise polynomial field with coefficients `field` (layout
  /// of G's rows) at volume quadrature point q of cell t.
  Vec2 field_at(const Eigen::VectorXd& field, int t, Eigen::Index q) const;
  /// Cached face quadrature; empty traces on Neumann faces.
  const FaceTrace& face_trace(int f) const { return traces_[f]; }
  /// h_S^{-s}
  double face_weight(int f) const { return face_weight_[f]; }
  /// Jump of u at the quadrature points of face f.
  Eigen::VectorXd jump(const Eigen::VectorXd& u, int f) const;

 private:
  const Mesh* mesh_;
  ProblemConfig cfg_;
  DiscreteGradientOperator grad_;
  const Tabulation* volume_tab_;
  Eigen::VectorXd load_;
  std::vector<FaceTrace> traces_;
  std::vector<double> face_weight_;
  std::vector<int> active_faces_;
};

}  // namespace ldgmin

#endif  // LDGMIN_LDG_HPP
