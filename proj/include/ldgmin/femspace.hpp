#ifndef LDGMIN_FEMSPACE_HPP
#define LDGMIN_FEMSPACE_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ldgmin/mesh.hpp"
#include "ldgmin/quadrature.hpp"

namespace ldgmin {

/// dim P_k in two variables.
constexpr int poly_dim(int k) { return k < 0 ? 0 : (k + 1) * (k + 2) / 2; }

/// L2-orthonormal basis of P_k on the reference triangle, ordered by total
/// degree, so the first poly_dim(m) functions span P_m for every m <= k.
/// grads (optional) receives d/dxi and d/deta as the two columns.
void reference_basis(int k, const Vec2& xi, Eigen::VectorXd& values, Eigen::MatrixXd* grads = nullptr);

/// Reference basis values and derivatives at the points of a rule.
struct Tabulation {
  const QuadratureRule* rule = nullptr;
  Eigen::MatrixXd values;  // n_points x n_basis
  Eigen::MatrixXd dxi;
  Eigen::MatrixXd deta;
};

/// Cached tabulation of reference_basis(k) at triangle_rule(rule_degree).
const Tabulation& tabulate(int k, int rule_degree);

/// Piecewise polynomial of degree k. On each cell the coefficients refer to the
/// basis phi_i = psi_i o F^{-1} / sqrt(det F'), which is L2-orthonormal on the
/// physical triangle. Coefficients are stored cell-major.
struct DgFunction {
  int degree = 1;
  Eigen::VectorXd coeffs;

  DgFunction() = default;
  DgFunction(int k, int num_cells) : degree(k), coeffs(Eigen::VectorXd::Zero(num_cells * poly_dim(k))) {}
  DgFunction(int k, Eigen::VectorXd c) : degree(k), coeffs(std::move(c)) {}

  int cell_dim() const { return poly_dim(degree); }
  auto cell(int t) { return coeffs.segment(t * cell_dim(), cell_dim()); }
  auto cell(int t) const { return coeffs.segment(t * cell_dim(), cell_dim()); }
};

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Physical basis values (length poly_dim(k)) of cell t at x.
Eigen::VectorXd cell_basis(const Mesh& mesh, int t, int k, const Vec2& x);
/// Physical basis gradients (poly_dim(k) x 2) of cell t at x.
Eigen::MatrixXd cell_basis_gradient(const Mesh& mesh, int t, int k, const Vec2& x);

double evaluate(const Mesh& mesh, const DgFunction& v, int t, const Vec2& x);
Vec2 evaluate_gradient(const Mesh& mesh, const DgFunction& v, int t, const Vec2& x);

/// L2 projection onto P_k(K) of cell t, integrated with a rule of the given degree.
Eigen::VectorXd project_cell(const ScalarField& f, const Mesh& mesh, int t, int k, int quadrature_degree);
DgFunction project(const ScalarField& f, const Mesh& mesh, int k, int quadrature_degree);

/// Exact L2 projection of a DG function on a coarse mesh onto the refined mesh
/// (fine.parent() must refer to coarse).
DgFunction prolong(const Mesh& coarse, const Mesh& fine, const DgFunction& v);

/// L2 norm of v over the domain.
double l2_norm(const Mesh& mesh, const DgFunction& v);

/// Polynomial on a face in the L2(S)-orthonormal Legendre basis
/// sqrt((2j+1)/|S|) P_j(2s-1), where s in [0,1] runs from the face's lower
/// vertex index (arc length s |S|).
struct FacePolynomial {
  int degree = 0;
  double length = 1.0;
  Eigen::VectorXd coeffs;

  double operator()(double s) const;
};

/// Face basis values at normalized parameter s.
Eigen::VectorXd face_basis(int k, double s, double length);

/// L2 projection onto P_k(S) of a field evaluated at physical points of face f.
FacePolynomial project_face(const ScalarField& g, const Mesh& mesh, int f, int k, int quadrature_degree);

/// Quadrature on a face with the traces of the adjacent cell bases.
struct FaceTrace {
  Eigen::VectorXd s;         // normalized parameters
  Eigen::Matrix2Xd points;   // physical points
  Eigen::VectorXd weights;   // physical weights (sum = |S|)
  Eigen::MatrixXd plus;      // n_points x poly_dim(k), basis of plus_cell
  Eigen::MatrixXd minus;     // empty on boundary faces
};

FaceTrace face_trace(const Mesh& mesh, int f, int k, int rule_degree);

/// Jump [v]_S = v|K+ - v|K- and average {v}_S at points of face f; on boundary
/// faces both equal the trace from K+. Throws std::domain_error if a point is
/// not on the face.
struct TraceValues {
  std::vector<double> jump;
  std::vector<double> average;
};
TraceValues trace_values(const Mesh& mesh, const DgFunction& v, int f, const std::vector<Vec2>& points);

}  // namespace ldgmin

#endif  // LDGMIN_FEMSPACE_HPP
