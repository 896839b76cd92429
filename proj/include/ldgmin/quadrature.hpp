#ifndef LDGMIN_QUADRATURE_HPP
#define LDGMIN_QUADRATURE_HPP

#include <Eigen/Dense>

namespace ldgmin {

enum class Shape { Triangle, Edge };

/// Reference rule: the triangle {x, y >= 0, x + y <= 1} (weights sum to 1/2)
/// or the unit interval [0, 1] (weights sum to 1).
struct QuadratureRule {
  Shape shape = Shape::Triangle;
  int degree = 0;
  Eigen::MatrixXd points;  // dim x n
  Eigen::VectorXd weights;

  Eigen::Index size() const { return weights.size(); }
};

inline constexpr int kMaxQuadratureDegree = 49;

/// Rule exact for polynomials of total degree <= degree. Rules are cached and
/// shared; the returned reference stays valid for the program lifetime.
/// Throws std::invalid_argument for degree < 0 or degree > kMaxQuadratureDegree.
const QuadratureRule& quadrature(int degree, Shape shape);

inline const QuadratureRule& triangle_rule(int degree) { return quadrature(degree, Shape::Triangle); }
inline const QuadratureRule& edge_rule(int degree) { return quadrature(degree, Shape::Edge); }

/// Gauss-Jacobi nodes and weights for the weight (1-x)^alpha (1+x)^beta on [-1,1].
void gauss_jacobi(int n, double alpha, double beta, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace ldgmin

#endif  // LDGMIN_QUADRATURE_HPP
