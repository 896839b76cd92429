#include "ldgmin/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "ldgmin/polynomials.hpp"

namespace ldgmin {

namespace poly {

std::vector<double> jacobi(int n, double alpha, double beta, double x) {
  std::vector<double> p(n + 1);
  p[0] = 1.0;
  if (n == 0) return p;
  p[1] = 0.5 * (alpha - beta + (alpha + beta + 2.0) * x);
  for (int j = 2; j <= n; ++j) {
    const double s = 2.0 * j + alpha + beta;
    const double a1 = 2.0 * j * (j + alpha + beta) * (s - 2.0);
    const double a2 = (s - 1.0) * (alpha * alpha - beta * beta);
    const double a3 = (s - 2.0) * (s - 1.0) * s;
    const double a4 = 2.0 * (j + alpha - 1.0) * (j + beta - 1.0) * s;
    p[j] = ((a2 + a3 * x) * p[j - 1] - a4 * p[j - 2]) / a1;
  }
  return p;
}

std::pair<double, double> jacobi_with_derivative(int n, double alpha, double beta, double x) {
  const double value = jacobi(n, alpha, beta, x)[n];
  if (n == 0) return {value, 0.0};
  const double lower = jacobi(n - 1, alpha + 1.0, beta + 1.0, x)[n - 1];
  return {value, 0.5 * (n + alpha + beta + 1.0) * lower};
}

void legendre(int n, double x, std::vector<double>& values, std::vector<double>& derivatives) {
  values.assign(n + 1, 0.0);
  derivatives.assign(n + 1, 0.0);
  values[0] = 1.0;
  if (n == 0) return;
  values[1] = x;
  derivatives[1] = 1.0;
  for (int j = 2; j <= n; ++j) {
    values[j] = ((2.0 * j - 1.0) * x * values[j - 1] - (j - 1.0) * values[j - 2]) / j;
    derivatives[j] = derivatives[j - 2] + (2.0 * j - 1.0) * values[j - 1];
  }
}

}  // namespace poly

void gauss_jacobi(int n, double alpha, double beta, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  // Golub-Welsch for the initial nodes, then Newton polishing and the
  // closed-form Christoffel weights.
  Eigen::MatrixXd jacobi_matrix = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double s = 2.0 * j + alpha + beta;
    jacobi_matrix(j, j) = (j == 0 && alpha + beta == 0.0)
                              ? (beta - alpha) / (alpha + beta + 2.0)
                              : (beta * beta - alpha * alpha) / (s * (s + 2.0));
    if (j + 1 < n) {
      const double m = j + 1.0;
      const double t = 2.0 * m + alpha + beta;
      const double b = std::sqrt(4.0 * m * (m + alpha) * (m + beta) * (m + alpha + beta) /
                                 (t * t * (t + 1.0) * (t - 1.0)));
      jacobi_matrix(j, j + 1) = jacobi_matrix(j + 1, j) = b;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi_matrix);
  nodes = eig.eigenvalues();
  weights.resize(n);
  const double c = std::pow(2.0, alpha + beta + 1.0) * std::tgamma(n + alpha + 1.0) *
                   std::tgamma(n + beta + 1.0) /
                   (std::tgamma(n + alpha + beta + 1.0) * std::tgamma(n + 1.0));
  for (int i = 0; i < n; ++i) {
    double x = nodes(i);
    double dp = 1.0;
    for (int it = 0; it < 8; ++it) {
      auto [p, d] = poly::jacobi_with_derivative(n, alpha, beta, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-17) break;
    }
    dp = poly::jacobi_with_derivative(n, alpha, beta, x).second;
    nodes(i) = x;
    weights(i) = c / ((1.0 - x * x) * dp * dp);
  }
}

namespace {

QuadratureRule make_edge_rule(int degree) {
  const int n = std::max(1, (degree + 2) / 2);
  Eigen::VectorXd x, w;
  gauss_jacobi(n, 0.0, 0.0, x, w);
  QuadratureRule rule;
  rule.shape = Shape::Edge;
  rule.degree = degree;
  rule.points = (0.5 * (x.array() + 1.0)).matrix().transpose();
  rule.weights = 0.5 * w;
  return rule;
}

QuadratureRule make_triangle_rule(int degree) {
  QuadratureRule rule;
  rule.shape = Shape::Triangle;
  rule.degree = degree;
  if (degree <= 1) {
    rule.points = Eigen::MatrixXd::Constant(2, 1, 1.0 / 3.0);
    rule.weights = Eigen::VectorXd::Constant(1, 0.5);
    return rule;
  }
  if (degree == 2) {
    rule.points.resize(2, 3);
    rule.points << 1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0,
                   1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0;
    rule.weights = Eigen::VectorXd::Constant(3, 1.0 / 6.0);
    return rule;
  }
  // Collapsed tensor rule: x = u (1 - v), y = v with Jacobian (1 - v), which is
  // absorbed into a Gauss-Jacobi(1, 0) rule in v.
  const int n = (degree + 2) / 2;
  Eigen::VectorXd xu, wu, xv, wv;
  gauss_jacobi(n, 0.0, 0.0, xu, wu);
  gauss_jacobi(n, 1.0, 0.0, xv, wv);
  rule.points.resize(2, n * n);
  rule.weights.resize(n * n);
  for (int j = 0; j < n; ++j) {
    const double v = 0.5 * (xv(j) + 1.0);
    for (int i = 0; i < n; ++i) {
      const double u = 0.5 * (xu(i) + 1.0);
      rule.points(0, j * n + i) = u * (1.0 - v);
      rule.points(1, j * n + i) = v;
      rule.weights(j * n + i) = 0.5 * wu(i) * 0.25 * wv(j);
    }
  }
  return rule;
}

}  // namespace

const QuadratureRule& quadrature(int degree, Shape shape) {
  if (degree < 0 || degree > kMaxQuadratureDegree) {
    throw std::invalid_argument("quadrature degree " + std::to_string(degree) +
                                " unsupported; maximum supported degree is " +
                                std::to_string(kMaxQuadratureDegree));
  }
  static std::mutex mutex;
  static std::map<std::pair<int, Shape>, std::unique_ptr<const QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{degree, shape}];
  if (!slot) {
    slot = std::make_unique<const QuadratureRule>(
        shape == Shape::Edge ? make_edge_rule(degree) : make_triangle_rule(degree));
  }
  return *slot;
}

}  // namespace ldgmin
