#include "ldgmin/femspace.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "ldgmin/polynomials.hpp"

namespace ldgmin {

void reference_basis(int k, const Vec2& xi, Eigen::VectorXd& values, Eigen::MatrixXd* grads) {
  // Dubiner basis psi_pq = Q_p(X, Y) P_q^{(2p+1,0)}(2 eta - 1) with the
  // homogenized Legendre polynomials Q_p(X, Y) = Y^p P_p(X / Y), X = 2 xi + eta - 1,
  // Y = 1 - eta. The recurrence for Q_p has no division, so the collapsed vertex
  // needs no special treatment.
  const int n = poly_dim(k);
  values.resize(n);
  if (grads) grads->resize(n, 2);
  const double X = 2.0 * xi.x() + xi.y() - 1.0;
  const double Y = 1.0 - xi.y();
  const double z = 2.0 * xi.y() - 1.0;

  std::vector<double> q(k + 1), qx(k + 1), qy(k + 1);
  q[0] = 1.0;
  qx[0] = qy[0] = 0.0;
  if (k >= 1) {
    q[1] = X;
    qx[1] = 2.0;
    qy[1] = 1.0;
  }
  for (int p = 1; p < k; ++p) {
    const double a = (2.0 * p + 1.0) / (p + 1.0);
    const double b = static_cast<double>(p) / (p + 1.0);
    q[p + 1] = a * X * q[p] - b * Y * Y * q[p - 1];
    qx[p + 1] = a * (2.0 * q[p] + X * qx[p]) - b * Y * Y * qx[p - 1];
    qy[p + 1] = a * (q[p] + X * qy[p]) - b * (-2.0 * Y * q[p - 1] + Y * Y * qy[p - 1]);
  }

  for (int p = 0; p <= k; ++p) {
    const int qmax = k - p;
    const double alpha = 2.0 * p + 1.0;
    const std::vector<double> jac = poly::jacobi(qmax, alpha, 0.0, z);
    std::vector<double> djac(qmax + 1, 0.0);
    if (grads && qmax >= 1) {
      const std::vector<double> lower = poly::jacobi(qmax - 1, alpha + 1.0, 1.0, z);
      for (int j = 1; j <= qmax; ++j) djac[j] = 0.5 * (j + alpha + 1.0) * lower[j - 1];
    }
    for (int j = 0; j <= qmax; ++j) {
      const int m = p + j;
      const int idx = m * (m + 1) / 2 + j;
      const double scale = std::sqrt(2.0 * (2.0 * p + 1.0) * (p + j + 1.0));
      values(idx) = scale * q[p] * jac[j];
      if (grads) {
        (*grads)(idx, 0) = scale * qx[p] * jac[j];
        (*grads)(idx, 1) = scale * (qy[p] * jac[j] + q[p] * 2.0 * djac[j]);
      }
    }
  }
}

const Tabulation& tabulate(int k, int rule_degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<const Tabulation>> cache;
  const QuadratureRule& rule = triangle_rule(rule_degree);
  std::lock_guard lock(mutex);
  auto& slot = cache[{k, rule_degree}];
  if (!slot) {
    auto tab = std::make_unique<Tabulation>();
    tab->rule = &rule;
    const int n = poly_dim(k);
    const Eigen::Index nq = rule.size();
    tab->values.resize(nq, n);
    tab->dxi.resize(nq, n);
    tab->deta.resize(nq, n);
    Eigen::VectorXd v;
    Eigen::MatrixXd g;
    for (Eigen::Index q = 0; q < nq; ++q) {
      reference_basis(k, rule.points.col(q), v, &g);
      tab->values.row(q) = v.transpose();
      tab->dxi.row(q) = g.col(0).transpose();
      tab->deta.row(q) = g.col(1).transpose();
    }
    slot = std::move(tab);
  }
  return *slot;
}

Eigen::VectorXd cell_basis(const Mesh& mesh, int t, int k, const Vec2& x) {
  const CellGeometry& g = mesh.geometry(t);
  Eigen::VectorXd v;
  reference_basis(k, g.to_reference(x), v);
  return v / std::sqrt(g.det);
}

Eigen::MatrixXd cell_basis_gradient(const Mesh& mesh, int t, int k, const Vec2& x) {
  const CellGeometry& g = mesh.geometry(t);
  Eigen::VectorXd v;
  Eigen::MatrixXd grad;
  reference_basis(k, g.to_reference(x), v, &grad);
  // d phi / dx = J^{-T} grad_xi psi
  return grad * g.inverse / std::sqrt(g.det);
}

double evaluate(const Mesh& mesh, const DgFunction& v, int t, const Vec2& x) {
  return cell_basis(mesh, t, v.degree, x).dot(v.cell(t));
}

Vec2 evaluate_gradient(const Mesh& mesh, const DgFunction& v, int t, const Vec2& x) {
  return cell_basis_gradient(mesh, t, v.degree, x).transpose() * v.cell(t);
}

Eigen::VectorXd project_cell(const ScalarField& f, const Mesh& mesh, int t, int k, int quadrature_degree) {
  const Tabulation& tab = tabulate(k, quadrature_degree);
  const QuadratureRule& rule = *tab.rule;
  const CellGeometry& g = mesh.geometry(t);
  // weight det * w, basis psi / sqrt(det)
  Eigen::VectorXd fw(rule.size());
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    fw(q) = f(g.to_physical(rule.points.col(q))) * rule.weights(q);
  }
  return std::sqrt(g.det) * tab.values.transpose() * fw;
}

DgFunction project(const ScalarField& f, const Mesh& mesh, int k, int quadrature_degree) {
  DgFunction v(k, mesh.num_cells());
  for (int t = 0; t < mesh.num_cells(); ++t) v.cell(t) = project_cell(f, mesh, t, k, quadrature_degree);
  return v;
}

DgFunction prolong(const Mesh& coarse, const Mesh& fine, const DgFunction& v) {
  DgFunction out(v.degree, fine.num_cells());
  for (int t = 0; t < fine.num_cells(); ++t) {
    const int parent = fine.parent(t);
    if (parent < 0 || parent >= coarse.num_cells()) {
      throw std::invalid_argument("prolong: fine mesh is not a refinement of the coarse mesh");
    }
    out.cell(t) = project_cell([&](const Vec2& x) { return evaluate(coarse, v, parent, x); }, fine, t,
                               v.degree, 2 * v.degree);
  }
  return out;
}

double l2_norm(const Mesh& mesh, const DgFunction& v) {
  // The basis is orthonormal on each cell.
  (void)mesh;
  return v.coeffs.norm();
}

Eigen::VectorXd face_basis(int k, double s, double length) {
  std::vector<double> p, dp;
  poly::legendre(k, 2.0 * s - 1.0, p, dp);
  Eigen::VectorXd out(k + 1);
  for (int j = 0; j <= k; ++j) out(j) = std::sqrt((2.0 * j + 1.0) / length) * p[j];
  return out;
}

double FacePolynomial::operator()(double s) const {
  return face_basis(degree, s, length).dot(coeffs);
}

FacePolynomial project_face(const ScalarField& g, const Mesh& mesh, int f, int k, int quadrature_degree) {
  const Face& face = mesh.face(f);
  const Vec2& a = mesh.vertex(face.vertices[0]);
  const Vec2& b = mesh.vertex(face.vertices[1]);
  const QuadratureRule& rule = edge_rule(quadrature_degree);
  FacePolynomial out{k, face.diameter, Eigen::VectorXd::Zero(k + 1)};
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    const double s = rule.points(0, q);
    out.coeffs += rule.weights(q) * face.diameter * g(a + s * (b - a)) * face_basis(k, s, face.diameter);
  }
  return out;
}

FaceTrace face_trace(const Mesh& mesh, int f, int k, int rule_degree) {
  const Face& face = mesh.face(f);
  const Vec2& a = mesh.vertex(face.vertices[0]);
  const Vec2& b = mesh.vertex(face.vertices[1]);
  const QuadratureRule& rule = edge_rule(rule_degree);
  const Eigen::Index nq = rule.size();
  const int n = poly_dim(k);
  FaceTrace tr;
  tr.s = rule.points.row(0).transpose();
  tr.points.resize(2, nq);
  tr.weights = rule.weights * face.diameter;
  tr.plus.resize(nq, n);
  if (!face.is_boundary()) tr.minus.resize(nq, n);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const Vec2 x = a + tr.s(q) * (b - a);
    tr.points.col(q) = x;
    tr.plus.row(q) = cell_basis(mesh, face.plus_cell, k, x).transpose();
    if (!face.is_boundary()) tr.minus.row(q) = cell_basis(mesh, face.minus_cell, k, x).transpose();
  }
  return tr;
}

TraceValues trace_values(const Mesh& mesh, const DgFunction& v, int f, const std::vector<Vec2>& points) {
  const Face& face = mesh.face(f);
  const Vec2& a = mesh.vertex(face.vertices[0]);
  const Vec2& b = mesh.vertex(face.vertices[1]);
  TraceValues out;
  for (const Vec2& x : points) {
    const Vec2 d = b - a;
    const double s = (x - a).dot(d) / d.squaredNorm();
    const double off = std::abs(d.x() * (x - a).y() - d.y() * (x - a).x()) / d.norm();
    if (s < -1e-12 || s > 1.0 + 1e-12 || off > 1e-12 * std::max(1.0, face.diameter)) {
      throw std::domain_error("trace_values: point is not on face " + std::to_string(f));
    }
    const double plus = evaluate(mesh, v, face.plus_cell, x);
    if (face.is_boundary()) {
      out.jump.push_back(plus);
      out.average.push_back(plus);
    } else {
      const double minus = evaluate(mesh, v, face.minus_cell, x);
      out.jump.push_back(plus - minus);
      out.average.push_back(0.5 * (plus + minus));
    }
  }
  return out;
}

}  // namespace ldgmin
