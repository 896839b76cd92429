#include "ldgmin/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "ldgmin/parallel.hpp"

namespace ldgmin {

namespace {

// A Lagrange node of a conforming P_k space is identified by the global
// vertices carrying nonzero barycentric weight and those weights.
using NodeKey = std::array<int, 6>;

NodeKey make_key(std::array<std::pair<int, int>, 3> parts) {
  std::sort(parts.begin(), parts.end());
  NodeKey key{-1, 0, -1, 0, -1, 0};
  int slot = 0;
  for (const auto& [vertex, weight] : parts) {
    if (weight == 0) continue;
    key[2 * slot] = vertex;
    key[2 * slot + 1] = weight;
    ++slot;
  }
  return key;
}

}  // namespace

std::vector<Vec2> lagrange_nodes(int k) {
  std::vector<Vec2> out;
  for (int j = 0; j <= k; ++j)
    for (int i = 0; i + j <= k; ++i) out.emplace_back(static_cast<double>(i) / k, static_cast<double>(j) / k);
  return out;
}

ConformingFunction nodal_average(const Mesh& mesh, const DgFunction& u) {
  const int k = u.degree;
  const int n = poly_dim(k);
  ConformingFunction v;
  v.degree = k;
  v.cell_nodes.resize(mesh.num_cells());

  const std::vector<Vec2> ref = lagrange_nodes(k);
  Eigen::MatrixXd vandermonde(n, n);
  Eigen::VectorXd psi;
  for (int a = 0; a < n; ++a) {
    reference_basis(k, ref[a], psi);
    vandermonde.row(a) = psi.transpose();
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(vandermonde);

  std::map<NodeKey, int> index;
  std::vector<double> sum;
  std::vector<int> count;
  for (int t = 0; t < mesh.num_cells(); ++t) {
    const auto& tri = mesh.triangle(t);
    const double root = std::sqrt(mesh.geometry(t).det);
    // Values of u at the reference nodes: psi / sqrt(det) against the coefficients.
    const Eigen::VectorXd local = vandermonde * u.cell(t) / root;
    int a = 0;
    for (int j = 0; j <= k; ++j) {
      for (int i = 0; i + j <= k; ++i, ++a) {
        const NodeKey key = make_key({{{tri[0], k - i - j}, {tri[1], i}, {tri[2], j}}});
        auto [it, inserted] = index.emplace(key, static_cast<int>(v.nodes.size()));
        if (inserted) {
          v.nodes.push_back(mesh.geometry(t).to_physical(ref[a]));
          sum.push_back(0.0);
          count.push_back(0);
        }
        sum[it->second] += local(a);
        count[it->second] += 1;
        v.cell_nodes[t].push_back(it->second);
      }
    }
  }

  v.dirichlet.assign(v.nodes.size(), false);
  for (const Face& face : mesh.faces()) {
    if (face.label != FaceLabel::Dirichlet) continue;
    for (int s = 0; s <= k; ++s) {
      const NodeKey key = make_key({{{face.vertices[0], k - s}, {face.vertices[1], s}, {-1, 0}}});
      const auto it = index.find(key);
      if (it == index.end()) throw std::logic_error("nodal_average: missing boundary node");
      v.dirichlet[it->second] = true;
    }
  }

  v.values.resize(static_cast<Eigen::Index>(v.nodes.size()));
  for (std::size_t g = 0; g < v.nodes.size(); ++g) v.values(g) = v.dirichlet[g] ? 0.0 : sum[g] / count[g];

  v.dg = DgFunction(k, mesh.num_cells());
  for (int t = 0; t < mesh.num_cells(); ++t) {
    Eigen::VectorXd local(n);
    for (int a = 0; a < n; ++a) local(a) = v.values(v.cell_nodes[t][a]);
    v.dg.cell(t) = std::sqrt(mesh.geometry(t).det) * lu.solve(local);
  }
  return v;
}

void rt_basis(const Mesh& mesh, int t, int k, const Vec2& x, Eigen::MatrixXd& values, Eigen::VectorXd& divergence) {
  const int n = poly_dim(k);
  const int dim = RtFunction::cell_dim(k);
  values.setZero(dim, 2);
  divergence.resize(dim);
  const Eigen::VectorXd phi = cell_basis(mesh, t, k, x);
  const Eigen::MatrixXd dphi = cell_basis_gradient(mesh, t, k, x);
  for (int i = 0; i < n; ++i) {
    values(i, 0) = phi(i);
    divergence(i) = dphi(i, 0);
    values(n + i, 1) = phi(i);
    divergence(n + i) = dphi(i, 1);
  }
  const double h = mesh.diameter(t);
  const Vec2 X = (x - mesh.centroid(t)) / h;
  for (int l = 0; l <= k; ++l) {
    const double mono = std::pow(X.x(), k - l) * std::pow(X.y(), l);
    values.row(2 * n + l) = mono * X.transpose();
    // div(X m(X)) = (2 + deg m) m / h for homogeneous m
    divergence(2 * n + l) = (k + 2) * mono / h;
  }
}

Vec2 RtFunction::evaluate(const Mesh& mesh, int t, const Vec2& x) const {
  Eigen::MatrixXd values;
  Eigen::VectorXd div;
  rt_basis(mesh, t, degree, x, values, div);
  const int dim = cell_dim(degree);
  return values.transpose() * coeffs.segment(static_cast<Eigen::Index>(t) * dim, dim);
}

double RtFunction::divergence(const Mesh& mesh, int t, const Vec2& x) const {
  Eigen::MatrixXd values;
  Eigen::VectorXd div;
  rt_basis(mesh, t, degree, x, values, div);
  const int dim = cell_dim(degree);
  return div.dot(coeffs.segment(static_cast<Eigen::Index>(t) * dim, dim));
}

RtFunction rt_fit(const Mesh& mesh, const DualField& tau) {
  const int k = tau.degree;
  const int m = poly_dim(k - 1);
  const int dim = RtFunction::cell_dim(k);
  RtFunction sigma;
  sigma.degree = k;
  sigma.coeffs.resize(static_cast<Eigen::Index>(mesh.num_cells()) * dim);
  const QuadratureRule& edge = edge_rule(2 * k + 1);
  const QuadratureRule& tri = triangle_rule(2 * k + 1);

  parallel_for(mesh.num_cells(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    Eigen::MatrixXd dofs = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs(dim);
    Eigen::MatrixXd values;
    Eigen::VectorXd div;
    for (int e = 0; e < 3; ++e) {
      const int f = mesh.cell_face(t, e);
      const Face& face = mesh.face(f);
      const Vec2& a = mesh.vertex(face.vertices[0]);
      const Vec2& b = mesh.vertex(face.vertices[1]);
      for (Eigen::Index q = 0; q < edge.size(); ++q) {
        const double s = edge.points(0, q);
        rt_basis(mesh, t, k, a + s * (b - a), values, div);
        const Eigen::VectorXd normal = values * face.normal;
        const Eigen::VectorXd psi = face_basis(k, s, face.diameter);
        dofs.middleRows(e * (k + 1), k + 1) += edge.weights(q) * face.diameter * psi * normal.transpose();
      }
      rhs.segment(e * (k + 1), k + 1) = tau.faces[f].coeffs;
    }
    const CellGeometry& geo = mesh.geometry(t);
    for (Eigen::Index q = 0; q < tri.size(); ++q) {
      const Vec2 x = geo.to_physical(tri.points.col(q));
      rt_basis(mesh, t, k, x, values, div);
      const Eigen::VectorXd phi = cell_basis(mesh, t, k - 1, x);
      const double w = tri.weights(q) * geo.det;
      dofs.middleRows(3 * (k + 1), m) += w * phi * values.col(0).transpose();
      dofs.middleRows(3 * (k + 1) + m, m) += w * phi * values.col(1).transpose();
    }
    rhs.segment(3 * (k + 1), 2 * m) = tau.volume_projection.segment(static_cast<Eigen::Index>(t) * 2 * m, 2 * m);
    sigma.coeffs.segment(static_cast<Eigen::Index>(t) * dim, dim) = dofs.fullPivLu().solve(rhs);
  });
  return sigma;
}

double normal_trace_mismatch(const Mesh& mesh, const RtFunction& sigma) {
  const QuadratureRule& edge = edge_rule(2 * sigma.degree + 1);
  double worst = 0.0;
  for (const Face& face : mesh.faces()) {
    if (face.is_boundary()) continue;
    const Vec2& a = mesh.vertex(face.vertices[0]);
    const Vec2& b = mesh.vertex(face.vertices[1]);
    for (Eigen::Index q = 0; q < edge.size(); ++q) {
      const Vec2 x = a + edge.points(0, q) * (b - a);
      const double plus = sigma.evaluate(mesh, face.plus_cell, x).dot(face.normal);
      const double minus = sigma.evaluate(mesh, face.minus_cell, x).dot(face.normal);
      worst = std::max(worst, std::abs(plus - minus));
    }
  }
  return worst;
}

Eigen::VectorXd divergence_residual(const Mesh& mesh, const RtFunction& sigma, const DgFunction& f_h) {
  const QuadratureRule& rule = triangle_rule(2 * sigma.degree);
  Eigen::VectorXd out(mesh.num_cells());
  parallel_for(mesh.num_cells(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const CellGeometry& geo = mesh.geometry(t);
    double acc = 0.0;
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
      const Vec2 x = geo.to_physical(rule.points.col(q));
      const double r = sigma.divergence(mesh, t, x) + evaluate(mesh, f_h, t, x);
      acc += rule.weights(q) * geo.det * r * r;
    }
    out(t) = std::sqrt(acc);
  });
  return out;
}

namespace {

struct CellEstimate {
  double eta = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double min_pointwise = 0.0;
};

CellEstimate estimate_cell(const Mesh& mesh, const EnergyDensity& density, const ConformingFunction& v,
                           const RtFunction& sigma, int t, const QuadratureRule& rule) {
  const CellGeometry& geo = mesh.geometry(t);
  CellEstimate out;
  out.min_pointwise = std::numeric_limits<double>::infinity();
  for (Eigen::Index q = 0; q < rule.size(); ++q) {
    const Vec2 x = geo.to_physical(rule.points.col(q));
    const Vec2 grad = evaluate_gradient(mesh, v.dg, t, x);
    const Vec2 s = sigma.evaluate(mesh, t, x);
    const double w = density.value(grad);
    const double wstar = density.conjugate(s);
    const double fy = w - s.dot(grad) + wstar;
    const double weight = rule.weights(q) * geo.det;
    out.eta += weight * fy;
    out.primal += weight * w;
    out.dual += weight * wstar;
    out.min_pointwise = std::min(out.min_pointwise, fy);
  }
  return out;
}

}  // namespace

EstimatorResult estimator(const LdgSystem& system, const ConformingFunction& v, const RtFunction& sigma) {
  const Mesh& mesh = system.mesh();
  const ProblemConfig& cfg = system.config();
  const EnergyDensity& density = cfg.estimate_density();
  const int degree = cfg.volume_quadrature_degree();
  const QuadratureRule& rule = triangle_rule(degree);
  const QuadratureRule& fine = triangle_rule(std::min(kMaxQuadratureDegree, degree + 4));

  std::vector<CellEstimate> cells(mesh.num_cells()), check(mesh.num_cells());
  parallel_for(cells.size(), [&](std::size_t t) {
    cells[t] = estimate_cell(mesh, density, v, sigma, static_cast<int>(t), rule);
    check[t] = estimate_cell(mesh, density, v, sigma, static_cast<int>(t), fine);
  });

  EstimatorResult out;
  out.raw.resize(mesh.num_cells());
  out.indicators.resize(mesh.num_cells());
  out.min_pointwise = std::numeric_limits<double>::infinity();
  double primal_volume = 0.0, eta_fine = 0.0;
  for (int t = 0; t < mesh.num_cells(); ++t) {
    out.raw(t) = cells[t].eta;
    out.indicators(t) = std::max(0.0, cells[t].eta);
    out.clipped_mass += std::max(0.0, -cells[t].eta);
    out.eta += cells[t].eta;
    primal_volume += cells[t].primal;
    out.dual -= cells[t].dual;
    out.min_pointwise = std::min(out.min_pointwise, cells[t].min_pointwise);
    eta_fine += check[t].eta;
  }
  out.primal = primal_volume - system.load().dot(v.dg.coeffs);
  out.quadrature_sensitivity = std::abs(eta_fine - out.eta);
  return out;
}

}  // namespace ldgmin
