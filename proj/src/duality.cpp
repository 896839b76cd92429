#include "ldgmin/duality.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "ldgmin/errors.hpp"
#include "ldgmin/parallel.hpp"

namespace ldgmin {

namespace {

// {tau} . nu at the quadrature points of a face, from the P_{k-1} projection.
Eigen::VectorXd averaged_normal_trace(const Mesh& mesh, const FaceTrace& tr, const Eigen::VectorXd& proj, int f,
                                      int k) {
  const Face& face = mesh.face(f);
  const int m = poly_dim(k - 1);
  auto side = [&](int t, const Eigen::MatrixXd& basis) {
    const Eigen::Index base = static_cast<Eigen::Index>(t) * 2 * m;
    return Eigen::VectorXd(face.normal.x() * (basis.leftCols(m) * proj.segment(base, m)) +
                           face.normal.y() * (basis.leftCols(m) * proj.segment(base + m, m)));
  };
  Eigen::VectorXd v = side(face.plus_cell, tr.plus);
  if (!face.is_boundary()) v = 0.5 * (v + side(face.minus_cell, tr.minus));
  return v;
}

FacePolynomial project_values(const FaceTrace& tr, const Eigen::VectorXd& values, int k, double length) {
  FacePolynomial out{k, length, Eigen::VectorXd::Zero(k + 1)};
  for (Eigen::Index q = 0; q < values.size(); ++q) out.coeffs += tr.weights(q) * values(q) * face_basis(k, tr.s(q), length);
  return out;
}

Eigen::VectorXd face_values(const FacePolynomial& p, const FaceTrace& tr) {
  Eigen::VectorXd v(tr.s.size());
  for (Eigen::Index q = 0; q < v.size(); ++q) v(q) = p(tr.s(q));
  return v;
}

}  // namespace

DualField dual_variable(const LdgSystem& system, const DgFunction& u) {
  const Mesh& mesh = system.mesh();
  const ProblemConfig& cfg = system.config();
  const int k = system.degree();
  const int m = poly_dim(k - 1);
  if (!cfg.density.differentiable()) throw UnsupportedOperation("dual_variable needs a differentiable density");

  DualField y;
  y.degree = k;
  auto gu = std::make_shared<Eigen::VectorXd>(system.gradient_operator().matrix * u.coeffs);
  const EnergyDensity density = cfg.density;
  y.volume = [gu, &mesh, density, k, m](int t, const Vec2& x) {
    const Eigen::VectorXd phi = cell_basis(mesh, t, k - 1, x);
    const Eigen::Index base = static_cast<Eigen::Index>(t) * 2 * m;
    return density.gradient(Vec2(phi.dot(gu->segment(base, m)), phi.dot(gu->segment(base + m, m))));
  };
  y.volume_projection = system.stress_moments(u.coeffs);

  y.faces.resize(mesh.num_faces());
  parallel_for(mesh.num_faces(), [&](std::size_t fi) {
    const int f = static_cast<int>(fi);
    const Face& face = mesh.face(f);
    if (face.label == FaceLabel::Neumann) {
      y.faces[f] = FacePolynomial{k, face.diameter, Eigen::VectorXd::Zero(k + 1)};
      return;
    }
    const FaceTrace& tr = system.face_trace(f);
    const Eigen::VectorXd j = system.jump(u.coeffs, f);
    Eigen::VectorXd g = averaged_normal_trace(mesh, tr, y.volume_projection, f, k);
    for (Eigen::Index q = 0; q < g.size(); ++q) {
      const double pw = cfg.r == 2.0 ? j(q) : (j(q) == 0.0 ? 0.0 : std::pow(std::abs(j(q)), cfg.r - 2.0) * j(q));
      g(q) -= system.face_weight(f) * pw;
    }
    y.faces[f] = project_values(tr, g, k, face.diameter);
  });
  return y;
}

DualField interp_dual(const Mesh& mesh, int k, const VectorField& q, int quadrature_degree) {
  if (k < 1) throw ConfigError("interp_dual: degree must be at least 1");
  const int qdeg = quadrature_degree < 0 ? std::min(kMaxQuadratureDegree, 2 * k + 4) : quadrature_degree;
  const int m = poly_dim(k - 1);
  DualField tau;
  tau.degree = k;
  tau.volume = [q](int, const Vec2& x) { return q(x); };
  tau.volume_projection.resize(static_cast<Eigen::Index>(mesh.num_cells()) * 2 * m);
  parallel_for(mesh.num_cells(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    tau.volume_projection.segment(t * 2 * m, m) =
        project_cell([&](const Vec2& x) { return q(x).x(); }, mesh, t, k - 1, qdeg);
    tau.volume_projection.segment(t * 2 * m + m, m) =
        project_cell([&](const Vec2& x) { return q(x).y(); }, mesh, t, k - 1, qdeg);
  });
  tau.faces.resize(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    const ScalarField normal_trace = [&](const Vec2& x) { return q(x).dot(face.normal); };
    if (face.label == FaceLabel::Neumann) {
      const QuadratureRule& rule = edge_rule(qdeg);
      const Vec2& a = mesh.vertex(face.vertices[0]);
      const Vec2& b = mesh.vertex(face.vertices[1]);
      for (Eigen::Index i = 0; i < rule.size(); ++i) {
        const double val = normal_trace(a + rule.points(0, i) * (b - a));
        if (std::abs(val) > 1e-12) {
          throw std::invalid_argument("interp_dual: nonzero normal trace on Neumann face " + std::to_string(f));
        }
      }
      tau.faces[f] = FacePolynomial{k, face.diameter, Eigen::VectorXd::Zero(k + 1)};
    } else {
      tau.faces[f] = project_face(normal_trace, mesh, f, k, qdeg);
    }
  }
  return tau;
}

DgFunction div_reconstruct(const Mesh& mesh, const DiscreteGradientOperator& grad, const DualField& tau) {
  const int k = grad.degree;
  DgFunction out(k, Eigen::VectorXd(-(grad.piecewise.transpose() * tau.volume_projection)));
  std::vector<Eigen::VectorXd> plus(mesh.num_faces()), minus(mesh.num_faces());
  parallel_for(mesh.num_faces(), [&](std::size_t fi) {
    const int f = static_cast<int>(fi);
    const Face& face = mesh.face(f);
    if (face.label == FaceLabel::Neumann) return;
    const FaceTrace tr = face_trace(mesh, f, k, 2 * k);
    const Eigen::VectorXd wv = tr.weights.cwiseProduct(face_values(tau.faces[f], tr));
    plus[f] = tr.plus.transpose() * wv;
    if (!face.is_boundary()) minus[f] = -(tr.minus.transpose() * wv);
  });
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (face.label == FaceLabel::Neumann) continue;
    out.cell(face.plus_cell) += plus[f];
    if (!face.is_boundary()) out.cell(face.minus_cell) += minus[f];
  }
  return out;
}

double dual_stabilization(const LdgSystem& system, const DualField& tau) {
  const Mesh& mesh = system.mesh();
  const ProblemConfig& cfg = system.config();
  const double rp = cfg.r / (cfg.r - 1.0);
  const double power = cfg.s / (cfg.r - 1.0);
  std::vector<double> per_face(mesh.num_faces(), 0.0);
  parallel_for(mesh.num_faces(), [&](std::size_t fi) {
    const int f = static_cast<int>(fi);
    const Face& face = mesh.face(f);
    if (face.label == FaceLabel::Neumann) return;
    const FaceTrace& tr = system.face_trace(f);
    const Eigen::VectorXd diff = face_values(tau.faces[f], tr) -
                                 averaged_normal_trace(mesh, tr, tau.volume_projection, f, system.degree());
    double acc = 0.0;
    for (Eigen::Index q = 0; q < diff.size(); ++q) {
      acc += tr.weights(q) * (rp == 2.0 ? diff(q) * diff(q) : std::pow(std::abs(diff(q)), rp));
    }
    per_face[f] = std::pow(face.diameter, power) * acc;
  });
  double total = 0.0;
  for (double x : per_face) total += x;
  return total;
}

DualEnergyBreakdown dual_energy(const LdgSystem& system, const DualField& tau) {
  const Mesh& mesh = system.mesh();
  const ProblemConfig& cfg = system.config();
  const QuadratureRule& rule = system.volume_rule();
  DualEnergyBreakdown out;

  std::vector<double> cell(mesh.num_cells(), 0.0);
  parallel_for(mesh.num_cells(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const CellGeometry& geo = mesh.geometry(t);
    double acc = 0.0;
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
      const Vec2 x = geo.to_physical(rule.points.col(q));
      acc += rule.weights(q) * cfg.density.conjugate(tau.volume(t, x));
    }
    cell[t] = geo.det * acc;
  });
  for (double c : cell) out.conjugate_volume += c;

  const DgFunction div = div_reconstruct(mesh, system.gradient_operator(), tau);
  out.constraint_residual = (div.coeffs + system.load()).norm();
  out.feasible = out.constraint_residual <= 1e-9 * (1.0 + system.load().norm());
  out.gamma = dual_stabilization(system, tau);
  const double rp = cfg.r / (cfg.r - 1.0);
  out.total = out.feasible ? -out.conjugate_volume - out.gamma / rp : -std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace ldgmin
