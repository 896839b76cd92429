#include "ldgmin/ldg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ldgmin/errors.hpp"
#include "ldgmin/parallel.hpp"

namespace ldgmin {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

bool is_active(const Face& face) { return face.label != FaceLabel::Neumann; }

// |j|^(r-2) j and its derivative (r-1)|j|^(r-2); the r < 2 derivative is
// dropped at j = 0 where it is unbounded.
double jump_power(double j, double r) {
  if (r == 2.0) return j;
  if (j == 0.0) return 0.0;
  return std::pow(std::abs(j), r - 2.0) * j;
}

double jump_curvature(double j, double r) {
  if (r == 2.0) return 1.0;
  if (j == 0.0) return 0.0;
  return (r - 1.0) * std::pow(std::abs(j), r - 2.0);
}

}  // namespace

int ProblemConfig::volume_quadrature_degree() const {
  const double p = density.growth();
  return std::min(kMaxQuadratureDegree, static_cast<int>(std::ceil(2.0 * p * degree - 1e-12)) + 1);
}

int ProblemConfig::face_quadrature_degree() const {
  return std::min(kMaxQuadratureDegree, std::max(2 * degree, static_cast<int>(std::ceil(r * degree - 1e-12)) + 1));
}

void ProblemConfig::validate() const {
  if (degree < 1) throw ConfigError("polynomial degree must be at least 1");
  if (!(r > 1.0) || !std::isfinite(r)) throw ConfigError("stabilization exponent r must satisfy 1 < r < inf");
  if (!std::isfinite(s)) throw ConfigError("stabilization power s must be finite");
  if (!load) throw ConfigError("missing load function");
}

DiscreteGradientOperator assemble_gradient(const Mesh& mesh, int k) {
  if (k < 1) throw ConfigError("assemble_gradient: degree must be at least 1");
  const int n = poly_dim(k);
  const int m = poly_dim(k - 1);
  const int rows = mesh.num_cells() * 2 * m;
  const int cols = mesh.num_cells() * n;

  // Piecewise gradient; the reference tabulation is exact at degree 2k - 1.
  const Tabulation& tab = tabulate(k, 2 * k);
  const QuadratureRule& rule = *tab.rule;
  std::vector<Triplets> cell_trips(mesh.num_cells());
  parallel_for(mesh.num_cells(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const CellGeometry& geo = mesh.geometry(t);
    // int d_d phi_i phi_j = sum_q w det (J^{-T} grad psi_i)_d psi_j / det
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * m, n);
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
      for (int i = 0; i < n; ++i) {
        const Vec2 g = geo.inverse.transpose() * Vec2(tab.dxi(q, i), tab.deta(q, i));
        for (int j = 0; j < m; ++j) {
          const double wv = rule.weights(q) * tab.values(q, j);
          block(j, i) += wv * g.x();
          block(m + j, i) += wv * g.y();
        }
      }
    }
    Triplets& out = cell_trips[t];
    for (int a = 0; a < 2 * m; ++a)
      for (int i = 0; i < n; ++i)
        if (block(a, i) != 0.0) out.emplace_back(t * 2 * m + a, t * n + i, block(a, i));
  });
  Triplets trips;
  for (auto& c : cell_trips) trips.insert(trips.end(), c.begin(), c.end());
  DiscreteGradientOperator op;
  op.degree = k;
  op.piecewise.resize(rows, cols);
  op.piecewise.setFromTriplets(trips.begin(), trips.end());

  // Lifting: row (K, d, j) collects int_S [v] {phi_j e_d} . nu.
  std::vector<Triplets> face_trips(mesh.num_faces());
  parallel_for(mesh.num_faces(), [&](std::size_t fi) {
    const int f = static_cast<int>(fi);
    const Face& face = mesh.face(f);
    if (!is_active(face)) return;
    const FaceTrace tr = ldgmin::face_trace(mesh, f, k, 2 * k);
    Triplets& out = face_trips[f];
    const double avg = face.is_boundary() ? 1.0 : 0.5;
    auto add = [&](int row_cell, const Eigen::MatrixXd& row_basis, int col_cell, const Eigen::MatrixXd& col_basis,
                   double sign) {
      // M(j, i) = int phi_row_j phi_col_i
      const Eigen::MatrixXd mass = row_basis.leftCols(m).transpose() * tr.weights.asDiagonal() * col_basis;
      for (int d = 0; d < 2; ++d) {
        const double c = sign * avg * face.normal(d);
        for (int j = 0; j < m; ++j)
          for (int i = 0; i < n; ++i)
            if (mass(j, i) != 0.0) out.emplace_back(row_cell * 2 * m + d * m + j, col_cell * n + i, c * mass(j, i));
      }
    };
    add(face.plus_cell, tr.plus, face.plus_cell, tr.plus, 1.0);
    if (!face.is_boundary()) {
      add(face.plus_cell, tr.plus, face.minus_cell, tr.minus, -1.0);
      add(face.minus_cell, tr.minus, face.plus_cell, tr.plus, 1.0);
      add(face.minus_cell, tr.minus, face.minus_cell, tr.minus, -1.0);
    }
  });
  trips.clear();
  for (auto& c : face_trips) trips.insert(trips.end(), c.begin(), c.end());
  op.lifting.resize(rows, cols);
  op.lifting.setFromTriplets(trips.begin(), trips.end());
  op.matrix = op.piecewise - op.lifting;
  op.matrix.prune(0.0);
  return op;
}

double stabilization(const Mesh& mesh, const DgFunction& v, const DgFunction& w, double r, double s) {
  const int k = v.degree;
  const int qdeg = std::min(kMaxQuadratureDegree, std::max(2 * k, static_cast<int>(std::ceil(r * k - 1e-12)) + 1));
  std::vector<double> per_face(mesh.num_faces(), 0.0);
  parallel_for(mesh.num_faces(), [&](std::size_t fi) {
    const int f = static_cast<int>(fi);
    const Face& face = mesh.face(f);
    if (!is_active(face)) return;
    const FaceTrace tr = ldgmin::face_trace(mesh, f, k, qdeg);
    Eigen::VectorXd jv = tr.plus * v.cell(face.plus_cell);
    Eigen::VectorXd jw = tr.plus * w.cell(face.plus_cell);
    if (!face.is_boundary()) {
      jv -= tr.minus * v.cell(face.minus_cell);
      jw -= tr.minus * w.cell(face.minus_cell);
    }
    double acc = 0.0;
    for (Eigen::Index q = 0; q < jv.size(); ++q) acc += tr.weights(q) * jump_power(jv(q), r) * jw(q);
    per_face[f] = std::pow(face.diameter, -s) * acc;
  });
  double total = 0.0;
  for (double x : per_face) total += x;
  return total;
}

LdgSystem::LdgSystem(const Mesh& mesh, ProblemConfig cfg) : mesh_(&mesh), cfg_(std::move(cfg)) {
  cfg_.validate();
  const int k = cfg_.degree;
  grad_ = assemble_gradient(mesh, k);
  volume_tab_ = &tabulate(k - 1, cfg_.volume_quadrature_degree());

  const int n = poly_dim(k);
  load_.resize(mesh.num_cells() * n);
  const int load_degree = std::min(kMaxQuadratureDegree, std::max(cfg_.volume_quadrature_degree(), 2 * k + 4));
  parallel_for(mesh.num_cells(), [&](std::size_t t) {
    load_.segment(t * n, n) = project_cell(cfg_.load, mesh, static_cast<int>(t), k, load_degree);
  });

  traces_.resize(mesh.num_faces());
  face_weight_.assign(mesh.num_faces(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f)
    if (is_active(mesh.face(f))) active_faces_.push_back(f);
  const int fdeg = cfg_.face_quadrature_degree();
  parallel_for(active_faces_.size(), [&](std::size_t i) {
    const int f = active_faces_[i];
    traces_[f] = ldgmin::face_trace(mesh, f, k, fdeg);
    face_weight_[f] = std::pow(mesh.face(f).diameter, -cfg_.s);
  });
}

Vec2 LdgSystem::field_at(const Eigen::VectorXd& field, int t, Eigen::Index q) const {
  const int m = poly_dim(cfg_.degree - 1);
  const double scale = 1.0 / std::sqrt(mesh_->geometry(t).det);
  const auto psi = volume_tab_->values.row(q);
  const Eigen::Index base = static_cast<Eigen::Index>(t) * 2 * m;
  return scale * Vec2(psi.dot(field.segment(base, m)), psi.dot(field.segment(base + m, m)));
}

Eigen::VectorXd LdgSystem::jump(const Eigen::VectorXd& u, int f) const {
  const Face& face = mesh_->face(f);
  const FaceTrace& tr = traces_[f];
  const int n = poly_dim(cfg_.degree);
  Eigen::VectorXd j = tr.plus * u.segment(face.plus_cell * n, n);
  if (!face.is_boundary()) j -= tr.minus * u.segment(face.minus_cell * n, n);
  return j;
}

EnergyParts LdgSystem::energy_parts(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd gu = grad_.matrix * u;
  const QuadratureRule& rule = volume_rule();
  std::vector<double> cell(mesh_->num_cells(), 0.0);
  parallel_for(cell.size(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const double det = mesh_->geometry(t).det;
    double acc = 0.0;
    for (Eigen::Index q = 0; q < rule.size(); ++q) acc += rule.weights(q) * cfg_.density.value(field_at(gu, t, q));
    cell[t] = det * acc;
  });
  EnergyParts parts;
  for (std::size_t t = 0; t < cell.size(); ++t) {
    if (!std::isfinite(cell[t])) {
      throw NumericalError("non-finite energy density on cell " + std::to_string(t));
    }
    parts.volume += cell[t];
  }
  parts.load = load_.dot(u);
  parts.stabilization = stabilization(u);
  parts.total = parts.volume - parts.load + parts.stabilization / cfg_.r;
  return parts;
}

double LdgSystem::stabilization(const Eigen::VectorXd& v) const {
  std::vector<double> per_face(active_faces_.size(), 0.0);
  const double r = cfg_.r;
  parallel_for(active_faces_.size(), [&](std::size_t i) {
    const int f = active_faces_[i];
    const Eigen::VectorXd j = jump(v, f);
    const Eigen::VectorXd& w = traces_[f].weights;
    double acc = 0.0;
    for (Eigen::Index q = 0; q < j.size(); ++q) acc += w(q) * jump_power(j(q), r) * j(q);
    per_face[i] = face_weight_[f] * acc;
  });
  double total = 0.0;
  for (double x : per_face) total += x;
  return total;
}

Eigen::VectorXd LdgSystem::stabilization_gradient(const Eigen::VectorXd& u) const {
  const int n = poly_dim(cfg_.degree);
  std::vector<Eigen::VectorXd> plus(active_faces_.size()), minus(active_faces_.size());
  parallel_for(active_faces_.size(), [&](std::size_t i) {
    const int f = active_faces_[i];
    const FaceTrace& tr = traces_[f];
    const Eigen::VectorXd j = jump(u, f);
    Eigen::VectorXd g(j.size());
    for (Eigen::Index q = 0; q < j.size(); ++q) g(q) = face_weight_[f] * tr.weights(q) * jump_power(j(q), cfg_.r);
    plus[i] = tr.plus.transpose() * g;
    if (!mesh_->face(f).is_boundary()) minus[i] = -(tr.minus.transpose() * g);
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  for (std::size_t i = 0; i < active_faces_.size(); ++i) {
    const Face& face = mesh_->face(active_faces_[i]);
    out.segment(face.plus_cell * n, n) += plus[i];
    if (!face.is_boundary()) out.segment(face.minus_cell * n, n) += minus[i];
  }
  return out;
}

Eigen::VectorXd LdgSystem::stress_moments(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd gu = grad_.matrix * u;
  const int m = poly_dim(cfg_.degree - 1);
  const QuadratureRule& rule = volume_rule();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(gu.size());
  parallel_for(mesh_->num_cells(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    const double root = std::sqrt(mesh_->geometry(t).det);
    Eigen::VectorXd px = Eigen::VectorXd::Zero(m), py = Eigen::VectorXd::Zero(m);
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
      const Vec2 sigma = cfg_.density.gradient(field_at(gu, t, q));
      const auto psi = volume_tab_->values.row(q).transpose();
      px += rule.weights(q) * sigma.x() * psi;
      py += rule.weights(q) * sigma.y() * psi;
    }
    p.segment(t * 2 * m, m) = root * px;
    p.segment(t * 2 * m + m, m) = root * py;
  });
  if (!p.allFinite()) throw NumericalError("non-finite stress moments");
  return p;
}

Eigen::VectorXd LdgSystem::gradient(const Eigen::VectorXd& u) const {
  return grad_.matrix.transpose() * stress_moments(u) - load_ + stabilization_gradient(u);
}

SparseMatrix LdgSystem::hessian(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd gu = grad_.matrix * u;
  const int m = poly_dim(cfg_.degree - 1);
  const int n = poly_dim(cfg_.degree);
  const QuadratureRule& rule = volume_rule();

  // Volume part: block-diagonal H with H_{(d,j),(e,l)} = int D2W_de phi_j phi_l.
  std::vector<Eigen::MatrixXd> blocks(mesh_->num_cells());
  parallel_for(blocks.size(), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (Eigen::Index q = 0; q < rule.size(); ++q) {
      const Mat2 d2 = cfg_.density.hessian(field_at(gu, t, q));
      const Eigen::VectorXd psi = volume_tab_->values.row(q).transpose();
      const Eigen::MatrixXd pp = rule.weights(q) * psi * psi.transpose();
      for (int d = 0; d < 2; ++d)
        for (int e = 0; e < 2; ++e) h.block(d * m, e * m, m, m) += d2(d, e) * pp;
    }
    blocks[t] = h;
  });
  // Exact zeros are kept so the pattern depends only on the mesh and one symbolic
  // factorization serves a whole Newton solve.
  Triplets trips;
  trips.reserve(blocks.size() * 4 * m * m);
  for (std::size_t t = 0; t < blocks.size(); ++t)
    for (int a = 0; a < 2 * m; ++a)
      for (int b = 0; b < 2 * m; ++b)
        trips.emplace_back(t * 2 * m + a, t * 2 * m + b, blocks[t](a, b));
  SparseMatrix hw(grad_.matrix.rows(), grad_.matrix.rows());
  hw.setFromTriplets(trips.begin(), trips.end());
  SparseMatrix hess = SparseMatrix(grad_.matrix.transpose() * hw * grad_.matrix);

  // Stabilization part: (r-1) h^{-s} int |[u]|^{r-2} [phi_i] [phi_j].
  std::vector<Eigen::MatrixXd> face_blocks(active_faces_.size());
  parallel_for(active_faces_.size(), [&](std::size_t i) {
    const int f = active_faces_[i];
    const FaceTrace& tr = traces_[f];
    const bool interior = !mesh_->face(f).is_boundary();
    const Eigen::VectorXd j = jump(u, f);
    Eigen::VectorXd c(j.size());
    for (Eigen::Index q = 0; q < j.size(); ++q) c(q) = face_weight_[f] * tr.weights(q) * jump_curvature(j(q), cfg_.r);
    Eigen::MatrixXd basis(j.size(), interior ? 2 * n : n);
    basis.leftCols(n) = tr.plus;
    if (interior) basis.rightCols(n) = -tr.minus;
    face_blocks[i] = basis.transpose() * c.asDiagonal() * basis;
  });
  trips.clear();
  for (std::size_t i = 0; i < active_faces_.size(); ++i) {
    const Face& face = mesh_->face(active_faces_[i]);
    const Eigen::MatrixXd& b = face_blocks[i];
    auto offset = [&](Eigen::Index a) { return a < n ? face.plus_cell * n + a : face.minus_cell * n + (a - n); };
    for (Eigen::Index a = 0; a < b.rows(); ++a)
      for (Eigen::Index c = 0; c < b.cols(); ++c)
        trips.emplace_back(offset(a), offset(c), b(a, c));
  }
  SparseMatrix hs(hess.rows(), hess.cols());
  hs.setFromTriplets(trips.begin(), trips.end());
  hess += hs;
  return hess;
}

}  // namespace ldgmin
