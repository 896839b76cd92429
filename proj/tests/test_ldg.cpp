#include <doctest.h>

#include <cmath>
#include <string>

#include "ldgmin/errors.hpp"
#include "ldgmin/ldg.hpp"
#include "ldgmin/postprocess.hpp"
#include "support.hpp"

using namespace ldgmin;

namespace {

double eval_divergence(const Mesh& mesh, const Eigen::VectorXd& phi, int k, int t, const Vec2& x) {
  const int m = poly_dim(k - 1);
  const Eigen::MatrixXd g = cell_basis_gradient(mesh, t, k - 1, x);
  return g.col(0).dot(phi.segment(t * 2 * m, m)) + g.col(1).dot(phi.segment(t * 2 * m + m, m));
}

template <class F>
double cell_integral(const Mesh& mesh, F&& f, int degree) {
  const QuadratureRule& rule = triangle_rule(degree);
  double s = 0.0;
  for (int t = 0; t < mesh.num_cells(); ++t) {
    const CellGeometry& geo = mesh.geometry(t);
    for (Eigen::Index q = 0; q < rule.size(); ++q) s += rule.weights(q) * geo.det * f(t, geo.to_physical(rule.points.col(q)));
  }
  return s;
}

// sum over faces with the given filter of int_S g(face, x)
template <class F, class Keep>
double face_integral(const Mesh& mesh, F&& g, Keep&& keep, int degree) {
  const QuadratureRule& rule = edge_rule(degree);
  double s = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(f);
    if (!keep(face)) continue;
    const Vec2 a = mesh.vertex(face.vertices[0]), b = mesh.vertex(face.vertices[1]);
    for (Eigen::Index q = 0; q < rule.size(); ++q) s += rule.weights(q) * face.diameter * g(f, a + rule.points(0, q) * (b - a));
  }
  return s;
}

ProblemConfig config(const EnergyDensity& w, int k, const BoundarySpec& spec = BoundarySpec::all_dirichlet()) {
  ProblemConfig cfg;
  cfg.density = w;
  cfg.degree = k;
  cfg.boundary = spec;
  return cfg;
}

}  // namespace

TEST_SUITE("ldg") {
  TEST_CASE("defining identity and the average form") {
    for (int k = 1; k <= 3; ++k) {
      const Mesh mesh = testing::lshape(1, BoundarySpec::reentrant_edges());
      const DiscreteGradientOperator op = assemble_gradient(mesh, k);
      CHECK(op.matrix.rows() == mesh.num_cells() * 2 * poly_dim(k - 1));
      CHECK(op.matrix.cols() == mesh.num_cells() * poly_dim(k));
      for (int trial = 0; trial < 5; ++trial) {
        const DgFunction v = testing::random_dg(mesh, k);
        const Eigen::VectorXd phi = testing::random_vector(op.matrix.rows());
        const double lhs = (op.matrix * v.coeffs).dot(phi);

        const double volume = cell_integral(
            mesh, [&](int t, const Vec2& x) { return evaluate_gradient(mesh, v, t, x).dot(testing::vector_at(mesh, phi, k, t, x)); },
            2 * k);
        const double lifting = face_integral(
            mesh,
            [&](int f, const Vec2& x) {
              const Face& face = mesh.face(f);
              const double jump = trace_values(mesh, v, f, {x}).jump[0];
              Vec2 avg = testing::vector_at(mesh, phi, k, face.plus_cell, x);
              if (!face.is_boundary()) avg = 0.5 * (avg + testing::vector_at(mesh, phi, k, face.minus_cell, x));
              return jump * avg.dot(face.normal);
            },
            [](const Face& face) { return face.label != FaceLabel::Neumann; }, 2 * k);
        const double rhs = volume - lifting;
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(volume) + std::abs(lifting)));

        // -int v div Phi + sum over F \ F_D of int {v} [Phi] . nu
        const double by_parts = cell_integral(
            mesh, [&](int t, const Vec2& x) { return -evaluate(mesh, v, t, x) * eval_divergence(mesh, phi, k, t, x); },
            2 * k);
        const double averages = face_integral(
            mesh,
            [&](int f, const Vec2& x) {
              const Face& face = mesh.face(f);
              const double avg = trace_values(mesh, v, f, {x}).average[0];
              Vec2 jump = testing::vector_at(mesh, phi, k, face.plus_cell, x);
              if (!face.is_boundary()) jump -= testing::vector_at(mesh, phi, k, face.minus_cell, x);
              return avg * jump.dot(face.normal);
            },
            [](const Face& face) { return face.label != FaceLabel::Dirichlet; }, 2 * k);
        CHECK(std::abs(lhs - (by_parts + averages)) <= 1e-10 * (std::abs(by_parts) + std::abs(averages)));
      }
    }
  }

  TEST_CASE("affine functions without Dirichlet faces") {
    const Mesh mesh = testing::lshape(1, testing::all_neumann());
    const DgFunction v = project([](const Vec2& x) { return 0.5 + 2 * x.x() - 3 * x.y(); }, mesh, 2, 4);
    const DiscreteGradientOperator op = assemble_gradient(mesh, 2);
    const Eigen::VectorXd g = op.matrix * v.coeffs;
    for (int t = 0; t < mesh.num_cells(); ++t) {
      const Vec2 x = testing::point_in_cell(mesh, t);
      CHECK((testing::vector_at(mesh, g, 2, t, x) - Vec2(2, -3)).norm() < 1e-12);
    }
  }

  TEST_CASE("continuous functions vanishing on the Dirichlet part") {
    const Mesh mesh = testing::lshape(1, BoundarySpec::reentrant_edges());
    for (int k = 1; k <= 3; ++k) {
      const ConformingFunction vc = nodal_average(mesh, testing::random_dg(mesh, k));
      const DiscreteGradientOperator op = assemble_gradient(mesh, k);
      CHECK((op.lifting * vc.dg.coeffs).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(stabilization(mesh, vc.dg, vc.dg, 2.0, 1.0) < 1e-24);
      CHECK(stabilization(mesh, vc.dg, vc.dg, 3.0, 1.0) < 1e-24);
    }
  }

  TEST_CASE("stabilization vanishes only on continuous functions with zero Dirichlet trace") {
    const Mesh mesh = testing::lshape(1, BoundarySpec::reentrant_edges());
    const ConformingFunction vc = nodal_average(mesh, testing::random_dg(mesh, 2));
    CHECK(stabilization(mesh, vc.dg, vc.dg, 2.0, 1.0) <= 1e-12);
    // a small discontinuity on one cell
    DgFunction broken = vc.dg;
    broken.cell(3)(0) += 1e-3;
    CHECK(stabilization(mesh, broken, broken, 2.0, 1.0) > 1e-12);
    // continuous but nonzero on a Dirichlet face
    const DgFunction one = project([](const Vec2&) { return 1.0; }, mesh, 2, 2);
    CHECK(stabilization(mesh, one, one, 2.0, 1.0) > 1e-12);
    // continuous and nonzero only on Neumann faces
    const Mesh neumann = testing::lshape(1, testing::all_neumann());
    const DgFunction one_n = project([](const Vec2&) { return 1.0; }, neumann, 2, 2);
    CHECK(stabilization(neumann, one_n, one_n, 2.0, 1.0) <= 1e-12);
  }

  TEST_CASE("quadratic stabilization is symmetric and bilinear") {
    const Mesh mesh = testing::lshape(1, BoundarySpec::reentrant_edges());
    for (int i = 0; i < 10; ++i) {
      const DgFunction v = testing::random_dg(mesh, 2), w = testing::random_dg(mesh, 2), z = testing::random_dg(mesh, 2);
      const double a = testing::uniform();
      const double svw = stabilization(mesh, v, w, 2.0, 1.0);
      CHECK(svw == doctest::Approx(stabilization(mesh, w, v, 2.0, 1.0)).epsilon(1e-13));
      const DgFunction combo(2, Eigen::VectorXd(a * w.coeffs + z.coeffs));
      CHECK(stabilization(mesh, v, combo, 2.0, 1.0) ==
            doctest::Approx(a * svw + stabilization(mesh, v, z, 2.0, 1.0)).epsilon(1e-12));
    }
  }

  TEST_CASE("single face with constant jump") {
    const Mesh mesh = initial_unit_square(testing::all_neumann());
    const double c = 0.7;
    DgFunction v(1, mesh.num_cells());
    v.cell(0) = project_cell([c](const Vec2&) { return c; }, mesh, 0, 1, 2);
    int interior = 0;
    for (int f = 0; f < mesh.num_faces(); ++f)
      if (!mesh.face(f).is_boundary()) interior = f;
    const double hs = mesh.face(interior).diameter;
    CHECK(stabilization(mesh, v, v, 2.0, 1.0) == doctest::Approx(c * c * hs / hs).epsilon(1e-14));
  }

  TEST_CASE("discrete consistency bound with a mesh-independent constant") {
    // |grad_pw v - G v|^2 <= C sum_S h_S^{-1} |[v]|^2_{L2(S)} for p = 2
    const int k = 2;
    auto worst_ratio = [&](const Mesh& mesh) {
      const DiscreteGradientOperator op = assemble_gradient(mesh, k);
      double worst = 0.0;
      for (int i = 0; i < 200; ++i) {
        const DgFunction v = testing::random_dg(mesh, k);
        // grad_pw v lies in P_{k-1}, so L v holds its difference to G v exactly
        const double lhs = (op.lifting * v.coeffs).squaredNorm();
        const double rhs = stabilization(mesh, v, v, 2.0, 1.0);
        worst = std::max(worst, lhs / rhs);
      }
      return worst;
    };
    Mesh mesh = initial_lshape(BoundarySpec::reentrant_edges());
    const double constant = worst_ratio(mesh);
    for (int level = 0; level < 2; ++level) {
      mesh = refine_uniform(mesh);
      CHECK(worst_ratio(mesh) <= 2.0 * constant);
    }
  }

  TEST_CASE("energy at zero") {
    const Mesh mesh = testing::lshape(1);
    const LdgSystem sys(mesh, config(p_laplace(4.0), 2));
    CHECK(sys.energy(Eigen::VectorXd::Zero(sys.ndof())) == 0.0);
  }

  TEST_CASE("gradient and Hessian against finite differences") {
    const OptimalDesignParameters odp;
    const EnergyDensity densities[] = {p_laplace(4.0), optimal_design(odp), bingham_regularized(1.0, 0.2, 1e-2),
                                       p_laplace(2.0)};
    for (const EnergyDensity& w : densities) {
      for (double r : {2.0, 3.0}) {
        INFO(w.name() << " r = " << r);
        const Mesh mesh = testing::lshape(0, BoundarySpec::reentrant_edges());
        ProblemConfig cfg = config(w, 2, BoundarySpec::reentrant_edges());
        cfg.r = r;
        const LdgSystem sys(mesh, cfg);
        const Eigen::VectorXd u = testing::random_vector(sys.ndof(), 0.3);
        const Eigen::VectorXd g = sys.gradient(u);
        const double h = 1e-6;
        Eigen::VectorXd fd(u.size());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
          Eigen::VectorXd e = Eigen::VectorXd::Zero(u.size());
          e(i) = h;
          fd(i) = (sys.energy(u + e) - sys.energy(u - e)) / (2 * h);
        }
        CHECK((fd - g).norm() <= 1e-6 * g.norm());
        const SparseMatrix hess = sys.hessian(u);
        CHECK((SparseMatrix(hess.transpose()) - hess).norm() <= 1e-12 * hess.norm());
        const Eigen::VectorXd dir = testing::random_vector(u.size());
        const Eigen::VectorXd hv = hess * dir;
        const Eigen::VectorXd fdv = (sys.gradient(u + h * dir) - sys.gradient(u - h * dir)) / (2 * h);
        CHECK((fdv - hv).norm() <= 1e-4 * hv.norm());
      }
    }
  }

  TEST_CASE("energy is convex along segments") {
    const Mesh mesh = testing::lshape(1, BoundarySpec::reentrant_edges());
    const LdgSystem sys(mesh, config(p_laplace(4.0), 1, BoundarySpec::reentrant_edges()));
    for (int i = 0; i < 100; ++i) {
      const Eigen::VectorXd a = testing::random_vector(sys.ndof()), b = testing::random_vector(sys.ndof());
      const double mean = 0.5 * (sys.energy(a) + sys.energy(b));
      CHECK(sys.energy(0.5 * (a + b)) <= mean + 1e-12);
    }
  }

  TEST_CASE("load vector is the projection of f") {
    const Mesh mesh = testing::lshape(1);
    ProblemConfig cfg = config(p_laplace(2.0), 2);
    cfg.load = [](const Vec2& x) { return 1.0 + x.x() * x.y(); };
    const LdgSystem sys(mesh, cfg);
    const DgFunction fh(2, sys.load());
    for (int t = 0; t < mesh.num_cells(); ++t) {
      const Vec2 x = testing::point_in_cell(mesh, t);
      CHECK(evaluate(mesh, fh, t, x) == doctest::Approx(cfg.load(x)).epsilon(1e-12));
    }
  }

  TEST_CASE("overflow is reported with the cell") {
    const Mesh mesh = testing::lshape(0);
    const LdgSystem sys(mesh, config(p_laplace(4.0), 1));
    Eigen::VectorXd u = Eigen::VectorXd::Zero(sys.ndof());
    u(4) = 1e100;
    try {
      sys.energy(u);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("cell") != std::string::npos);
    }
  }

  TEST_CASE("configuration checks") {
    const Mesh mesh = testing::lshape(0);
    ProblemConfig cfg = config(p_laplace(2.0), 0);
    CHECK_THROWS_AS(LdgSystem(mesh, cfg), ConfigError);
    cfg.degree = 1;
    cfg.r = 1.0;
    CHECK_THROWS_AS(LdgSystem(mesh, cfg), ConfigError);
    cfg.r = 2.0;
    CHECK(cfg.volume_quadrature_degree() == 5);
    cfg.density = p_laplace(4.0);
    cfg.degree = 2;
    CHECK(cfg.volume_quadrature_degree() == 17);
  }
}
