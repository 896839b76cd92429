#ifndef LDGMIN_TESTS_SUPPORT_HPP
#define LDGMIN_TESTS_SUPPORT_HPP

#include <random>
#include <vector>

#include "ldgmin/femspace.hpp"
#include "ldgmin/mesh.hpp"

namespace testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Eigen::VectorXd random_vector(Eigen::Index n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * uniform();
  return v;
}

inline ldgmin::DgFunction random_dg(const ldgmin::Mesh& mesh, int k, double scale = 1.0) {
  return ldgmin::DgFunction(k, random_vector(mesh.num_cells() * ldgmin::poly_dim(k), scale));
}

inline ldgmin::Vec2 random_point(double radius = 1.0) { return ldgmin::Vec2(uniform(-radius, radius), uniform(-radius, radius)); }

inline ldgmin::BoundarySpec all_neumann() {
  return {[](const ldgmin::Vec2&) { return false; }};
}

/// Random point inside triangle t.
inline ldgmin::Vec2 point_in_cell(const ldgmin::Mesh& mesh, int t) {
  double a = uniform(0.0, 1.0), b = uniform(0.0, 1.0);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return mesh.geometry(t).to_physical(ldgmin::Vec2(a, b));
}

/// Value at x in cell t of a P_{k-1} vector field stored in the row layout of
/// the discrete gradient.
inline ldgmin::Vec2 vector_at(const ldgmin::Mesh& mesh, const Eigen::VectorXd& field, int k, int t,
                              const ldgmin::Vec2& x) {
  const int m = ldgmin::poly_dim(k - 1);
  const Eigen::VectorXd b = ldgmin::cell_basis(mesh, t, k - 1, x);
  return ldgmin::Vec2(b.dot(field.segment(t * 2 * m, m)), b.dot(field.segment(t * 2 * m + m, m)));
}

/// Uniformly refined L-shape.
inline ldgmin::Mesh lshape(int refinements, const ldgmin::BoundarySpec& spec = ldgmin::BoundarySpec::all_dirichlet()) {
  ldgmin::Mesh mesh = ldgmin::initial_lshape(spec);
  for (int i = 0; i < refinements; ++i) mesh = ldgmin::refine_uniform(mesh);
  return mesh;
}

}  // namespace testing

#endif  // LDGMIN_TESTS_SUPPORT_HPP
