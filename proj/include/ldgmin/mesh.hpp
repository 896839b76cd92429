#ifndef LDGMIN_MESH_HPP
#define LDGMIN_MESH_HPP

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace ldgmin {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class FaceLabel { Interior, Dirichlet, Neumann };

char label_code(FaceLabel label);

/// Splits the boundary into Dirichlet and Neumann parts by looking at the
/// midpoint of each boundary edge.
struct BoundarySpec {
  std::function<bool(const Vec2& midpoint)> is_dirichlet;

  FaceLabel classify(const Vec2& midpoint) const {
    return is_dirichlet(midpoint) ? FaceLabel::Dirichlet : FaceLabel::Neumann;
  }

  static BoundarySpec all_dirichlet();
  /// Dirichlet on {0} x [-1, 0] and [0, 1] x {0} (the two re-entrant edges of
  /// the L-shape), Neumann elsewhere.
  static BoundarySpec reentrant_edges();
};

/// An edge of the triangulation. The face parameter runs from vertices[0],
/// the lower global vertex index, to vertices[1].
struct Face {
  std::array<int, 2> vertices{};
  int plus_cell = -1;
  int minus_cell = -1;   // -1 on boundary faces
  int plus_local = -1;   // local edge index inside plus_cell
  int minus_local = -1;
  Vec2 normal = Vec2::Zero();  // unit, outward from plus_cell
  double diameter = 0.0;
  FaceLabel label = FaceLabel::Interior;

  bool is_boundary() const { return minus_cell < 0; }
};

/// Affine map x = origin + jacobian * xi from the reference triangle.
struct CellGeometry {
  Vec2 origin;
  Mat2 jacobian;
  Mat2 inverse;
  double det = 0.0;  // 2 |K|

  Vec2 to_physical(const Vec2& xi) const { return origin + jacobian * xi; }
  Vec2 to_reference(const Vec2& x) const { return inverse * (x - origin); }
};

/// Conforming triangulation. Triangles are counterclockwise and stored in
/// newest-vertex order: local vertex 0 is the newest vertex and local edge 0
/// (opposite to it) is the refinement edge. Local edge e joins local vertices
/// e+1 and e+2 (mod 3). Immutable after construction.
class Mesh {
 public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles, BoundarySpec boundary,
       std::vector<int> generation = {}, std::vector<int> parent = {});

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(triangles_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Face>& faces() const { return faces_; }
  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  const Face& face(int f) const { return faces_[f]; }
  /// Global face index of local edge e of triangle t.
  int cell_face(int t, int e) const { return cell_faces_[t][e]; }
  const CellGeometry& geometry(int t) const { return geometry_[t]; }
  double area(int t) const { return 0.5 * geometry_[t].det; }
  double diameter(int t) const { return diameters_[t]; }
  Vec2 centroid(int t) const;
  int generation(int t) const { return generation_[t]; }
  /// Index of the ancestor in the mesh this one was refined from (-1 on an initial mesh).
  int parent(int t) const { return parent_[t]; }
  int refinement_edge(int) const { return 0; }
  const BoundarySpec& boundary() const { return boundary_; }

  double h_max() const;
  double total_area() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  BoundarySpec boundary_;
  std::vector<int> generation_;
  std::vector<int> parent_;
  std::vector<Face> faces_;
  std::vector<std::array<int, 3>> cell_faces_;
  std::vector<CellGeometry> geometry_;
  std::vector<double> diameters_;
};

/// Rotates each counterclockwise triangle so that its longest edge becomes the
/// refinement edge (first longest edge on ties).
std::vector<std::array<int, 3>> with_longest_edge_first(const std::vector<Vec2>& vertices,
                                                        std::vector<std::array<int, 3>> triangles);

/// The L-shaped domain (-1,1)^2 \ [0,1) x (-1,0] split into 6 right isosceles
/// triangles whose diagonals meet at the re-entrant corner.
Mesh initial_lshape(const BoundarySpec& boundary);

/// The unit square (0,1)^2 split into 2 triangles along the diagonal y = x.
Mesh initial_unit_square(const BoundarySpec& boundary);

/// Newest-vertex bisection of the marked triangles plus the conforming closure.
/// parent() of the result refers to the input mesh.
Mesh refine(const Mesh& mesh, std::span<const int> marked);

/// Two bisection sweeps over all triangles: every triangle gets 4 children.
Mesh refine_uniform(const Mesh& mesh);

/// Returns true if some vertex sits at the midpoint of an edge it does not belong to.
bool has_hanging_nodes(const Mesh& mesh);

/// Smallest interior angle over all triangles (radians).
double min_angle(const Mesh& mesh);

/// Plain-text export: a header "vertices N / triangles M / faces F" followed by
/// N lines "x y", M lines "i j k" and F lines "a b plus minus L" with L in {I, D, N}.
void write_mesh(const Mesh& mesh, std::ostream& out);

/// Reads the format of write_mesh. Boundary labels are taken from the file.
Mesh read_mesh(std::istream& in);

}  // namespace ldgmin

#endif  // LDGMIN_MESH_HPP
