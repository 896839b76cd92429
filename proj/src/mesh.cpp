#include "ldgmin/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace ldgmin {

namespace {

constexpr double kGeomTol = 1e-14;

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

}  // namespace

char label_code(FaceLabel label) {
  switch (label) {
    case FaceLabel::Interior: return 'I';
    case FaceLabel::Dirichlet: return 'D';
    case FaceLabel::Neumann: return 'N';
  }
  return '?';
}

BoundarySpec BoundarySpec::all_dirichlet() {
  return {[](const Vec2&) { return true; }};
}

BoundarySpec BoundarySpec::reentrant_edges() {
  return {[](const Vec2& m) {
    const bool vertical = std::abs(m.x()) < 1e-12 && m.y() <= 1e-12 && m.y() >= -1.0 - 1e-12;
    const bool horizontal = std::abs(m.y()) < 1e-12 && m.x() >= -1e-12 && m.x() <= 1.0 + 1e-12;
    return vertical || horizontal;
  }};
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles, BoundarySpec boundary,
           std::vector<int> generation, std::vector<int> parent)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_(std::move(boundary)),
      generation_(std::move(generation)),
      parent_(std::move(parent)) {
  const int nt = num_cells();
  if (generation_.empty()) generation_.assign(nt, 0);
  if (parent_.empty()) parent_.assign(nt, -1);
  if (static_cast<int>(generation_.size()) != nt || static_cast<int>(parent_.size()) != nt) {
    throw std::invalid_argument("Mesh: generation/parent size mismatch");
  }

  geometry_.resize(nt);
  diameters_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= num_vertices()) throw std::invalid_argument("Mesh: vertex index out of range");
    }
    const Vec2& p0 = vertices_[tri[0]];
    const Vec2& p1 = vertices_[tri[1]];
    const Vec2& p2 = vertices_[tri[2]];
    const double area = signed_area(p0, p1, p2);
    const double scale = std::max({(p1 - p0).squaredNorm(), (p2 - p0).squaredNorm(), 1e-300});
    if (area <= kGeomTol * scale) {
      throw std::invalid_argument("Mesh: triangle " + std::to_string(t) +
                                  " is not counterclockwise or degenerate");
    }
    CellGeometry& g = geometry_[t];
    g.origin = p0;
    g.jacobian.col(0) = p1 - p0;
    g.jacobian.col(1) = p2 - p0;
    g.det = g.jacobian.determinant();
    g.inverse = g.jacobian.inverse();
    diameters_[t] = std::max({(p1 - p0).norm(), (p2 - p1).norm(), (p0 - p2).norm()});
  }

  // Faces in order of first appearance (cell-major, local edge order).
  std::unordered_map<std::uint64_t, int> face_of_edge;
  cell_faces_.assign(nt, {-1, -1, -1});
  for (int t = 0; t < nt; ++t) {
    for (int e = 0; e < 3; ++e) {
      const int a = triangles_[t][(e + 1) % 3];
      const int b = triangles_[t][(e + 2) % 3];
      auto [it, inserted] = face_of_edge.try_emplace(edge_key(a, b), num_faces());
      if (inserted) {
        Face f;
        f.vertices = {std::min(a, b), std::max(a, b)};
        f.plus_cell = t;
        f.plus_local = e;
        const Vec2 d = vertices_[b] - vertices_[a];
        f.diameter = d.norm();
        f.normal = Vec2(d.y(), -d.x()) / f.diameter;
        faces_.push_back(f);
      } else {
        Face& f = faces_[it->second];
        if (f.minus_cell >= 0) {
          throw std::invalid_argument("Mesh: edge shared by more than two triangles");
        }
        // plus_cell is the lower cell index; cells are visited in increasing order.
        f.minus_cell = t;
        f.minus_local = e;
      }
      cell_faces_[t][e] = it->second;
    }
  }
  for (Face& f : faces_) {
    if (f.is_boundary()) {
      f.label = boundary_.classify(0.5 * (vertices_[f.vertices[0]] + vertices_[f.vertices[1]]));
    } else {
      f.label = FaceLabel::Interior;
    }
  }
}

Vec2 Mesh::centroid(int t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

double Mesh::h_max() const {
  return diameters_.empty() ? 0.0 : *std::max_element(diameters_.begin(), diameters_.end());
}

double Mesh::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < num_cells(); ++t) sum += area(t);
  return sum;
}

std::vector<std::array<int, 3>> with_longest_edge_first(const std::vector<Vec2>& vertices,
                                                        std::vector<std::array<int, 3>> triangles) {
  for (auto& tri : triangles) {
    int best = 0;
    double longest = -1.0;
    for (int e = 0; e < 3; ++e) {
      const double len = (vertices[tri[(e + 1) % 3]] - vertices[tri[(e + 2) % 3]]).norm();
      if (len > longest * (1.0 + 1e-12)) {
        longest = len;
        best = e;
      }
    }
    std::rotate(tri.begin(), tri.begin() + best, tri.end());
  }
  return triangles;
}

Mesh initial_lshape(const BoundarySpec& boundary) {
  std::vector<Vec2> v = {{-1, -1}, {0, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}};
  std::vector<std::array<int, 3>> t = {{0, 1, 3}, {0, 3, 2}, {2, 3, 5}, {3, 6, 5}, {3, 4, 7}, {3, 7, 6}};
  auto tris = with_longest_edge_first(v, std::move(t));
  return Mesh(std::move(v), std::move(tris), boundary);
}

Mesh initial_unit_square(const BoundarySpec& boundary) {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  std::vector<std::array<int, 3>> t = {{0, 1, 3}, {0, 3, 2}};
  auto tris = with_longest_edge_first(v, std::move(t));
  return Mesh(std::move(v), std::move(tris), boundary);
}

Mesh refine(const Mesh& mesh, std::span<const int> marked) {
  const int nt = mesh.num_cells();
  std::vector<Vec2> vertices = mesh.vertices();
  std::unordered_map<std::uint64_t, int> midpoint;

  auto mark_edge = [&](int a, int b) {
    auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), -1);
    if (inserted) {
      it->second = static_cast<int>(vertices.size());
      vertices.push_back(0.5 * (vertices[a] + vertices[b]));
    }
    return inserted;
  };
  auto is_marked = [&](int a, int b) { return midpoint.count(edge_key(a, b)) > 0; };

  for (int t : marked) {
    if (t < 0 || t >= nt) throw std::out_of_range("refine: marked cell index out of range");
    const auto& tri = mesh.triangle(t);
    mark_edge(tri[1], tri[2]);
  }
  // Closure: a triangle with any marked edge must also bisect its refinement edge.
  for (bool changed = true; changed;) {
    changed = false;
    for (int t = 0; t < nt; ++t) {
      const auto& tri = mesh.triangle(t);
      if (is_marked(tri[1], tri[2])) continue;
      if (is_marked(tri[0], tri[1]) || is_marked(tri[2], tri[0])) {
        mark_edge(tri[1], tri[2]);
        changed = true;
      }
    }
  }

  std::vector<std::array<int, 3>> triangles;
  std::vector<int> generation, parent;
  triangles.reserve(nt + 2 * midpoint.size());
  std::function<void(const std::array<int, 3>&, int, int)> split =
      [&](const std::array<int, 3>& tri, int gen, int ancestor) {
        auto it = midpoint.find(edge_key(tri[1], tri[2]));
        if (it == midpoint.end()) {
          triangles.push_back(tri);
          generation.push_back(gen);
          parent.push_back(ancestor);
          return;
        }
        const int m = it->second;
        split({m, tri[0], tri[1]}, gen + 1, ancestor);
        split({m, tri[2], tri[0]}, gen + 1, ancestor);
      };
  for (int t = 0; t < nt; ++t) split(mesh.triangle(t), mesh.generation(t), t);

  return Mesh(std::move(vertices), std::move(triangles), mesh.boundary(), std::move(generation),
              std::move(parent));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<int> all(mesh.num_cells());
  std::iota(all.begin(), all.end(), 0);
  const Mesh once = refine(mesh, all);
  all.resize(once.num_cells());
  std::iota(all.begin(), all.end(), 0);
  const Mesh twice = refine(once, all);
  std::vector<int> generation(twice.num_cells()), parent(twice.num_cells());
  for (int t = 0; t < twice.num_cells(); ++t) {
    generation[t] = twice.generation(t);
    parent[t] = once.parent(twice.parent(t));
  }
  return Mesh(twice.vertices(), twice.triangles(), mesh.boundary(), std::move(generation), std::move(parent));
}

bool has_hanging_nodes(const Mesh& mesh) {
  // Newest-vertex bisection only creates midpoints, so a hanging node would sit
  // exactly at the midpoint of an edge that still exists.
  struct Hash {
    std::size_t operator()(const std::pair<double, double>& p) const {
      return std::hash<double>()(p.first) ^ (std::hash<double>()(p.second) * 1315423911u);
    }
  };
  std::unordered_map<std::pair<double, double>, int, Hash> by_position;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    by_position.emplace(std::make_pair(mesh.vertex(v).x(), mesh.vertex(v).y()), v);
  }
  for (const Face& f : mesh.faces()) {
    const Vec2 m = 0.5 * (mesh.vertex(f.vertices[0]) + mesh.vertex(f.vertices[1]));
    if (by_position.count({m.x(), m.y()})) return true;
  }
  return false;
}

double min_angle(const Mesh& mesh) {
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& tri : mesh.triangles()) {
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = mesh.vertex(tri[(i + 1) % 3]) - mesh.vertex(tri[i]);
      const Vec2 b = mesh.vertex(tri[(i + 2) % 3]) - mesh.vertex(tri[i]);
      smallest = std::min(smallest, std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0)));
    }
  }
  return smallest;
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "vertices " << mesh.num_vertices() << " / triangles " << mesh.num_cells() << " / faces "
      << mesh.num_faces() << '\n';
  out << std::setprecision(17);
  for (const Vec2& v : mesh.vertices()) out << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const Face& f : mesh.faces()) {
    out << f.vertices[0] << ' ' << f.vertices[1] << ' ' << f.plus_cell << ' ' << f.minus_cell << ' '
        << label_code(f.label) << '\n';
  }
}

Mesh read_mesh(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_mesh: missing header");
  std::istringstream header(line);
  std::string w1, s1, w2, s2, w3;
  int nv = 0, nt = 0, nf = 0;
  if (!(header >> w1 >> nv >> s1 >> w2 >> nt >> s2 >> w3 >> nf) || w1 != "vertices" || w2 != "triangles" ||
      w3 != "faces") {
    throw std::runtime_error("read_mesh: malformed header: " + line);
  }
  std::vector<Vec2> vertices(nv);
  for (auto& v : vertices) in >> v.x() >> v.y();
  std::vector<std::array<int, 3>> triangles(nt);
  for (auto& t : triangles) in >> t[0] >> t[1] >> t[2];
  struct Segment {
    Vec2 a, b;
    bool dirichlet;
  };
  std::vector<Segment> boundary_faces;
  for (int f = 0; f < nf; ++f) {
    int a, b, plus, minus;
    char label;
    in >> a >> b >> plus >> minus >> label;
    if (label == 'D' || label == 'N') boundary_faces.push_back({vertices.at(a), vertices.at(b), label == 'D'});
  }
  if (!in) throw std::runtime_error("read_mesh: truncated input");
  // Midpoints of refined boundary edges still lie on one of the labeled edges.
  BoundarySpec spec{[boundary_faces](const Vec2& m) {
    for (const Segment& s : boundary_faces) {
      const Vec2 d = s.b - s.a;
      const double t = (m - s.a).dot(d) / d.squaredNorm();
      if (t >= -1e-12 && t <= 1.0 + 1e-12 && (s.a + t * d - m).norm() <= 1e-12 * (1.0 + d.norm())) return s.dirichlet;
    }
    throw std::runtime_error("read_mesh: boundary edge without a label");
  }};
  return Mesh(std::move(vertices), std::move(triangles), std::move(spec));
}

}  // namespace ldgmin
