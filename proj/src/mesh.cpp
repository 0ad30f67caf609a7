#include "ndgdm/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ndgdm {

double Mesh::area(int k) const {
  const auto& t = triangles[k];
  const Eigen::Vector2d e1 = vertices[t[1]] - vertices[t[0]];
  const Eigen::Vector2d e2 = vertices[t[2]] - vertices[t[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Eigen::Vector2d Mesh::centroid(int k) const {
  const auto& t = triangles[k];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

Eigen::Matrix2d Mesh::jacobian(int k) const {
  const auto& t = triangles[k];
  Eigen::Matrix2d j;
  j.col(0) = vertices[t[1]] - vertices[t[0]];
  j.col(1) = vertices[t[2]] - vertices[t[0]];
  return j;
}

Eigen::Vector2d Mesh::map_point(int k, const Eigen::Vector2d& ref) const {
  return vertices[triangles[k][0]] + jacobian(k) * ref;
}

Eigen::Vector2d Mesh::reference_vertex(int k, int v) const {
  const auto& t = triangles[k];
  if (v == t[0]) return {0.0, 0.0};
  if (v == t[1]) return {1.0, 0.0};
  if (v == t[2]) return {0.0, 1.0};
  throw TopologyError("vertex " + std::to_string(v) + " is not part of triangle " +
                      std::to_string(k));
}

void update_diameters(Mesh& mesh) {
  mesh.h.resize(mesh.triangles.size());
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    double d = 0.0;
    for (int e = 0; e < 3; ++e)
      d = std::max(d, (mesh.vertices[t[e]] - mesh.vertices[t[(e + 1) % 3]]).norm());
    mesh.h[k] = d;
  }
}

Mesh build_uniform_square_mesh(int n) {
  Mesh mesh;
  mesh.vertices.reserve((n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.emplace_back(double(i) / n, double(j) / n);

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  mesh.triangles.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // diagonal always from the lower-left to the upper-right corner
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  mesh.material.assign(mesh.triangles.size(), 0);
  update_diameters(mesh);
  return mesh;
}

namespace {

struct EdgeUse {
  int element;
  int a, b;  // vertex ids in the element's traversal order
};

std::map<std::pair<int, int>, std::vector<EdgeUse>> collect_edges(const Mesh& mesh) {
  std::map<std::pair<int, int>, std::vector<EdgeUse>> edges;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      edges[{std::min(a, b), std::max(a, b)}].push_back({k, a, b});
    }
  }
  return edges;
}

}  // namespace

std::vector<Face> build_face_topology(const Mesh& mesh, const DirichletPredicate& dirichlet) {
  for (int k = 0; k < mesh.n_triangles(); ++k)
    if (mesh.area(k) <= 0.0)
      throw TopologyError("triangle " + std::to_string(k) + " has nonpositive area");

  const auto edges = collect_edges(mesh);
  std::vector<Face> faces;
  faces.reserve(edges.size());
  for (const auto& [key, uses] : edges) {
    if (uses.size() > 2)
      throw TopologyError("edge (" + std::to_string(key.first) + "," +
                          std::to_string(key.second) + ") is shared by " +
                          std::to_string(uses.size()) + " triangles");
    Face f;
    const Eigen::Vector2d pa = mesh.vertices[key.first];
    const Eigen::Vector2d pb = mesh.vertices[key.second];
    f.ends = {key.first, key.second};
    f.length = (pb - pa).norm();
    if (uses.size() == 2) {
      f.kind = FaceKind::interior;
      f.left = std::min(uses[0].element, uses[1].element);
      f.right = std::max(uses[0].element, uses[1].element);
      f.h = std::max(mesh.h[f.left], mesh.h[f.right]);
    } else {
      f.left = uses[0].element;
      f.h = mesh.h[f.left];
      const Eigen::Vector2d mid = 0.5 * (pa + pb);
      const bool dir = dirichlet ? dirichlet(mid) : true;
      f.kind = dir ? FaceKind::dirichlet : FaceKind::neumann;
    }
    // unit normal pointing away from the left element
    const Eigen::Vector2d tangent = (pb - pa) / f.length;
    Eigen::Vector2d normal(tangent.y(), -tangent.x());
    const Eigen::Vector2d to_left = mesh.centroid(f.left) - 0.5 * (pa + pb);
    if (normal.dot(to_left) > 0.0) normal = -normal;
    f.normal = normal;
    faces.push_back(f);
  }
  return faces;
}

std::vector<std::array<int, 3>> element_neighbors(const Mesh& mesh) {
  const auto edges = collect_edges(mesh);
  std::vector<std::array<int, 3>> neighbors(mesh.n_triangles(), {-1, -1, -1});
  for (const auto& [key, uses] : edges) {
    if (uses.size() != 2) continue;
    for (int s = 0; s < 2; ++s) {
      const auto& use = uses[s];
      const auto& t = mesh.triangles[use.element];
      for (int e = 0; e < 3; ++e)
        if (t[e] == use.a && t[(e + 1) % 3] == use.b)
          neighbors[use.element][e] = uses[1 - s].element;
    }
  }
  return neighbors;
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "ndgdm " << mesh.n_vertices() << ' ' << mesh.n_triangles() << '\n';
  char buf[64];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x(), v.y());
    out << buf;
  }
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const auto& t = mesh.triangles[k];
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << mesh.material[k] << '\n';
  }
  if (!out) throw Error("write to '" + path + "' failed");
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");

  auto fail = [&](int line, const std::string& what) {
    throw ParseError(path + ":" + std::to_string(line) + ": " + what);
  };

  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) fail(lineno + 1, "unexpected end of file");
    ++lineno;
    return std::istringstream(line);
  };

  auto header = next_line();
  std::string magic;
  int nv = 0, nt = 0;
  if (!(header >> magic >> nv >> nt) || magic != "ndgdm")
    fail(lineno, "expected header 'ndgdm <nv> <nt>'");
  if (nv < 3 || nt < 1) fail(lineno, "implausible mesh sizes");

  Mesh mesh;
  mesh.vertices.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    auto s = next_line();
    double x = 0, y = 0;
    if (!(s >> x >> y)) fail(lineno, "expected vertex line 'x y'");
    mesh.vertices.emplace_back(x, y);
  }
  mesh.triangles.reserve(nt);
  mesh.material.reserve(nt);
  for (int k = 0; k < nt; ++k) {
    auto s = next_line();
    int a = 0, b = 0, c = 0, m = 0;
    if (!(s >> a >> b >> c >> m)) fail(lineno, "expected triangle line 'v0 v1 v2 material'");
    for (int v : {a, b, c})
      if (v < 0 || v >= nv)
        fail(lineno, "vertex index " + std::to_string(v) + " out of range [0," +
                         std::to_string(nv - 1) + "]");
    mesh.triangles.push_back({a, b, c});
    mesh.material.push_back(m);
    if (mesh.area(k) <= 0.0) fail(lineno, "triangle has nonpositive area");
  }
  update_diameters(mesh);
  return mesh;
}

}  // namespace ndgdm
