#include "enspod/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

#include "enspod/error.hpp"
#include "enspod/format.hpp"

namespace enspod {

namespace {

std::uint64_t edge_key(int a, int b) {
  auto lo = static_cast<std::uint64_t>(std::min(a, b));
  auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

double length(const Point2& p, const Point2& q) { return std::hypot(q.x - p.x, q.y - p.y); }

double cross(const Point2& o, const Point2& p, const Point2& q) {
  return (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Interior point of segment (a, b), excluding the endpoints.
bool strictly_inside_segment(const Point2& p, const Point2& a, const Point2& b) {
  const double len = length(a, b);
  if (std::abs(cross(a, b, p)) > 1e-12 * len * len) return false;
  const double t = ((p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y)) / (len * len);
  return t > 1e-12 && t < 1.0 - 1e-12;
}

}  // namespace

Mesh::Mesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = n_vertices();
  if (triangles_.empty()) throw ValidationError("mesh has no triangles");
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    auto& tri = triangles_[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) {
        throw ValidationError("triangle " + std::to_string(t) + " references vertex " +
                              std::to_string(v) + " out of range");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw ValidationError("triangle " + std::to_string(t) + " repeats a vertex");
    }
    const double a = cross(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
    if (a == 0.0) throw ValidationError("triangle " + std::to_string(t) + " is degenerate");
    if (a < 0.0) std::swap(tri[1], tri[2]);
  }

  // Edge ownership counts and the oriented copy of each single-owner edge.
  std::unordered_map<std::uint64_t, int> owners;
  owners.reserve(triangles_.size() * 3);
  for (const auto& tri : triangles_) {
    for (int e = 0; e < 3; ++e) {
      int count = ++owners[edge_key(tri[e], tri[(e + 1) % 3])];
      if (count > 2) throw ValidationError("non-conforming mesh: edge shared by more than two triangles");
    }
  }
  std::vector<BoundaryEdge> detected;
  for (const auto& tri : triangles_) {
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      if (owners[edge_key(a, b)] == 1) detected.push_back({a, b, 0});
    }
  }

  // A hanging node shows up as a boundary vertex lying inside another
  // boundary edge.
  {
    std::vector<int> boundary_vertices;
    for (const auto& e : detected) boundary_vertices.push_back(e.a);
    std::sort(boundary_vertices.begin(), boundary_vertices.end());
    boundary_vertices.erase(std::unique(boundary_vertices.begin(), boundary_vertices.end()),
                            boundary_vertices.end());
    for (const auto& e : detected) {
      const Point2& pa = vertices_[e.a];
      const Point2& pb = vertices_[e.b];
      const double xmin = std::min(pa.x, pb.x), xmax = std::max(pa.x, pb.x);
      const double ymin = std::min(pa.y, pb.y), ymax = std::max(pa.y, pb.y);
      for (int v : boundary_vertices) {
        if (v == e.a || v == e.b) continue;
        const Point2& p = vertices_[v];
        if (p.x < xmin || p.x > xmax || p.y < ymin || p.y > ymax) continue;
        if (strictly_inside_segment(p, pa, pb)) {
          throw ValidationError("non-conforming mesh: hanging node " + std::to_string(v));
        }
      }
    }
  }

  if (boundary.empty()) {
    DisjointSets sets(nv);
    for (const auto& e : detected) sets.unite(e.a, e.b);
    // Components ordered by descending length; ties keep discovery order.
    std::vector<int> roots;
    std::unordered_map<int, double> lengths;
    for (const auto& e : detected) {
      const int r = sets.find(e.a);
      if (!lengths.count(r)) roots.push_back(r);
      lengths[r] += length(vertices_[e.a], vertices_[e.b]);
    }
    std::stable_sort(roots.begin(), roots.end(),
                     [&](int p, int q) { return lengths[p] > lengths[q]; });
    std::unordered_map<int, int> marker_of;
    for (std::size_t i = 0; i < roots.size(); ++i) marker_of[roots[i]] = static_cast<int>(i) + 1;
    for (auto& e : detected) e.marker = marker_of[sets.find(e.a)];
    boundary_ = std::move(detected);
  } else {
    std::unordered_map<std::uint64_t, const BoundaryEdge*> oriented;
    for (const auto& e : detected) oriented[edge_key(e.a, e.b)] = &e;
    std::unordered_map<std::uint64_t, int> seen;
    for (const auto& e : boundary) {
      if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv) {
        throw ValidationError("boundary edge references vertex out of range");
      }
      auto it = oriented.find(edge_key(e.a, e.b));
      if (it == oriented.end()) {
        throw ValidationError("listed boundary edge (" + std::to_string(e.a) + ", " +
                              std::to_string(e.b) + ") is not owned by exactly one triangle");
      }
      if (++seen[edge_key(e.a, e.b)] > 1) throw ValidationError("boundary edge listed twice");
      boundary_.push_back({it->second->a, it->second->b, e.marker});
    }
    if (boundary_.size() != detected.size()) {
      throw ValidationError("boundary section lists " + std::to_string(boundary_.size()) +
                            " edges but the mesh has " + std::to_string(detected.size()));
    }
  }

  std::vector<int> markers;
  for (const auto& e : boundary_) markers.push_back(e.marker);
  std::sort(markers.begin(), markers.end());
  n_markers_ = static_cast<int>(std::unique(markers.begin(), markers.end()) - markers.begin());

  for (const auto& tri : triangles_) {
    for (int e = 0; e < 3; ++e) {
      h_ = std::max(h_, length(vertices_[tri[e]], vertices_[tri[(e + 1) % 3]]));
    }
  }
}

double Mesh::signed_area(int t) const {
  const auto& tri = triangles_[t];
  return 0.5 * cross(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh::area() const {
  double total = 0.0;
  for (int t = 0; t < n_triangles(); ++t) total += signed_area(t);
  return total;
}

double mesh_size(const Mesh& mesh) { return mesh.h(); }

Mesh build_structured_square(int n, Rect extent) {
  if (n < 1) throw InvalidArgument("structured mesh needs n >= 1, got " + std::to_string(n));
  if (!(extent.x1 > extent.x0) || !(extent.y1 > extent.y0)) {
    throw InvalidArgument("structured mesh extent is empty");
  }
  std::vector<Point2> vertices;
  vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      // Endpoints are pinned so the outer boundary is exact.
      const double x = i == n ? extent.x1 : extent.x0 + (extent.x1 - extent.x0) * i / n;
      const double y = j == n ? extent.y1 : extent.y0 + (extent.y1 - extent.y0) * j / n;
      vertices.push_back({x, y});
    }
  }
  std::vector<Triangle> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * n * n));
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Point2> vertices = mesh.vertices();
  std::unordered_map<std::uint64_t, int> midpoint;
  auto mid = [&](int a, int b) {
    auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), 0);
    if (inserted) {
      const Point2& p = mesh.vertices()[a];
      const Point2& q = mesh.vertices()[b];
      it->second = static_cast<int>(vertices.size());
      vertices.push_back({0.5 * (p.x + q.x), 0.5 * (p.y + q.y)});
    }
    return it->second;
  };
  std::vector<Triangle> triangles;
  triangles.reserve(mesh.triangles().size() * 4);
  for (const auto& t : mesh.triangles()) {
    const int m01 = mid(t[0], t[1]);
    const int m12 = mid(t[1], t[2]);
    const int m20 = mid(t[2], t[0]);
    triangles.push_back({t[0], m01, m20});
    triangles.push_back({m01, t[1], m12});
    triangles.push_back({m20, m12, t[2]});
    triangles.push_back({m01, m12, m20});
  }
  std::vector<BoundaryEdge> boundary;
  for (const auto& e : mesh.boundary_edges()) {
    const int m = mid(e.a, e.b);
    boundary.push_back({e.a, m, e.marker});
    boundary.push_back({m, e.b, e.marker});
  }
  return Mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line split into tokens; empty at end of input.
  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::istringstream tokens(line);
      std::vector<std::string> out;
      for (std::string tok; tokens >> tok;) out.push_back(tok);
      if (!out.empty()) return out;
    }
    ++line_no_;
    return {};
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

long long expect_int(const std::string& tok, int line) {
  auto v = parse_int(tok);
  if (!v) throw ParseError("expected integer, got '" + tok + "'", line);
  return *v;
}

double expect_double(const std::string& tok, int line) {
  auto v = parse_double(tok);
  if (!v) throw ParseError("expected number, got '" + tok + "'", line);
  return *v;
}

long long expect_section(LineReader& reader, const std::string& name) {
  auto tok = reader.next();
  if (tok.size() != 2 || tok[0] != name) {
    throw ParseError("expected '" + name + " <count>'", reader.line());
  }
  const long long count = expect_int(tok[1], reader.line());
  if (count < 0) throw ParseError("negative count", reader.line());
  return count;
}

}  // namespace

Mesh parse_mesh(std::istream& in) {
  LineReader reader(in);
  auto header = reader.next();
  if (header.size() != 2 || header[0] != "msh2d" || header[1] != "1") {
    throw ParseError("expected header 'msh2d 1'", reader.line());
  }
  const long long nv = expect_section(reader, "vertices");
  std::vector<Point2> vertices;
  vertices.reserve(static_cast<std::size_t>(nv));
  for (long long i = 0; i < nv; ++i) {
    auto tok = reader.next();
    if (tok.size() != 2) throw ParseError("expected 'x y'", reader.line());
    vertices.push_back({expect_double(tok[0], reader.line()), expect_double(tok[1], reader.line())});
  }
  auto index = [&](const std::string& tok) {
    const long long v = expect_int(tok, reader.line());
    if (v < 0 || v >= nv) {
      throw ParseError("vertex index " + tok + " out of range [0, " + std::to_string(nv) + ")",
                       reader.line());
    }
    return static_cast<int>(v);
  };
  const long long nt = expect_section(reader, "triangles");
  std::vector<Triangle> triangles;
  triangles.reserve(static_cast<std::size_t>(nt));
  for (long long i = 0; i < nt; ++i) {
    auto tok = reader.next();
    if (tok.size() != 3) throw ParseError("expected 'i j k'", reader.line());
    triangles.push_back({index(tok[0]), index(tok[1]), index(tok[2])});
  }
  std::vector<BoundaryEdge> boundary;
  auto tok = reader.next();
  if (!tok.empty()) {
    if (tok.size() != 2 || tok[0] != "boundary") {
      throw ParseError("expected 'boundary <count>' or end of file", reader.line());
    }
    const long long nb = expect_int(tok[1], reader.line());
    if (nb < 0) throw ParseError("negative count", reader.line());
    for (long long i = 0; i < nb; ++i) {
      auto edge = reader.next();
      if (edge.size() != 3) throw ParseError("expected 'i j marker'", reader.line());
      boundary.push_back({index(edge[0]), index(edge[1]),
                          static_cast<int>(expect_int(edge[2], reader.line()))});
    }
    if (!reader.next().empty()) throw ParseError("trailing content", reader.line());
  }
  return Mesh(std::move(vertices), std::move(triangles), std::move(boundary));
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open mesh file " + path.string());
  return parse_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "msh2d 1\n";
  out << "vertices " << mesh.n_vertices() << '\n';
  for (const auto& v : mesh.vertices()) out << format_double(v.x) << ' ' << format_double(v.y) << '\n';
  out << "triangles " << mesh.n_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "boundary " << mesh.boundary_edges().size() << '\n';
  for (const auto& e : mesh.boundary_edges()) out << e.a << ' ' << e.b << ' ' << e.marker << '\n';
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot write mesh file " + path.string());
  write_mesh(mesh, out);
}

}  // namespace enspod
