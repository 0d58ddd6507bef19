#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "ladg/core.hpp"

namespace ladg {

/// Conforming triangle mesh. Elements store CCW vertex triples; faces are
/// built once by finalize() and carry a fixed orientation: the unit normal
/// points out of the owner element.
struct Mesh {
  struct Face {
    int v0 = -1, v1 = -1;      // ordered as traversed CCW in the owner
    int owner = -1, neighbor = -1;  // neighbor < 0 on the domain boundary
    bool boundary() const { return neighbor < 0; }
  };

  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> elements;
  std::vector<int> element_label;    // region / subdomain tag, io passthrough
  std::vector<uint8_t> element_green;  // currently one half of a bisection pair
  std::vector<int> green_sibling;      // the other half, or -1

  std::vector<Face> faces;
  std::vector<std::array<int, 3>> element_faces;  // local edge i: (v_i, v_{i+1})
  std::vector<double> elem_area, elem_diam;
  std::vector<double> face_len;
  std::vector<Vec2> face_normal;
  std::vector<uint8_t> vertex_on_boundary;

  int n_elements() const { return int(elements.size()); }
  int n_vertices() const { return int(vertices.size()); }
  int n_faces() const { return int(faces.size()); }

  Vec2 centroid(int e) const {
    const auto& el = elements[e];
    return (vertices[el[0]] + vertices[el[1]] + vertices[el[2]]) * (1.0 / 3.0);
  }

  /// Builds faces, adjacency and derived geometry. Fixes orientation to CCW.
  void finalize() {
    int ne = n_elements();
    if (element_label.empty()) element_label.assign(ne, 0);
    if (element_green.empty()) element_green.assign(ne, 0);
    if (green_sibling.empty()) green_sibling.assign(ne, -1);
    for (auto& el : elements) {
      Vec2 a = vertices[el[0]], b = vertices[el[1]], c = vertices[el[2]];
      double cr = (b - a).x * (c - a).y - (b - a).y * (c - a).x;
      if (cr < 0.0) std::swap(el[1], el[2]);
    }
    faces.clear();
    element_faces.assign(ne, {-1, -1, -1});
    std::map<std::pair<int, int>, int> edge_face;
    for (int e = 0; e < ne; ++e) {
      for (int i = 0; i < 3; ++i) {
        int a = elements[e][i], b = elements[e][(i + 1) % 3];
        auto key = std::minmax(a, b);
        auto it = edge_face.find(key);
        if (it == edge_face.end()) {
          Face f;
          f.v0 = a; f.v1 = b; f.owner = e;
          edge_face.emplace(key, int(faces.size()));
          element_faces[e][i] = int(faces.size());
          faces.push_back(f);
        } else {
          Face& f = faces[it->second];
          LADG_REQUIRE(f.neighbor < 0, "finalize: edge shared by >2 elements");
          f.neighbor = e;
          element_faces[e][i] = it->second;
        }
      }
    }
    elem_area.resize(ne);
    elem_diam.resize(ne);
    for (int e = 0; e < ne; ++e) {
      Vec2 a = vertices[elements[e][0]], b = vertices[elements[e][1]],
           c = vertices[elements[e][2]];
      elem_area[e] = 0.5 * ((b - a).x * (c - a).y - (b - a).y * (c - a).x);
      LADG_REQUIRE(elem_area[e] > 0.0, "finalize: degenerate element");
      elem_diam[e] =
          std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
    }
    face_len.resize(faces.size());
    face_normal.resize(faces.size());
    vertex_on_boundary.assign(vertices.size(), 0);
    for (size_t f = 0; f < faces.size(); ++f) {
      Vec2 d = vertices[faces[f].v1] - vertices[faces[f].v0];
      face_len[f] = d.norm();
      face_normal[f] = {d.y / face_len[f], -d.x / face_len[f]};
      if (faces[f].boundary()) {
        vertex_on_boundary[faces[f].v0] = 1;
        vertex_on_boundary[faces[f].v1] = 1;
      }
    }
  }
};

inline double total_area(const Mesh& m) {
  double s = 0.0;
  for (double a : m.elem_area) s += a;
  return s;
}

/// Throws on broken adjacency, orientation or geometry.
inline void validate_mesh(const Mesh& m) {
  for (int e = 0; e < m.n_elements(); ++e) {
    LADG_REQUIRE(m.elem_area[e] > 0.0, "validate: nonpositive area");
    for (int i = 0; i < 3; ++i) {
      int f = m.element_faces[e][i];
      LADG_REQUIRE(f >= 0, "validate: missing face link");
      LADG_REQUIRE(m.faces[f].owner == e || m.faces[f].neighbor == e,
                   "validate: face does not reference element");
    }
  }
  for (const auto& f : m.faces)
    LADG_REQUIRE(f.owner >= 0, "validate: face without owner");
  for (int e = 0; e < m.n_elements(); ++e) {
    int s = m.green_sibling[e];
    if (s < 0) {
      LADG_REQUIRE(!m.element_green[e], "validate: flagged member lacks sibling");
      continue;
    }
    LADG_REQUIRE(s != e && s < m.n_elements() && m.green_sibling[s] == e,
                 "validate: broken bisection pair link");
    LADG_REQUIRE(m.element_green[e], "validate: pair member not flagged");
  }
}

enum class MeshPattern { right_diagonal, crossed };

/// Uniform mesh of the unit square with n x n cells. The right-diagonal
/// pattern splits each cell into 2 triangles (2n^2 total); the crossed
/// pattern adds cell centers and splits into 4 (4n^2 total).
inline Mesh build_uniform_mesh(int n, MeshPattern pattern = MeshPattern::right_diagonal) {
  LADG_REQUIRE(n >= 1, "build_uniform_mesh: n must be >= 1");
  Mesh m;
  double h = 1.0 / n;
  auto vid = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.vertices.push_back({i * h, j * h});
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1),
          v11 = vid(i + 1, j + 1);
      if (pattern == MeshPattern::right_diagonal) {
        m.elements.push_back({v00, v10, v11});
        m.elements.push_back({v00, v11, v01});
      } else {
        int c = int(m.vertices.size());
        m.vertices.push_back({(i + 0.5) * h, (j + 0.5) * h});
        m.elements.push_back({v00, v10, c});
        m.elements.push_back({v10, v11, c});
        m.elements.push_back({v11, v01, c});
        m.elements.push_back({v01, v00, c});
      }
    }
  m.finalize();
  return m;
}

/// Maps each source element to its replacements in the refined mesh.
/// Untouched elements have exactly one child (a verbatim copy). When the two
/// halves of a bisection pair are rejoined and red-refined, each half is
/// assigned two of the offspring; only the union over the pair tiles the
/// rejoined triangle exactly, so consumers needing exact geometric inclusion
/// must group members via merged_with.
struct RefinementRelation {
  std::vector<std::vector<int>> children;  // by old element id
  std::vector<int> parent;                 // by new element id
  int n_coarse_vertices = 0;               // new mesh keeps them as a prefix
  std::vector<std::array<int, 2>> vertex_parents;  // endpoints, split edges
  std::vector<int> merged_with;  // old sibling rejoined before refining, or -1
  bool refined(int old_e) const { return children[old_e].size() > 1; }
};

/// Red refinement of the marked elements plus conformity closure.
/// Bisection (green) pairs act as removable decorations over a red hierarchy:
/// a pair that has to refine further is first rejoined into the triangle it
/// bisects and that triangle is red-refined, so bisections never stack and
/// the closure cannot cascade through earlier transition layers. Closure
/// rules, iterated to a fixed point: an unpaired element with two or more
/// split edges goes red (one split edge gives a fresh bisection pair); a pair
/// goes red as soon as any of its outer edges is split, including the two
/// halves of its cut edge, which keeps the subdivision depth of neighbors
/// within one level. Offspring of a red element sitting on a still-bisected
/// neighbor edge are bisected in turn, so the result is conforming.
inline std::pair<Mesh, RefinementRelation> refine(const Mesh& m,
                                                  const std::vector<int>& marked) {
  LADG_REQUIRE(!marked.empty(), "refine: empty marked set");
  int ne = m.n_elements();

  // Recover the geometry of each bisection pair. A pair covers a triangle
  // (alpha, beta, apex) cut from the midpoint of edge (alpha, beta) to the
  // apex; members share exactly {mid, apex} and mid sits halfway between the
  // two private vertices.
  struct BisectionPair {
    int left = -1, right = -1;      // member ids, left < right
    int alpha = -1, beta = -1;      // private vertex of left resp. right
    int mid = -1, apex = -1;        // shared cut vertex / opposite vertex
    int f_left = -1, f_right = -1;  // half edges (alpha, mid), (mid, beta)
    int f_ca = -1, f_bc = -1;       // outer edges (apex, alpha), (beta, apex)
  };
  auto member_face = [&](int e, int u, int v) {
    for (int i = 0; i < 3; ++i) {
      int a = m.elements[e][i], b = m.elements[e][(i + 1) % 3];
      if ((a == u && b == v) || (a == v && b == u)) return m.element_faces[e][i];
    }
    LADG_REQUIRE(false, "refine: pair member lost an edge");
    return -1;
  };
  std::vector<int> pair_id(ne, -1);
  std::vector<BisectionPair> pairs;
  for (int e = 0; e < ne; ++e) {
    int s = m.green_sibling[e];
    if (s < 0 || pair_id[e] >= 0) continue;
    LADG_REQUIRE(s >= 0 && s < ne && s != e && m.green_sibling[s] == e,
                 "refine: broken bisection pair link");
    BisectionPair p;
    p.left = std::min(e, s);
    p.right = std::max(e, s);
    int shared[2], n_shared = 0;
    for (int u : m.elements[p.left])
      for (int v : m.elements[p.right])
        if (u == v) {
          LADG_REQUIRE(n_shared < 2, "refine: pair members coincide");
          shared[n_shared++] = u;
        }
    LADG_REQUIRE(n_shared == 2, "refine: pair members share no edge");
    for (int u : m.elements[p.left])
      if (u != shared[0] && u != shared[1]) p.alpha = u;
    for (int v : m.elements[p.right])
      if (v != shared[0] && v != shared[1]) p.beta = v;
    Vec2 cut_mid = (m.vertices[p.alpha] + m.vertices[p.beta]) * 0.5;
    double d0 = (m.vertices[shared[0]] - cut_mid).norm();
    double d1 = (m.vertices[shared[1]] - cut_mid).norm();
    double tol = 1e-9 * m.elem_diam[p.left];
    LADG_REQUIRE((d0 <= tol) != (d1 <= tol), "refine: ambiguous pair geometry");
    p.mid = d0 <= tol ? shared[0] : shared[1];
    p.apex = d0 <= tol ? shared[1] : shared[0];
    p.f_left = member_face(p.left, p.alpha, p.mid);
    p.f_right = member_face(p.right, p.mid, p.beta);
    p.f_ca = member_face(p.left, p.apex, p.alpha);
    p.f_bc = member_face(p.right, p.beta, p.apex);
    pair_id[p.left] = pair_id[p.right] = int(pairs.size());
    pairs.push_back(p);
  }
  auto rep = [&](int e) { return pair_id[e] >= 0 ? pairs[pair_id[e]].left : e; };

  // Decide which effective elements (a pair counts as its rejoined triangle)
  // are red-refined; iterate until the red set stabilizes.
  std::vector<uint8_t> red(ne, 0);
  for (int e : marked) {
    LADG_REQUIRE(e >= 0 && e < ne, "refine: marked id out of range");
    red[rep(e)] = 1;
  }
  std::vector<uint8_t> face_split(m.n_faces(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    // A red element splits its full edges. A red pair splits the outer edges
    // of the rejoined triangle; the halves of its cut edge are reused.
    std::fill(face_split.begin(), face_split.end(), 0);
    for (int e = 0; e < ne; ++e) {
      if (rep(e) != e || !red[e]) continue;
      if (pair_id[e] >= 0) {
        const BisectionPair& p = pairs[pair_id[e]];
        face_split[p.f_ca] = face_split[p.f_bc] = 1;
      } else {
        for (int f : m.element_faces[e]) face_split[f] = 1;
      }
    }
    for (int e = 0; e < ne; ++e) {
      if (rep(e) != e || red[e]) continue;
      bool want = false;
      if (pair_id[e] >= 0) {
        const BisectionPair& p = pairs[pair_id[e]];
        want = face_split[p.f_ca] || face_split[p.f_bc] ||
               face_split[p.f_left] || face_split[p.f_right];
      } else {
        int s = 0;
        for (int f : m.element_faces[e]) s += face_split[f];
        want = s >= 2;
      }
      if (want) {
        red[e] = 1;
        changed = true;
      }
    }
  }

  Mesh out;
  out.vertices = m.vertices;
  RefinementRelation rel;
  rel.n_coarse_vertices = m.n_vertices();
  rel.merged_with.assign(ne, -1);
  std::vector<int> midpoint(m.n_faces(), -1);
  std::map<std::pair<int, int>, int> old_edge;
  for (int f = 0; f < m.n_faces(); ++f) {
    old_edge.emplace(std::minmax(m.faces[f].v0, m.faces[f].v1), f);
    if (face_split[f]) {
      midpoint[f] = int(out.vertices.size());
      out.vertices.push_back(
          (m.vertices[m.faces[f].v0] + m.vertices[m.faces[f].v1]) * 0.5);
      rel.vertex_parents.push_back({m.faces[f].v0, m.faces[f].v1});
    }
  }

  rel.children.resize(ne);
  auto emit = [&](int parent, std::array<int, 3> tri) {
    int id = int(out.elements.size());
    rel.children[parent].push_back(id);
    rel.parent.push_back(parent);
    out.elements.push_back(tri);
    out.element_label.push_back(m.element_label[parent]);
    out.element_green.push_back(0);
    out.green_sibling.push_back(-1);
    return id;
  };
  auto link_pair = [&](int a, int b) {
    out.element_green[a] = out.element_green[b] = 1;
    out.green_sibling[a] = b;
    out.green_sibling[b] = a;
  };
  // Emits a triangle, bisecting it into a fresh pair when one of its edges is
  // an original face that acquired a midpoint (a red effective neighbor one
  // level deeper). The closure guarantees at most one such edge.
  auto emit_conforming = [&](int parent, std::array<int, 3> tri) {
    int cut = -1, cut_mid = -1;
    for (int i = 0; i < 3; ++i) {
      int u = tri[i], v = tri[(i + 1) % 3];
      if (u >= rel.n_coarse_vertices || v >= rel.n_coarse_vertices) continue;
      auto it = old_edge.find(std::minmax(u, v));
      if (it == old_edge.end() || midpoint[it->second] < 0) continue;
      LADG_REQUIRE(cut < 0, "refine: closure left two hanging midpoints");
      cut = i;
      cut_mid = midpoint[it->second];
    }
    if (cut < 0) {
      emit(parent, tri);
      return;
    }
    int a = tri[cut], b = tri[(cut + 1) % 3], c = tri[(cut + 2) % 3];
    int g0 = emit(parent, {a, cut_mid, c});
    int g1 = emit(parent, {cut_mid, b, c});
    link_pair(g0, g1);
  };

  for (int e = 0; e < ne; ++e) {
    if (rep(e) != e) continue;  // second pair member is handled with the first
    if (pair_id[e] >= 0) {
      const BisectionPair& p = pairs[pair_id[e]];
      if (!red[e]) {
        int a = emit(p.left, m.elements[p.left]);
        int b = emit(p.right, m.elements[p.right]);
        link_pair(a, b);
        continue;
      }
      // Rejoin and red-refine (alpha, beta, apex); the cut vertex is reused
      // as the midpoint of edge (alpha, beta). Each member keeps the corner
      // at its private vertex plus one of the two offspring straddling the
      // old cut, preserving its share of the area.
      rel.merged_with[p.left] = p.right;
      rel.merged_with[p.right] = p.left;
      int m_ca = midpoint[p.f_ca], m_bc = midpoint[p.f_bc];
      emit_conforming(p.left, {p.alpha, p.mid, m_ca});
      emit_conforming(p.right, {p.mid, p.beta, m_bc});
      emit_conforming(p.left, {m_ca, m_bc, p.apex});
      emit_conforming(p.right, {p.mid, m_bc, m_ca});
      continue;
    }
    if (!red[e]) {
      emit_conforming(e, m.elements[e]);  // verbatim copy or fresh bisection
      continue;
    }
    const auto& el = m.elements[e];
    int mids[3];
    for (int i = 0; i < 3; ++i) mids[i] = midpoint[m.element_faces[e][i]];
    emit(e, {el[0], mids[0], mids[2]});
    emit(e, {mids[0], el[1], mids[1]});
    emit(e, {mids[2], mids[1], el[2]});
    emit(e, {mids[0], mids[1], mids[2]});
  }
  out.finalize();
  return {std::move(out), std::move(rel)};
}

inline std::vector<std::vector<int>> vertex_incidence(const Mesh& m) {
  std::vector<std::vector<int>> inc(m.n_vertices());
  for (int e = 0; e < m.n_elements(); ++e)
    for (int v : m.elements[e]) inc[v].push_back(e);
  return inc;
}

/// Adds every element sharing at least one vertex with the core.
inline std::vector<int> enlarge_subdomain(const Mesh& m,
                                          const std::vector<int>& core) {
  LADG_REQUIRE(!core.empty(), "enlarge_subdomain: empty core");
  std::vector<uint8_t> in(m.n_elements(), 0);
  auto inc = vertex_incidence(m);
  for (int e : core) {
    LADG_REQUIRE(e >= 0 && e < m.n_elements(), "enlarge_subdomain: bad id");
    in[e] = 1;
  }
  std::vector<uint8_t> grown = in;
  for (int e = 0; e < m.n_elements(); ++e)
    if (in[e])
      for (int v : m.elements[e])
        for (int nb : inc[v]) grown[nb] = 1;
  std::vector<int> out;
  for (int e = 0; e < m.n_elements(); ++e)
    if (grown[e]) out.push_back(e);
  return out;
}

/// Bookkeeping linking a submesh to the mesh it was cut from. Boundary faces
/// of the submesh that are interior to the parent are flagged artificial.
struct SubmeshMap {
  std::vector<int> elem_parent;            // sub element -> parent element
  std::vector<int> vertex_parent;          // sub vertex -> parent vertex
  std::vector<int> face_parent;            // sub face -> parent face
  std::vector<int> parent_elem_to_sub;     // -1 when outside the subdomain
  std::vector<uint8_t> face_artificial;    // by sub face id
};

inline std::pair<Mesh, SubmeshMap> extract_submesh(const Mesh& m,
                                                   const std::vector<int>& subset) {
  LADG_REQUIRE(!subset.empty(), "extract_submesh: empty subset");
  Mesh sub;
  SubmeshMap map;
  map.parent_elem_to_sub.assign(m.n_elements(), -1);
  std::vector<int> vmap(m.n_vertices(), -1);
  std::vector<int> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (int e : sorted) {
    LADG_REQUIRE(e >= 0 && e < m.n_elements(), "extract_submesh: bad id");
    std::array<int, 3> tri;
    for (int i = 0; i < 3; ++i) {
      int v = m.elements[e][i];
      if (vmap[v] < 0) {
        vmap[v] = int(sub.vertices.size());
        sub.vertices.push_back(m.vertices[v]);
        map.vertex_parent.push_back(v);
      }
      tri[i] = vmap[v];
    }
    map.parent_elem_to_sub[e] = int(sub.elements.size());
    sub.elements.push_back(tri);
    sub.element_label.push_back(m.element_label[e]);
    map.elem_parent.push_back(e);
  }
  // Bisection pairs survive only when both members made it into the subset.
  sub.element_green.assign(sub.elements.size(), 0);
  sub.green_sibling.assign(sub.elements.size(), -1);
  for (size_t se = 0; se < sub.elements.size(); ++se) {
    int ps = m.green_sibling[map.elem_parent[se]];
    int ss = ps >= 0 ? map.parent_elem_to_sub[ps] : -1;
    sub.green_sibling[se] = ss;
    sub.element_green[se] = ss >= 0;
  }
  sub.finalize();

  // Recover parent faces through vertex pairs.
  std::map<std::pair<int, int>, int> parent_edge;
  for (int f = 0; f < m.n_faces(); ++f)
    parent_edge.emplace(std::minmax(m.faces[f].v0, m.faces[f].v1), f);
  map.face_parent.resize(sub.n_faces());
  map.face_artificial.assign(sub.n_faces(), 0);
  for (int f = 0; f < sub.n_faces(); ++f) {
    auto key = std::minmax(map.vertex_parent[sub.faces[f].v0],
                           map.vertex_parent[sub.faces[f].v1]);
    auto it = parent_edge.find(key);
    LADG_REQUIRE(it != parent_edge.end(), "extract_submesh: unmatched face");
    map.face_parent[f] = it->second;
    if (sub.faces[f].boundary() && !m.faces[it->second].boundary())
      map.face_artificial[f] = 1;
  }
  return {std::move(sub), std::move(map)};
}

inline void write_mesh(const Mesh& m, const std::string& path) {
  std::ofstream os(path);
  LADG_REQUIRE(os.good(), "write_mesh: cannot open " + path);
  os.precision(17);
  os << "ladg-mesh 1\n";
  os << "V " << m.n_vertices() << "\n";
  for (const auto& v : m.vertices) os << v.x << " " << v.y << "\n";
  os << "E " << m.n_elements() << "\n";
  for (int e = 0; e < m.n_elements(); ++e)
    os << m.elements[e][0] << " " << m.elements[e][1] << " "
       << m.elements[e][2] << " " << m.element_label[e] << "\n";
}

inline Mesh read_mesh(const std::string& path) {
  std::ifstream is(path);
  LADG_REQUIRE(is.good(), "read_mesh: cannot open " + path);
  std::string tag;
  int version = 0;
  is >> tag >> version;
  LADG_REQUIRE(tag == "ladg-mesh" && version == 1,
               "read_mesh: unsupported format header");
  Mesh m;
  int n = 0;
  is >> tag >> n;
  LADG_REQUIRE(tag == "V" && n > 0, "read_mesh: bad vertex section");
  m.vertices.resize(n);
  for (auto& v : m.vertices) is >> v.x >> v.y;
  is >> tag >> n;
  LADG_REQUIRE(tag == "E" && n > 0, "read_mesh: bad element section");
  m.elements.resize(n);
  m.element_label.resize(n);
  for (int e = 0; e < n; ++e)
    is >> m.elements[e][0] >> m.elements[e][1] >> m.elements[e][2] >>
        m.element_label[e];
  LADG_REQUIRE(!is.fail(), "read_mesh: truncated file");
  m.finalize();
  return m;
}

}  // namespace ladg
