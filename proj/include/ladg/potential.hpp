#pragma once

#include "ladg/history.hpp"
#include "ladg/space.hpp"

namespace ladg {

/// Conforming piecewise-linear field stored by vertex value; continuity and
/// the homogeneous boundary condition are structural (shared storage).
struct PotentialField {
  const Mesh* mesh = nullptr;
  std::vector<double> values;  // by vertex

  PotentialField() = default;
  explicit PotentialField(const Mesh& m)
      : mesh(&m), values(m.n_vertices(), 0.0) {}

  double eval(int e, const Vec2& p) const {
    const auto& el = mesh->elements[e];
    Vec2 a = mesh->vertices[el[0]], b = mesh->vertices[el[1]],
         c = mesh->vertices[el[2]];
    double det = 2.0 * mesh->elem_area[e];
    double l1 = ((p.x - a.x) * (c.y - a.y) - (p.y - a.y) * (c.x - a.x)) / det;
    double l2 = ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / det;
    return values[el[0]] * (1.0 - l1 - l2) + values[el[1]] * l1 +
           values[el[2]] * l2;
  }

  /// Constant per element.
  Vec2 grad(int e) const {
    const auto& el = mesh->elements[e];
    Vec2 a = mesh->vertices[el[0]], b = mesh->vertices[el[1]],
         c = mesh->vertices[el[2]];
    double det = 2.0 * mesh->elem_area[e];
    // grad of barycentric coordinates
    Vec2 g0{(b.y - c.y) / det, (c.x - b.x) / det};
    Vec2 g1{(c.y - a.y) / det, (a.x - c.x) / det};
    Vec2 g2{(a.y - b.y) / det, (b.x - a.x) / det};
    return {values[el[0]] * g0.x + values[el[1]] * g1.x + values[el[2]] * g2.x,
            values[el[0]] * g0.y + values[el[1]] * g1.y + values[el[2]] * g2.y};
  }
};

/// Vertex-averaging smoother: interior vertices take the equal-weight mean
/// of the DG values from all incident elements; boundary vertices take the
/// prescribed value. Degree 1 only (the acceptance configurations all run
/// P1; higher-degree smoothing is not provided).
inline PotentialField oswald(const DGSpace& sp, const DGField& u,
                             const std::function<double(int vertex)>& boundary) {
  LADG_REQUIRE(sp.degree == 1, "oswald: only degree 1 is supported");
  const Mesh& m = *sp.mesh;
  PotentialField s(m);
  std::vector<double> sum(m.n_vertices(), 0.0);
  std::vector<int> count(m.n_vertices(), 0);
  for (int e = 0; e < m.n_elements(); ++e)
    for (int i = 0; i < 3; ++i) {
      int v = m.elements[e][i];
      sum[v] += u.coeffs[sp.dof(e, i)];  // P1 coefficient = vertex value
      count[v] += 1;
    }
  for (int v = 0; v < m.n_vertices(); ++v) {
    if (m.vertex_on_boundary[v])
      s.values[v] = boundary ? boundary(v) : 0.0;
    else
      s.values[v] = sum[v] / count[v];
  }
  return s;
}

/// Linear interpolation onto the refined mesh (exact for P1): old vertices
/// keep their value, edge midpoints average the endpoints.
inline PotentialField transport_potential(const PotentialField& s,
                                          const RefinementRelation& rel,
                                          const Mesh& new_mesh) {
  PotentialField out(new_mesh);
  for (int v = 0; v < rel.n_coarse_vertices; ++v) out.values[v] = s.values[v];
  for (size_t i = 0; i < rel.vertex_parents.size(); ++i) {
    auto [a, b] = rel.vertex_parents[i];
    out.values[rel.n_coarse_vertices + int(i)] =
        0.5 * (s.values[a] + s.values[b]);
  }
  return out;
}

/// Overwrites subdomain vertices with the local smoother result. On the
/// subdomain interface both sides carry the same value by construction, so
/// the merge stays conforming.
inline PotentialField compose_potential(const PotentialField& prev,
                                        const PotentialField& hat,
                                        const SubmeshMap& map) {
  PotentialField out = prev;
  for (size_t sv = 0; sv < map.vertex_parent.size(); ++sv)
    out.values[map.vertex_parent[sv]] = hat.values[sv];
  return out;
}

/// Boundary values for the subdomain smoother: zero on the physical
/// boundary, the previous conforming potential on artificial boundary
/// vertices.
inline std::function<double(int)> potential_boundary(const Mesh& parent,
                                                     const SubmeshMap& map,
                                                     const PotentialField& prev) {
  return [&parent, &map, &prev](int sub_vertex) -> double {
    int pv = map.vertex_parent[sub_vertex];
    if (parent.vertex_on_boundary[pv]) return 0.0;
    return prev.values[pv];
  };
}

}  // namespace ladg
