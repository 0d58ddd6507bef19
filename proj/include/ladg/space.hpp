#pragma once

#include <Eigen/Core>
#include <memory>

#include "ladg/basis.hpp"
#include "ladg/mesh.hpp"
#include "ladg/quadrature.hpp"

namespace ladg {

/// Broken polynomial space P_deg on a triangle mesh, one coefficient block
/// per element, Lagrange nodal basis. Quadrature rules are fixed here so all
/// consumers (assembly, flux reconstruction, conservation checks) integrate
/// with the same points.
struct DGSpace {
  const Mesh* mesh = nullptr;
  int degree = 1;
  int n_loc = 3;
  int quad_degree = 4;  // exact through 2*degree + 2
  std::shared_ptr<TriangleBasis> basis;

  // Basis tables at the element rule points (nq x n_loc).
  Eigen::MatrixXd vol_vals;
  std::vector<Vec2> vol_grads;  // row-major [q * n_loc + b], reference coords

  DGSpace(const Mesh& m, int deg) : mesh(&m), degree(deg) {
    basis = std::make_shared<TriangleBasis>(deg);
    n_loc = basis->size();
    LADG_REQUIRE(n_loc <= 36, "polynomial degree too high");
    quad_degree = 2 * deg + 2;
    const auto& rule = triangle_rule(quad_degree);
    vol_vals.resize(rule.size(), n_loc);
    vol_grads.resize(rule.size() * n_loc);
    std::vector<double> vals(n_loc);
    for (size_t q = 0; q < rule.size(); ++q) {
      Vec2 p{rule[q].x, rule[q].y};
      basis->eval(p, vals.data());
      for (int b = 0; b < n_loc; ++b) vol_vals(q, b) = vals[b];
      basis->eval_grad(p, &vol_grads[q * n_loc]);
    }
  }

  int n_dofs() const { return mesh->n_elements() * n_loc; }
  int dof(int e, int i) const { return e * n_loc + i; }

  // Affine map pieces for an element.
  void jacobian(int e, Vec2& a, Vec2& col0, Vec2& col1) const {
    const auto& el = mesh->elements[e];
    a = mesh->vertices[el[0]];
    col0 = mesh->vertices[el[1]] - a;
    col1 = mesh->vertices[el[2]] - a;
  }
  Vec2 to_physical(int e, const Vec2& ref) const {
    Vec2 a, c0, c1;
    jacobian(e, a, c0, c1);
    return {a.x + c0.x * ref.x + c1.x * ref.y,
            a.y + c0.y * ref.x + c1.y * ref.y};
  }
  Vec2 to_reference(int e, const Vec2& p) const {
    Vec2 a, c0, c1;
    jacobian(e, a, c0, c1);
    double det = c0.x * c1.y - c0.y * c1.x;
    Vec2 d = p - a;
    return {(c1.y * d.x - c1.x * d.y) / det, (-c0.y * d.x + c0.x * d.y) / det};
  }
  /// Physical gradient from a reference gradient: J^{-T} g.
  Vec2 push_gradient(int e, const Vec2& gref) const {
    Vec2 a, c0, c1;
    jacobian(e, a, c0, c1);
    double det = c0.x * c1.y - c0.y * c1.x;
    return {(c1.y * gref.x - c0.y * gref.y) / det,
            (-c1.x * gref.x + c0.x * gref.y) / det};
  }
};

struct DGField {
  const DGSpace* space = nullptr;
  Eigen::VectorXd coeffs;

  DGField() = default;
  explicit DGField(const DGSpace& s)
      : space(&s), coeffs(Eigen::VectorXd::Zero(s.n_dofs())) {}

  static constexpr int kMaxLoc = 36;  // degree <= 7

  double eval(int e, const Vec2& p) const {
    Vec2 ref = space->to_reference(e, p);
    double vals[kMaxLoc];
    space->basis->eval(ref, vals);
    double s = 0.0;
    for (int b = 0; b < space->n_loc; ++b)
      s += coeffs[space->dof(e, b)] * vals[b];
    return s;
  }

  Vec2 grad(int e, const Vec2& p) const {
    Vec2 ref = space->to_reference(e, p);
    Vec2 g[kMaxLoc];
    space->basis->eval_grad(ref, g);
    Vec2 gr{0.0, 0.0};
    for (int b = 0; b < space->n_loc; ++b) {
      double c = coeffs[space->dof(e, b)];
      gr.x += c * g[b].x;
      gr.y += c * g[b].y;
    }
    return space->push_gradient(e, gr);
  }

  /// Nodal interpolation of a callable.
  template <class F>
  void interpolate(F&& fn) {
    const auto& nodes = space->basis->nodes();
    for (int e = 0; e < space->mesh->n_elements(); ++e)
      for (int b = 0; b < space->n_loc; ++b)
        coeffs[space->dof(e, b)] = fn(space->to_physical(e, {nodes[b].x, nodes[b].y}));
  }
};

/// Exact polynomial injection of a field into the space on a refined mesh.
/// Children evaluate the parent polynomial at their own Lagrange nodes;
/// untouched elements copy their coefficient block verbatim.
inline DGField transport_field(const DGField& u, const RefinementRelation& rel,
                               const DGSpace& new_space) {
  LADG_REQUIRE(u.space->degree == new_space.degree,
               "transport_field: degree mismatch");
  DGField out(new_space);
  const auto& nodes = new_space.basis->nodes();
  int nb = new_space.n_loc;
  for (size_t pe = 0; pe < rel.children.size(); ++pe) {
    if (!rel.refined(int(pe))) {
      int c = rel.children[pe][0];
      for (int b = 0; b < nb; ++b)
        out.coeffs[new_space.dof(c, b)] = u.coeffs[u.space->dof(int(pe), b)];
      continue;
    }
    for (int c : rel.children[pe])
      for (int b = 0; b < nb; ++b) {
        Vec2 p = new_space.to_physical(c, {nodes[b].x, nodes[b].y});
        out.coeffs[new_space.dof(c, b)] = u.eval(int(pe), p);
      }
  }
  return out;
}

}  // namespace ladg
