#pragma once

#include "ladg/problem.hpp"
#include "ladg/space.hpp"

namespace ladg {

/// Interpolation/trace constants entering the estimators. All are computed
/// from element geometry and the coefficient bounds
///   c_A   = smallest eigenvalue of A on the element,
///   c_bm  = essential lower bound of mu - div(beta)/2 on the element
///           (sampled at the quadrature points and the vertices).
/// The Poincare constant of a convex element is C_p = 1/pi^2.
struct CutoffConstants {
  std::vector<double> c_A, c_bm;              // per element
  std::vector<double> m, mt;                  // per element
  std::vector<std::array<double, 3>> C_t;     // per element, local face slot
  std::vector<std::array<double, 3>> D_t;
  std::vector<double> m_sigma;                // per face
};

inline CutoffConstants cutoff_constants(const DGSpace& sp,
                                        const ProblemData& prob) {
  constexpr double C_p = 1.0 / (M_PI * M_PI);
  const Mesh& m = *sp.mesh;
  const auto& vrule = triangle_rule(sp.quad_degree);
  CutoffConstants c;
  int ne = m.n_elements();
  c.c_A.resize(ne);
  c.c_bm.resize(ne);
  c.m.resize(ne);
  c.mt.resize(ne);
  c.C_t.resize(ne);
  c.D_t.resize(ne);

  for (int e = 0; e < ne; ++e) {
    c.c_A[e] = prob.A_of_element(m, e).eig_min();
    double lo = std::numeric_limits<double>::infinity();
    auto sample = [&](const Vec2& p) {
      lo = std::min(lo, prob.mu(p) - 0.5 * prob.div_beta(p));
    };
    for (const auto& qp : vrule) sample(sp.to_physical(e, {qp.x, qp.y}));
    for (int v : m.elements[e]) sample(m.vertices[v]);
    LADG_REQUIRE(lo > 0.0,
                 "cutoff_constants: mu - div(beta)/2 must be strictly "
                 "positive for error estimation; bounds for the nonpositive "
                 "case are not implemented");
    c.c_bm[e] = lo;

    double h = m.elem_diam[e];
    c.m[e] = std::min(std::sqrt(C_p) * h / std::sqrt(c.c_A[e]),
                      1.0 / std::sqrt(c.c_bm[e]));
    c.mt[e] = std::min((C_p + std::sqrt(C_p)) * h / c.c_A[e],
                       1.0 / (h * c.c_bm[e]) +
                           0.5 / std::sqrt(c.c_bm[e] * c.c_A[e]));
    for (int i = 0; i < 3; ++i) {
      int f = m.element_faces[e][i];
      double Ct = m.face_len[f] * h / m.elem_area[e];
      c.C_t[e][i] = Ct;
      c.D_t[e][i] = std::sqrt(
          Ct / (2.0 * h * c.c_bm[e]) *
          (1.0 + std::sqrt(1.0 + h * h * c.c_bm[e] / c.c_A[e])));
    }
  }

  c.m_sigma.resize(m.n_faces());
  for (int f = 0; f < m.n_faces(); ++f) {
    const auto& fc = m.faces[f];
    double diff = 0.0, reac = 0.0;
    auto acc = [&](int e) {
      double h = m.elem_diam[e];
      diff = std::max(diff, 3.0 * 2.0 * m.face_len[f] * h * h /
                                (m.elem_area[e] * c.c_A[e]));
      reac = std::max(reac, m.face_len[f] / (m.elem_area[e] * c.c_bm[e]));
    };
    acc(fc.owner);
    if (!fc.boundary()) acc(fc.neighbor);
    c.m_sigma[f] = std::sqrt(std::min(diff, reac));
  }
  return c;
}

}  // namespace ladg
