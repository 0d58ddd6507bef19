#pragma once

#include "ladg/assembly.hpp"
#include "ladg/history.hpp"

namespace ladg {

/// Lowest-order Raviart-Thomas field: per element v(x) = a + b x with
/// a in R^2, b in R. Normal traces are constant per face and div v = 2 b.
struct RTNField {
  const Mesh* mesh = nullptr;
  std::vector<double> ax, ay, b;

  RTNField() = default;
  explicit RTNField(const Mesh& m)
      : mesh(&m),
        ax(m.n_elements(), 0.0),
        ay(m.n_elements(), 0.0),
        b(m.n_elements(), 0.0) {}

  Vec2 eval(int e, const Vec2& p) const {
    return {ax[e] + b[e] * p.x, ay[e] + b[e] * p.y};
  }
  double div(int e) const { return 2.0 * b[e]; }

  /// Jump of the normal trace across an internal face (owner minus
  /// neighbor); constant along the face, evaluated at the midpoint.
  double normal_jump(int f) const {
    const auto& fc = mesh->faces[f];
    if (fc.boundary()) return 0.0;
    Vec2 mid = (mesh->vertices[fc.v0] + mesh->vertices[fc.v1]) * 0.5;
    Vec2 n = mesh->face_normal[f];
    return (eval(fc.owner, mid) - eval(fc.neighbor, mid)).dot(n);
  }
};

namespace detail {
/// Builds the element polynomial from prescribed face-oriented normal
/// fluxes (constant per face, in the direction of the stored face normal).
inline void rtn_from_face_fluxes(const Mesh& m, int e,
                                 const std::vector<double>& flux,
                                 RTNField& out) {
  double bx = 0.0, by = 0.0, bb = 0.0;
  for (int i = 0; i < 3; ++i) {
    int f = m.element_faces[e][i];
    double sign = (m.faces[f].owner == e) ? 1.0 : -1.0;
    double c = sign * flux[f];  // outward normal flux on this edge
    Vec2 P = m.vertices[m.elements[e][(i + 2) % 3]];  // opposite vertex
    double s = c * m.face_len[f] / (2.0 * m.elem_area[e]);
    bb += s;
    bx -= s * P.x;
    by -= s * P.y;
  }
  out.ax[e] = bx;
  out.ay[e] = by;
  out.b[e] = bb;
}
}  // namespace detail

/// Face-moment flux reconstruction from a DG solution. The diffusive field
/// t recovers minus the weighted-average diffusive flux plus the jump
/// penalty; the convective field q recovers the centered-plus-upwind
/// convective numerical flux. Boundary faces see the Dirichlet data g.
/// Both fields have continuous normal traces inside the solve domain by
/// construction.
inline std::pair<RTNField, RTNField> reconstruct_local_fluxes(
    const DGSpace& sp, const DGField& u, const ProblemData& prob,
    const BoundaryData& g = nullptr) {
  const Mesh& m = *sp.mesh;
  const auto& frule = face_rule(sp.quad_degree);
  std::vector<double> tflux(m.n_faces(), 0.0), qflux(m.n_faces(), 0.0);

  for (int f = 0; f < m.n_faces(); ++f) {
    const auto& fc = m.faces[f];
    FaceData fd = face_coefficients(prob, m, f);
    Vec2 nrm = m.face_normal[f];
    Vec2 p0 = m.vertices[fc.v0], p1 = m.vertices[fc.v1];
    const Mat2& AK = prob.A_of_element(m, fc.owner);
    double pen_coef = prob.eta_sigma * fd.gamma / fd.h;
    double tsum = 0.0, qsum = 0.0;
    for (const auto& qp : frule) {
      Vec2 p = p0 + qp.t * (p1 - p0);
      double uK = u.eval(fc.owner, p);
      double fluxK = AK.apply(u.grad(fc.owner, p)).dot(nrm);
      double bn = prob.beta(p).dot(nrm);
      double nu = 0.5 * std::abs(bn);
      double avg_flux, jump, avg_u;
      if (fc.boundary()) {
        double gv = g ? g(f, p) : 0.0;
        avg_flux = fluxK;
        jump = uK - gv;
        avg_u = 0.5 * (uK + gv);
      } else {
        double uT = u.eval(fc.neighbor, p);
        const Mat2& AT = prob.A_of_element(m, fc.neighbor);
        double fluxT = AT.apply(u.grad(fc.neighbor, p)).dot(nrm);
        avg_flux = fd.omega_K * fluxK + fd.omega_T * fluxT;
        jump = uK - uT;
        avg_u = 0.5 * (uK + uT);
      }
      tsum += qp.w * (-avg_flux + pen_coef * jump);
      qsum += qp.w * (bn * avg_u + nu * jump);
    }
    tflux[f] = tsum;  // face-rule weights sum to 1: this is the face mean
    qflux[f] = qsum;
  }

  RTNField t(m), q(m);
  for (int e = 0; e < m.n_elements(); ++e) {
    detail::rtn_from_face_fluxes(m, e, tflux, t);
    detail::rtn_from_face_fluxes(m, e, qflux, q);
  }
  return {std::move(t), std::move(q)};
}

/// Restriction of a piecewise a + b x field to a refined mesh is exact:
/// children copy the parent coefficients.
inline RTNField transport_rtn(const RTNField& v, const RefinementRelation& rel,
                              const Mesh& new_mesh) {
  RTNField out(new_mesh);
  for (size_t pe = 0; pe < rel.children.size(); ++pe)
    for (int c : rel.children[pe]) {
      out.ax[c] = v.ax[pe];
      out.ay[c] = v.ay[pe];
      out.b[c] = v.b[pe];
    }
  return out;
}

/// Overwrites the subdomain part of a transported flux with the local
/// reconstruction (sub elements share geometry with their parents).
inline RTNField compose_fluxes(const RTNField& prev, const RTNField& hat,
                               const SubmeshMap& map) {
  RTNField out = prev;
  for (size_t se = 0; se < map.elem_parent.size(); ++se) {
    int pe = map.elem_parent[se];
    out.ax[pe] = hat.ax[se];
    out.ay[pe] = hat.ay[se];
    out.b[pe] = hat.b[se];
  }
  return out;
}

/// L2 norm over one element of
///   pi_0 f - div t - div q - pi_0((mu - div beta) u),
/// which the reconstruction drives to zero up to the linear-solver residual.
/// Projections use the same quadrature as assembly so the identity is exact.
inline double check_conservation(const RTNField& t, const RTNField& q,
                                 const DGField& u, const ProblemData& prob,
                                 int e) {
  const DGSpace& sp = *u.space;
  const Mesh& m = *sp.mesh;
  const auto& vrule = triangle_rule(sp.quad_degree);
  double mean_f = 0.0, mean_ru = 0.0;
  for (size_t qq = 0; qq < vrule.size(); ++qq) {
    Vec2 p = sp.to_physical(e, {vrule[qq].x, vrule[qq].y});
    double uq = 0.0;
    for (int bfun = 0; bfun < sp.n_loc; ++bfun)
      uq += u.coeffs[sp.dof(e, bfun)] * sp.vol_vals(qq, bfun);
    mean_f += vrule[qq].w * prob.f(p);
    mean_ru += vrule[qq].w * (prob.mu(p) - prob.div_beta(p)) * uq;
  }
  mean_f *= 2.0;   // reference weights sum to 1/2
  mean_ru *= 2.0;
  double c = mean_f - t.div(e) - q.div(e) - mean_ru;
  return std::abs(c) * std::sqrt(m.elem_area[e]);
}

/// Max over elements of the conservation residual, scaled per element by
/// 1 + ||f||_{L2(K)}.
inline double conservation_max(const RTNField& t, const RTNField& q,
                               const DGField& u, const ProblemData& prob) {
  const DGSpace& sp = *u.space;
  const Mesh& m = *sp.mesh;
  const auto& vrule = triangle_rule(sp.quad_degree);
  double worst = 0.0;
  for (int e = 0; e < m.n_elements(); ++e) {
    double f2 = 0.0;
    for (const auto& qp : vrule) {
      Vec2 p = sp.to_physical(e, {qp.x, qp.y});
      double fv = prob.f(p);
      f2 += qp.w * fv * fv;
    }
    double fnorm = std::sqrt(2.0 * f2 * m.elem_area[e]);
    worst = std::max(worst,
                     check_conservation(t, q, u, prob, e) / (1.0 + fnorm));
  }
  return worst;
}

}  // namespace ladg
