#pragma once

#include <Eigen/Sparse>
#include <functional>

#include "ladg/linsolve.hpp"
#include "ladg/problem.hpp"
#include "ladg/space.hpp"

namespace ladg {

/// Per-face data of the symmetric weighted interior penalty form.
/// delta_* are the normal diffusivities n^T A n of the two sides; the
/// diffusion averages use the skew weights and the penalty uses their
/// harmonic mean, which keeps the form robust for strong contrast.
struct FaceData {
  double omega_K = 1.0, omega_T = 0.0;
  double gamma = 0.0;     // harmonic penalty coefficient
  double h = 0.0;         // face length
  double delta_K = 0.0, delta_T = 0.0;
};

inline FaceData face_coefficients(const ProblemData& prob, const Mesh& m,
                                  int face) {
  const auto& fc = m.faces[face];
  Vec2 n = m.face_normal[face];
  FaceData d;
  d.h = m.face_len[face];
  d.delta_K = n.dot(prob.A_of_element(m, fc.owner).apply(n));
  if (fc.boundary()) {
    d.omega_K = 1.0;
    d.omega_T = 0.0;
    d.gamma = d.delta_K;
  } else {
    d.delta_T = n.dot(prob.A_of_element(m, fc.neighbor).apply(n));
    double sum = d.delta_K + d.delta_T;
    d.omega_K = d.delta_T / sum;
    d.omega_T = d.delta_K / sum;
    d.gamma = 2.0 * d.delta_K * d.delta_T / sum;
  }
  return d;
}

/// Upwind-type face stabilization, evaluated pointwise.
inline double nu_sigma(const ProblemData& prob, const Vec2& normal,
                       const Vec2& p) {
  return 0.5 * std::abs(prob.beta(p).dot(normal));
}

/// Dirichlet data seen by a face integral; null means homogeneous. The face
/// id refers to the mesh the space lives on.
using BoundaryData = std::function<double(int face, const Vec2& p)>;

struct AssembledSystem {
  SpMat A;
  Eigen::VectorXd b;
};

namespace detail {
// Scatter a dense local block into the reserved sparse matrix.
inline void add_block(SpMat& A, const DGSpace& sp, int er, int ec,
                      const Eigen::MatrixXd& loc) {
  for (int j = 0; j < sp.n_loc; ++j) {
    int col = sp.dof(ec, j);
    for (int i = 0; i < sp.n_loc; ++i)
      A.coeffRef(sp.dof(er, i), col) += loc(i, j);
  }
}
}  // namespace detail

/// Assembles the weighted interior penalty discretization of
///   -div(A grad u) + beta . grad u + mu u = f,  u = g on the boundary.
/// The convection term is integrated by parts (volume -u beta.grad v, face
/// upwind flux), so only mu - div(beta) appears in the volume reaction.
inline AssembledSystem assemble(const DGSpace& sp, const ProblemData& prob,
                                const BoundaryData& g = nullptr) {
  const Mesh& m = *sp.mesh;
  int nb = sp.n_loc;
  int n = sp.n_dofs();
  AssembledSystem sys;
  sys.A.resize(n, n);
  sys.A.reserve(Eigen::VectorXi::Constant(n, 4 * nb));
  sys.b = Eigen::VectorXd::Zero(n);

  const auto& vrule = triangle_rule(sp.quad_degree);
  Eigen::MatrixXd loc(nb, nb);
  std::vector<Vec2> gphys(nb);

  // Volume terms.
  for (int e = 0; e < m.n_elements(); ++e) {
    const Mat2& A = prob.A_of_element(m, e);
    double detJ = 2.0 * m.elem_area[e];
    loc.setZero();
    for (size_t q = 0; q < vrule.size(); ++q) {
      Vec2 p = sp.to_physical(e, {vrule[q].x, vrule[q].y});
      double w = vrule[q].w * detJ;
      for (int b = 0; b < nb; ++b)
        gphys[b] = sp.push_gradient(e, sp.vol_grads[q * nb + b]);
      Vec2 beta = prob.beta(p);
      double react = prob.mu(p) - prob.div_beta(p);
      double fw = w * prob.f(p);
      for (int i = 0; i < nb; ++i) {
        double vi = sp.vol_vals(q, i);
        Vec2 Agi = A.apply(gphys[i]);
        double bgi = beta.dot(gphys[i]);
        for (int j = 0; j < nb; ++j) {
          double vj = sp.vol_vals(q, j);
          loc(i, j) += w * (Agi.dot(gphys[j]) + react * vi * vj - vj * bgi);
        }
        sys.b[sp.dof(e, i)] += fw * vi;
      }
    }
    detail::add_block(sys.A, sp, e, e, loc);
  }

  // Face terms.
  const auto& frule = face_rule(sp.quad_degree);
  std::vector<double> vK(nb), vT(nb);
  std::vector<Vec2> gK(nb), gT(nb), grefbuf(nb);
  Eigen::MatrixXd KK(nb, nb), KT(nb, nb), TK(nb, nb), TT(nb, nb);
  for (int f = 0; f < m.n_faces(); ++f) {
    const auto& fc = m.faces[f];
    FaceData fd = face_coefficients(prob, m, f);
    Vec2 nrm = m.face_normal[f];
    Vec2 p0 = m.vertices[fc.v0], p1 = m.vertices[fc.v1];
    double len = m.face_len[f];
    const Mat2& AK = prob.A_of_element(m, fc.owner);
    double pen_coef = prob.eta_sigma * fd.gamma / fd.h;

    if (fc.boundary()) {
      KK.setZero();
      for (const auto& qp : frule) {
        Vec2 p = p0 + qp.t * (p1 - p0);
        double w = qp.w * len;
        Vec2 ref = sp.to_reference(fc.owner, p);
        sp.basis->eval(ref, vK.data());
        sp.basis->eval_grad(ref, grefbuf.data());
        for (int b = 0; b < nb; ++b)
          gK[b] = sp.push_gradient(fc.owner, grefbuf[b]);
        double bn = prob.beta(p).dot(nrm);
        double pen = pen_coef + 0.5 * std::abs(bn);
        for (int i = 0; i < nb; ++i) {
          double flux_i = AK.apply(gK[i]).dot(nrm);
          for (int j = 0; j < nb; ++j) {
            double flux_j = AK.apply(gK[j]).dot(nrm);
            KK(i, j) += w * (-vK[i] * flux_j - vK[j] * flux_i +
                             (pen + 0.5 * bn) * vK[j] * vK[i]);
          }
          if (g) {
            double gv = g(f, p);
            sys.b[sp.dof(fc.owner, i)] +=
                w * gv * (-flux_i + (pen - 0.5 * bn) * vK[i]);
          }
        }
      }
      detail::add_block(sys.A, sp, fc.owner, fc.owner, KK);
      continue;
    }

    const Mat2& AT = prob.A_of_element(m, fc.neighbor);
    KK.setZero(); KT.setZero(); TK.setZero(); TT.setZero();
    for (const auto& qp : frule) {
      Vec2 p = p0 + qp.t * (p1 - p0);
      double w = qp.w * len;
      Vec2 refK = sp.to_reference(fc.owner, p);
      sp.basis->eval(refK, vK.data());
      sp.basis->eval_grad(refK, grefbuf.data());
      for (int b = 0; b < nb; ++b)
        gK[b] = sp.push_gradient(fc.owner, grefbuf[b]);
      Vec2 refT = sp.to_reference(fc.neighbor, p);
      sp.basis->eval(refT, vT.data());
      sp.basis->eval_grad(refT, grefbuf.data());
      for (int b = 0; b < nb; ++b)
        gT[b] = sp.push_gradient(fc.neighbor, grefbuf[b]);

      double bn = prob.beta(p).dot(nrm);
      double pen = pen_coef + 0.5 * std::abs(bn);
      for (int i = 0; i < nb; ++i) {
        double fxK_i = fd.omega_K * AK.apply(gK[i]).dot(nrm);
        double fxT_i = fd.omega_T * AT.apply(gT[i]).dot(nrm);
        for (int j = 0; j < nb; ++j) {
          double fxK_j = fd.omega_K * AK.apply(gK[j]).dot(nrm);
          double fxT_j = fd.omega_T * AT.apply(gT[j]).dot(nrm);
          // jump/average pairing with owner sign +1, neighbor sign -1
          KK(i, j) += w * (-vK[i] * fxK_j - vK[j] * fxK_i +
                           (pen + 0.5 * bn) * vK[j] * vK[i]);
          KT(i, j) += w * (-vK[i] * fxT_j + vT[j] * fxK_i +
                           (-pen + 0.5 * bn) * vT[j] * vK[i]);
          TK(i, j) += w * (vT[i] * fxK_j - vK[j] * fxT_i +
                           (-pen - 0.5 * bn) * vK[j] * vT[i]);
          TT(i, j) += w * (vT[i] * fxT_j + vT[j] * fxT_i +
                           (pen - 0.5 * bn) * vT[j] * vT[i]);
        }
      }
    }
    detail::add_block(sys.A, sp, fc.owner, fc.owner, KK);
    detail::add_block(sys.A, sp, fc.owner, fc.neighbor, KT);
    detail::add_block(sys.A, sp, fc.neighbor, fc.owner, TK);
    detail::add_block(sys.A, sp, fc.neighbor, fc.neighbor, TT);
  }
  sys.A.makeCompressed();
  return sys;
}

/// Global solve with homogeneous Dirichlet data.
inline std::pair<DGField, SolveStats> solve_global(const DGSpace& sp,
                                                   const ProblemData& prob,
                                                   const SolveOptions& opt = {}) {
  auto sys = assemble(sp, prob, nullptr);
  auto [x, st] = solve(sys.A, sys.b, opt);
  DGField u(sp);
  u.coeffs = std::move(x);
  return {std::move(u), st};
}

/// Solve on a subdomain mesh with prescribed boundary values (zero on the
/// physical boundary, given data on artificial faces).
inline std::pair<DGField, SolveStats> solve_local(const DGSpace& sub_space,
                                                  const ProblemData& prob,
                                                  const BoundaryData& g,
                                                  const SolveOptions& opt = {}) {
  auto sys = assemble(sub_space, prob, g);
  auto [x, st] = solve(sys.A, sys.b, opt);
  DGField u(sub_space);
  u.coeffs = std::move(x);
  return {std::move(u), st};
}

/// Overwrites the subdomain part of a transported global field with the
/// local correction: u_k = u_{k-1} outside, u_hat inside.
inline DGField correct_global(const DGField& u_prev, const DGField& u_hat,
                              const SubmeshMap& map) {
  DGField out = u_prev;
  const DGSpace& gsp = *u_prev.space;
  const DGSpace& ssp = *u_hat.space;
  LADG_REQUIRE(gsp.n_loc == ssp.n_loc, "correct_global: degree mismatch");
  for (int se = 0; se < ssp.mesh->n_elements(); ++se) {
    int pe = map.elem_parent[se];
    for (int b = 0; b < gsp.n_loc; ++b)
      out.coeffs[gsp.dof(pe, b)] = u_hat.coeffs[ssp.dof(se, b)];
  }
  return out;
}

/// Boundary data for a local solve: zero on physical faces, the trace of
/// the outside element of `outer` on artificial faces.
inline BoundaryData make_artificial_boundary(const Mesh& parent,
                                             const SubmeshMap& map,
                                             const DGField& outer) {
  return [&parent, &map, &outer](int face, const Vec2& p) -> double {
    if (!map.face_artificial[face]) return 0.0;
    int pf = map.face_parent[face];
    int own = parent.faces[pf].owner, nb = parent.faces[pf].neighbor;
    int outside = (map.parent_elem_to_sub[own] < 0) ? own : nb;
    return outer.eval(outside, p);
  };
}

}  // namespace ladg
