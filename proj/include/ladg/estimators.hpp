#pragma once

#include <numeric>

#include "ladg/constants.hpp"
#include "ladg/history.hpp"
#include "ladg/potential.hpp"
#include "ladg/rtn.hpp"

namespace ladg {

namespace detail {
/// Subdivision depth so that quadrature cells resolve the solution features
/// on this element; 0 away from the features. Sets *capped when the cap
/// truncates the request (the integral is then likely under-resolved).
inline int feature_depth(const ProblemData& prob, const Mesh& m, int e,
                         int cap, bool* capped) {
  if (!prob.feature_dist || prob.feature_width <= 0.0) return 0;
  double h = m.elem_diam[e];
  double d = prob.feature_dist(m.centroid(e));
  for (int v : m.elements[e])
    d = std::min(d, prob.feature_dist(m.vertices[v]));
  if (d > h + 16.0 * prob.feature_width) return 0;
  if (h <= 2.0 * prob.feature_width) return 0;
  int want = int(std::ceil(std::log2(h / prob.feature_width)));
  if (want > cap && capped) *capped = true;
  return std::min(want, cap);
}
}  // namespace detail

/// Elementwise estimator values plus their roll-ups
/// (eta_X = sqrt(sum_K eta_{X,K}^2)) and the two global bounds.
struct EstimatorReport {
  // per element
  std::vector<double> nc, r, df, c1, c2, tc1, up, tup, g1, g2;
  std::vector<double> df1, df2;  // the two branches behind df = min(df1, df2)
  std::vector<double> marking;   // sum of the ten terms
  // roll-ups
  double NC = 0, R = 0, DF = 0, C1 = 0, C2 = 0, tC1 = 0, U = 0, tU = 0,
         G1 = 0, G2 = 0;
  double eta = 0;        // bound for the energy-norm error
  double eta_tilde = 0;  // bound for the augmented-norm error
  double conservation_max = 0;  // max_K residual / (1 + ||f||_K)
  bool quad_warning = false;    // element size far above feature width
};

/// Recomputes the global roll-ups and the two reliability bounds from the
/// per-element values:
///   eta       = (sum nc^2)^{1/2} + (sum eta1^2)^{1/2},
///   eta_tilde = 2 eta + (sum eta2^2)^{1/2},
/// where eta1 = r+df+c1+c2+up+g1+g2 and eta2 = r+df+tc1+tup+g1+g2.
inline void global_bounds(EstimatorReport& rep) {
  auto rollup = [](const std::vector<double>& v) {
    double s2 = 0.0;
    for (double x : v) s2 += x * x;
    return std::sqrt(s2);
  };
  rep.NC = rollup(rep.nc);
  rep.R = rollup(rep.r);
  rep.DF = rollup(rep.df);
  rep.C1 = rollup(rep.c1);
  rep.C2 = rollup(rep.c2);
  rep.tC1 = rollup(rep.tc1);
  rep.U = rollup(rep.up);
  rep.tU = rollup(rep.tup);
  rep.G1 = rollup(rep.g1);
  rep.G2 = rollup(rep.g2);
  double s1 = 0.0, s2 = 0.0;
  for (size_t e = 0; e < rep.nc.size(); ++e) {
    double e1 = rep.r[e] + rep.df[e] + rep.c1[e] + rep.c2[e] + rep.up[e] +
                rep.g1[e] + rep.g2[e];
    double e2 = rep.r[e] + rep.df[e] + rep.tc1[e] + rep.tup[e] + rep.g1[e] +
                rep.g2[e];
    s1 += e1 * e1;
    s2 += e2 * e2;
  }
  rep.eta = rep.NC + std::sqrt(s1);
  rep.eta_tilde = 2.0 * rep.eta + std::sqrt(s2);
}

/// Evaluates all error estimators for the composed solution
/// (u_k, s_k, t_k, q_k) with subdomain history `hist`.
inline EstimatorReport estimate_elements(const DGField& u,
                                         const PotentialField& s,
                                         const RTNField& t, const RTNField& q,
                                         const ProblemData& prob,
                                         const SubdomainHistory& hist,
                                         int subdivision_cap = 6) {
  const DGSpace& sp = *u.space;
  const Mesh& m = *sp.mesh;
  int ne = m.n_elements();
  CutoffConstants cc = cutoff_constants(sp, prob);
  auto skel = skeleton_faces(m, hist);

  EstimatorReport rep;
  auto alloc = [&](std::vector<double>& v) { v.assign(ne, 0.0); };
  alloc(rep.nc); alloc(rep.r); alloc(rep.df); alloc(rep.c1); alloc(rep.c2);
  alloc(rep.tc1); alloc(rep.up); alloc(rep.tup); alloc(rep.g1); alloc(rep.g2);
  alloc(rep.df1); alloc(rep.df2);
  alloc(rep.marking);

  const auto& vrule = triangle_rule(sp.quad_degree);
  const auto& frule = face_rule(sp.quad_degree);

  for (int e = 0; e < ne; ++e) {
    const Mat2& A = prob.A_of_element(m, e);
    Mat2 Ah = A.sqrt_spd(), Aih = A.inv_sqrt_spd();
    double area = m.elem_area[e];
    double detJ = 2.0 * area;
    Vec2 va = m.vertices[m.elements[e][0]], vb = m.vertices[m.elements[e][1]],
         vc = m.vertices[m.elements[e][2]];
    Vec2 grad_s = s.grad(e);
    double divt = t.div(e), divq = q.div(e);

    // Volume terms sharing the standard element rule.
    double nc2 = 0.0, df1_2 = 0.0;
    double c1_mean = 0.0, c1_sq = 0.0, tc1_mean = 0.0, tc1_sq = 0.0;
    double c2_2 = 0.0, df2_mean = 0.0, df2_sq = 0.0;
    for (const auto& qp : vrule) {
      Vec2 p = sp.to_physical(e, {qp.x, qp.y});
      double w = qp.w * detJ;
      double uv = u.eval(e, p), sv = s.eval(e, p);
      Vec2 gu = u.grad(e, p);
      double divb = prob.div_beta(p);
      Vec2 beta = prob.beta(p);
      // nonconformity
      Vec2 d{gu.x - grad_s.x, gu.y - grad_s.y};
      nc2 += w * (d.dot(A.apply(d)) +
                  (prob.mu(p) - 0.5 * divb) * (uv - sv) * (uv - sv));
      // diffusive flux, first candidate
      Vec2 tv = t.eval(e, p);
      Vec2 df{Ah.apply(gu).x + Aih.apply(tv).x,
              Ah.apply(gu).y + Aih.apply(tv).y};
      df1_2 += w * df.dot(df);
      // div(A grad u) vanishes for P1; higher degrees are not composed here
      double ddf = divt;
      df2_mean += w * ddf;
      df2_sq += w * ddf * ddf;
      // convection estimators
      double dc1 = divq - divb * sv - beta.dot(grad_s);
      c1_mean += w * dc1;
      c1_sq += w * dc1 * dc1;
      double dtc1 = divq - divb * uv - beta.dot(gu);
      tc1_mean += w * dtc1;
      tc1_sq += w * dtc1 * dtc1;
      c2_2 += w * divb * divb * (uv - sv) * (uv - sv);
    }
    rep.nc[e] = std::sqrt(nc2);
    rep.c2[e] = 0.5 / std::sqrt(cc.c_bm[e]) * std::sqrt(c2_2);
    auto fluct = [&](double mean, double sq) {
      // ||(I - pi_0) g||^2 = ||g||^2 - |K| mean(g)^2
      double mu0 = mean / area;
      return std::sqrt(std::max(0.0, sq - area * mu0 * mu0));
    };
    rep.c1[e] = cc.m[e] * fluct(c1_mean, c1_sq);
    rep.tc1[e] = cc.m[e] * fluct(tc1_mean, tc1_sq);
    double df2_vol = cc.m[e] * fluct(df2_mean, df2_sq);

    // residual estimator; may need feature-resolving subdivision since f
    // can vary far below the element size
    int depth = detail::feature_depth(prob, m, e, subdivision_cap,
                                      &rep.quad_warning);
    double r2 = integrate_triangle(va, vb, vc, sp.quad_degree + 2, depth,
                                   [&](const Vec2& p) {
      double res = prob.f(p) - divt - divq -
                   (prob.mu(p) - prob.div_beta(p)) * u.eval(e, p);
      return res * res;
    });
    rep.r[e] = cc.m[e] * std::sqrt(std::max(0.0, r2));

    // face terms
    double df2_face = 0.0, up_sum = 0.0, tup_sum = 0.0, g1_sum = 0.0,
           g2_sum = 0.0;
    for (int i = 0; i < 3; ++i) {
      int f = m.element_faces[e][i];
      const auto& fc = m.faces[f];
      Vec2 nrm = m.face_normal[f];
      Vec2 p0 = m.vertices[fc.v0], p1 = m.vertices[fc.v1];
      double len = m.face_len[f];
      bool bnd = fc.boundary();
      int other = bnd ? -1 : (fc.owner == e ? fc.neighbor : fc.owner);

      double dfn2 = 0.0;       // ||(A grad u + t) . n||^2 on the face
      double mean_qs = 0.0;    // face mean of {q - beta s} . n
      double mean_qu = 0.0;    // face mean of {q - beta u} . n
      for (const auto& qp : frule) {
        Vec2 p = p0 + qp.t * (p1 - p0);
        double w = qp.w * len;
        Vec2 gu = u.grad(e, p);
        Vec2 tv = t.eval(e, p);
        double dn = (A.apply(gu) + tv).dot(nrm);
        dfn2 += w * dn * dn;
        Vec2 beta = prob.beta(p);
        double qs_K = (q.eval(e, p) - beta * s.eval(e, p)).dot(nrm);
        double qu_K = (q.eval(e, p) - beta * u.eval(e, p)).dot(nrm);
        if (bnd) {
          mean_qs += qp.w * 0.5 * qs_K;
          mean_qu += qp.w * 0.5 * qu_K;
        } else {
          double qs_T = (q.eval(other, p) - beta * s.eval(other, p)).dot(nrm);
          double qu_T = (q.eval(other, p) - beta * u.eval(other, p)).dot(nrm);
          mean_qs += qp.w * 0.5 * (qs_K + qs_T);
          mean_qu += qp.w * 0.5 * (qu_K + qu_T);
        }
      }
      df2_face += std::sqrt(cc.C_t[e][i]) * std::sqrt(dfn2);
      double chi = bnd ? 2.0 : 1.0;
      up_sum += chi * cc.m_sigma[f] * std::abs(mean_qs) * std::sqrt(len);
      tup_sum += chi * cc.m_sigma[f] * std::abs(mean_qu) * std::sqrt(len);
      if (!bnd && skel[f]) {
        double jq = q.normal_jump(f);
        double jt = t.normal_jump(f);
        g1_sum += std::abs(jq) * len;  // L1 norm of the constant jump
        g2_sum += cc.D_t[e][i] * std::abs(jt) * std::sqrt(len);
      }
    }
    rep.df1[e] = std::sqrt(df1_2);
    rep.df2[e] = df2_vol + std::sqrt(cc.mt[e]) * df2_face;
    rep.df[e] = std::min(rep.df1[e], rep.df2[e]);
    rep.up[e] = up_sum;
    rep.tup[e] = tup_sum;
    rep.g1[e] = 0.5 / std::sqrt(area * cc.c_bm[e]) * g1_sum;
    rep.g2[e] = 0.5 * g2_sum;

    rep.marking[e] = rep.nc[e] + rep.r[e] + rep.df[e] + rep.c1[e] +
                     rep.c2[e] + rep.up[e] + rep.g1[e] + rep.g2[e] +
                     rep.tc1[e] + rep.tup[e];
  }

  global_bounds(rep);
  rep.conservation_max = conservation_max(t, q, u, prob);
  return rep;
}

/// Broken energy norm |||v|||^2 = ||A^{1/2} grad v||^2
/// + ||(mu - div(beta)/2)^{1/2} v||^2 of a DG field.
inline double energy_norm(const DGField& v, const ProblemData& prob) {
  const DGSpace& sp = *v.space;
  const Mesh& m = *sp.mesh;
  double s2 = 0.0;
  const auto& vrule = triangle_rule(sp.quad_degree);
  for (int e = 0; e < m.n_elements(); ++e) {
    const Mat2& A = prob.A_of_element(m, e);
    double detJ = 2.0 * m.elem_area[e];
    for (const auto& qp : vrule) {
      Vec2 p = sp.to_physical(e, {qp.x, qp.y});
      double val = v.eval(e, p);
      Vec2 g = v.grad(e, p);
      s2 += qp.w * detJ *
            (g.dot(A.apply(g)) +
             (prob.mu(p) - 0.5 * prob.div_beta(p)) * val * val);
    }
  }
  return std::sqrt(s2);
}

/// Computable proxy of the augmented norm, valid for A = eps I and constant
/// beta: |||v||| + eps^{-1/2} |beta| ||v|| + jump term over internal faces.
inline double augmented_norm_proxy(const DGField& v, const ProblemData& prob) {
  LADG_REQUIRE(prob.iso_eps && prob.beta_const,
               "augmented_norm_proxy: needs A = eps*I and constant beta");
  if (prob.beta_zero) return energy_norm(v, prob);
  const DGSpace& sp = *v.space;
  const Mesh& m = *sp.mesh;
  Vec2 beta = *prob.beta_const;
  CutoffConstants cc = cutoff_constants(sp, prob);
  double en = energy_norm(v, prob);
  double l2 = 0.0;
  const auto& vrule = triangle_rule(sp.quad_degree);
  for (int e = 0; e < m.n_elements(); ++e) {
    double detJ = 2.0 * m.elem_area[e];
    for (const auto& qp : vrule) {
      double val = v.eval(e, sp.to_physical(e, {qp.x, qp.y}));
      l2 += qp.w * detJ * val * val;
    }
  }
  const auto& frule = face_rule(sp.quad_degree);
  double jump2 = 0.0;
  for (int e = 0; e < m.n_elements(); ++e) {
    double ksum = 0.0;
    for (int i = 0; i < 3; ++i) {
      int f = m.element_faces[e][i];
      const auto& fc = m.faces[f];
      if (fc.boundary()) continue;
      int other = (fc.owner == e) ? fc.neighbor : fc.owner;
      double bn = beta.dot(m.face_normal[f]);
      Vec2 p0 = m.vertices[fc.v0], p1 = m.vertices[fc.v1];
      double j2 = 0.0;
      for (const auto& qp : frule) {
        Vec2 p = p0 + qp.t * (p1 - p0);
        double j = v.eval(e, p) - v.eval(other, p);
        j2 += qp.w * m.face_len[f] * j * j * bn * bn;
      }
      ksum += std::sqrt(cc.mt[e]) * std::sqrt(cc.C_t[e][i]) * std::sqrt(j2);
    }
    jump2 += ksum * ksum;
  }
  return en + std::sqrt(1.0 / *prob.iso_eps) * beta.norm() * std::sqrt(l2) +
         0.5 * std::sqrt(jump2);
}

struct Effectivity {
  double index_eta = std::numeric_limits<double>::quiet_NaN();
  double index_eta_tilde = std::numeric_limits<double>::quiet_NaN();
};

inline Effectivity effectivity(const EstimatorReport& rep, double err_energy,
                               double err_augmented) {
  Effectivity ix;
  if (err_energy > 0.0) ix.index_eta = rep.eta / err_energy;
  if (err_augmented > 0.0) ix.index_eta_tilde = rep.eta_tilde / err_augmented;
  return ix;
}

/// Smallest set of elements, by decreasing marking estimator (ties broken
/// by ascending element id), whose squared mass reaches theta times the
/// total. Returns element ids in that order.
inline std::vector<int> mark_subdomain(const std::vector<double>& eta_m,
                                       double theta) {
  LADG_REQUIRE(theta > 0.0 && theta <= 1.0, "mark_subdomain: theta in (0,1]");
  std::vector<int> order(eta_m.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (eta_m[a] != eta_m[b]) return eta_m[a] > eta_m[b];
    return a < b;
  });
  double total = 0.0;
  for (double v : eta_m) total += v * v;
  std::vector<int> out;
  double acc = 0.0;
  for (int e : order) {
    if (acc >= theta * total && !out.empty()) break;
    out.push_back(e);
    acc += eta_m[e] * eta_m[e];
  }
  // Trim in the degenerate all-zero case to a single element.
  if (total == 0.0) out.resize(1);
  return out;
}

/// Share of the estimated error mass carried by the subdomain-interface
/// jumps; near or above 1 means locality is lost.
inline double locality_diagnostic(const EstimatorReport& rep) {
  double gamma = std::sqrt(rep.G1 * rep.G1 + rep.G2 * rep.G2);
  return gamma / (rep.eta + 1e-300);
}

}  // namespace ladg
