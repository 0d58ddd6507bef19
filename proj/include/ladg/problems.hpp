#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "ladg/estimators.hpp"
#include "ladg/problem.hpp"

namespace ladg {

namespace detail {

/// Ramp w(t) = t - (1 - e^{-at}) / (1 - e^{-a}). Vanishes at t = 0 and
/// t = 1 and has a transition of width ~1/a next to t = 0.
struct Ramp {
  double a, denom;
  explicit Ramp(double a_) : a(a_), denom(1.0 - std::exp(-a_)) {}
  double w(double t) const { return t - (1.0 - std::exp(-a * t)) / denom; }
  double d1(double t) const { return 1.0 - a * std::exp(-a * t) / denom; }
  double d2(double t) const { return a * a * std::exp(-a * t) / denom; }
};

}  // namespace detail

/// A boundary value problem together with the closed-form solution it was
/// manufactured from. The Laplacian is kept around so that tests can check
/// the hand-coded derivatives against finite differences.
struct ManufacturedProblem {
  ProblemData data;
  std::function<double(const Vec2&)> exact_laplacian;
  std::string name;
  double sharpness = 0.0;  // reciprocal feature width
};

/// Solution exp(-kappa |x|) w(x1) w(x2) with an exponential peak of width
/// 1/kappa at the origin; A = I, beta = -(1,1), mu = 1.
inline ManufacturedProblem make_peak_problem(double kappa,
                                             double eta_sigma = 10.0) {
  detail::Ramp ramp(kappa);
  double k = kappa;

  // E = exp(-kappa r); x/r and kappa/r are taken as 0 at the origin, where
  // every occurrence is multiplied by w(x) w(y) = O(r^2).
  auto uex = [ramp, k](const Vec2& p) {
    double r = std::hypot(p.x, p.y);
    return std::exp(-k * r) * ramp.w(p.x) * ramp.w(p.y);
  };
  auto gradex = [ramp, k](const Vec2& p) {
    double r = std::hypot(p.x, p.y);
    double E = std::exp(-k * r);
    double sx = r > 1e-14 ? p.x / r : 0.0;
    double sy = r > 1e-14 ? p.y / r : 0.0;
    double wx = ramp.w(p.x), wy = ramp.w(p.y);
    return Vec2{E * (-k * sx * wx + ramp.d1(p.x)) * wy,
                E * (-k * sy * wy + ramp.d1(p.y)) * wx};
  };
  auto lapex = [ramp, k](const Vec2& p) {
    double r = std::hypot(p.x, p.y);
    double E = std::exp(-k * r);
    double sx = r > 1e-14 ? p.x / r : 0.0;
    double sy = r > 1e-14 ? p.y / r : 0.0;
    double kr = r > 1e-14 ? k / r : 0.0;
    double wx = ramp.w(p.x), wy = ramp.w(p.y);
    double lapE = E * (k * k - kr);  // 2d Laplacian of exp(-kappa r)
    return lapE * wx * wy - 2.0 * k * E * (sx * ramp.d1(p.x) * wy +
                                           sy * ramp.d1(p.y) * wx) +
           E * (ramp.d2(p.x) * wy + wx * ramp.d2(p.y));
  };

  Vec2 beta{-1.0, -1.0};
  auto f = [uex, gradex, lapex, beta](const Vec2& p) {
    return -lapex(p) + beta.dot(gradex(p)) + uex(p);
  };

  ManufacturedProblem mp;
  mp.data = make_constant_problem(Mat2::identity(), beta, 1.0, f);
  mp.data.eta_sigma = eta_sigma;
  mp.data.exact_u = uex;
  mp.data.exact_grad = gradex;
  mp.data.feature_dist = [](const Vec2& p) { return std::hypot(p.x, p.y); };
  mp.data.feature_width = 1.0 / kappa;
  mp.exact_laplacian = lapex;
  mp.name = "peak";
  mp.sharpness = kappa;
  return mp;
}

/// Solution exp(x1 + x2) w(x1) w(x2) with boundary layers of width 1/zeta
/// along the edges x1 = 0 and x2 = 0; A = eps I, beta = 0 or -(1,1), mu = 1.
inline ManufacturedProblem make_blayer_problem(double eps, bool advect,
                                               double zeta = 1e4,
                                               double eta_sigma = 10.0) {
  detail::Ramp ramp(zeta);

  auto uex = [ramp](const Vec2& p) {
    return std::exp(p.x + p.y) * ramp.w(p.x) * ramp.w(p.y);
  };
  auto gradex = [ramp](const Vec2& p) {
    double E = std::exp(p.x + p.y);
    double wx = ramp.w(p.x), wy = ramp.w(p.y);
    return Vec2{E * (wx + ramp.d1(p.x)) * wy, E * (wy + ramp.d1(p.y)) * wx};
  };
  auto lapex = [ramp](const Vec2& p) {
    double E = std::exp(p.x + p.y);
    double wx = ramp.w(p.x), wy = ramp.w(p.y);
    return E * (2.0 * wx * wy + 2.0 * ramp.d1(p.x) * wy +
                2.0 * wx * ramp.d1(p.y) + ramp.d2(p.x) * wy +
                wx * ramp.d2(p.y));
  };

  Vec2 beta = advect ? Vec2{-1.0, -1.0} : Vec2{0.0, 0.0};
  auto f = [uex, gradex, lapex, beta, eps](const Vec2& p) {
    return -eps * lapex(p) + beta.dot(gradex(p)) + uex(p);
  };

  ManufacturedProblem mp;
  mp.data = make_constant_problem(Mat2::scalar(eps), beta, 1.0, f);
  mp.data.eta_sigma = eta_sigma;
  mp.data.exact_u = uex;
  mp.data.exact_grad = gradex;
  mp.data.feature_dist = [](const Vec2& p) { return std::min(p.x, p.y); };
  mp.data.feature_width = 1.0 / zeta;
  mp.exact_laplacian = lapex;
  mp.name = "blayer";
  mp.sharpness = zeta;
  return mp;
}

/// Errors of a discrete solution against the closed-form one.
struct ExactErrors {
  double energy = 0.0;     // broken energy norm of u - u_h
  double augmented = 0.0;  // augmented norm; equals energy when beta = 0
  bool quad_capped = false;
};

/// Energy and augmented norms of u - u_h, integrated with feature-resolving
/// subdivided quadrature. The jump contribution of the augmented norm
/// reduces to the jumps of u_h since the exact solution is continuous.
inline ExactErrors exact_errors(const DGField& uh, const ProblemData& prob,
                                int subdivision_cap = 6) {
  LADG_REQUIRE(prob.exact_u && prob.exact_grad,
               "exact_errors: problem has no closed-form solution");
  const DGSpace& sp = *uh.space;
  const Mesh& m = *sp.mesh;
  const auto& uex = *prob.exact_u;
  const auto& gex = *prob.exact_grad;

  ExactErrors out;
  double en2 = 0.0, l22 = 0.0;
  for (int e = 0; e < m.n_elements(); ++e) {
    const Mat2& A = prob.A_of_element(m, e);
    Vec2 va = m.vertices[m.elements[e][0]];
    Vec2 vb = m.vertices[m.elements[e][1]];
    Vec2 vc = m.vertices[m.elements[e][2]];
    int depth = detail::feature_depth(prob, m, e, subdivision_cap,
                                      &out.quad_capped);
    en2 += integrate_triangle(va, vb, vc, sp.quad_degree + 2, depth,
                              [&](const Vec2& p) {
      double dv = uex(p) - uh.eval(e, p);
      Vec2 dg = gex(p) - uh.grad(e, p);
      return dg.dot(A.apply(dg)) +
             (prob.mu(p) - 0.5 * prob.div_beta(p)) * dv * dv;
    });
    if (!prob.beta_zero)
      l22 += integrate_triangle(va, vb, vc, sp.quad_degree + 2, depth,
                                [&](const Vec2& p) {
        double dv = uex(p) - uh.eval(e, p);
        return dv * dv;
      });
  }
  out.energy = std::sqrt(std::max(0.0, en2));
  if (prob.beta_zero) {
    out.augmented = out.energy;
    return out;
  }

  LADG_REQUIRE(prob.iso_eps && prob.beta_const,
               "exact_errors: augmented norm needs A = eps*I, constant beta");
  Vec2 beta = *prob.beta_const;
  CutoffConstants cc = cutoff_constants(sp, prob);
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
        double j = uh.eval(e, p) - uh.eval(other, p);
        j2 += qp.w * m.face_len[f] * j * j * bn * bn;
      }
      ksum += std::sqrt(cc.mt[e]) * std::sqrt(cc.C_t[e][i]) * std::sqrt(j2);
    }
    jump2 += ksum * ksum;
  }
  double nb = std::hypot(beta.x, beta.y);
  out.augmented = out.energy + nb / std::sqrt(*prob.iso_eps) * std::sqrt(l22) +
                  0.5 * std::sqrt(jump2);
  return out;
}

/// Least-squares slope of log(values) against log(h); NaN if a value is
/// not positive.
inline double fit_order(const std::vector<double>& h,
                        const std::vector<double>& values) {
  LADG_REQUIRE(h.size() == values.size() && h.size() >= 2,
               "fit_order: need matching series of length >= 2");
  int n = int(h.size());
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(values[i] > 0.0) || !(h[i] > 0.0))
      return std::numeric_limits<double>::quiet_NaN();
    sx += std::log(h[i]);
    sy += std::log(values[i]);
  }
  double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    double dx = std::log(h[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(values[i]) - my);
  }
  return sxy / sxx;
}

}  // namespace ladg
