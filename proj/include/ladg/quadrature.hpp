#pragma once

#include <map>
#include <vector>

#include "ladg/core.hpp"

namespace ladg {

struct QuadPoint1D {
  double t;  // abscissa in [0,1]
  double w;
};

struct QuadPoint2D {
  double x, y;  // reference triangle {x,y >= 0, x+y <= 1}
  double w;     // weights sum to 1/2 (reference area)
};

/// Gauss-Legendre nodes/weights on [0,1], exact for degree 2n-1.
inline std::vector<QuadPoint1D> gauss_legendre(int n) {
  LADG_REQUIRE(n >= 1, "gauss_legendre: need at least one point");
  std::vector<QuadPoint1D> pts(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration from the Chebyshev initial guess, on [-1,1].
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      if (n == 1) { p1 = x; }
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = (n == 1) ? x : p1;
      double pm = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pm) / (x * x - 1.0);
      double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    pts[i] = {0.5 * (x + 1.0), 0.5 * w};
  }
  return pts;
}

inline const std::vector<QuadPoint1D>& face_rule(int degree) {
  static std::map<int, std::vector<QuadPoint1D>> cache;
  int n = degree / 2 + 1;  // exact through degree 2n-1 >= degree
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

/// Rule on the reference triangle, exact for total degree <= `degree`.
/// Built by collapsing a tensor Gauss rule through the Duffy map
/// (x,y) = (u, v(1-u)); the Jacobian (1-u) raises the u-degree by one.
inline const std::vector<QuadPoint2D>& triangle_rule(int degree) {
  static std::map<int, std::vector<QuadPoint2D>> cache;
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;

  int nu = (degree + 1) / 2 + 1;  // integrates u-degree <= degree+1
  int nv = degree / 2 + 1;
  auto gu = gauss_legendre(nu);
  auto gv = gauss_legendre(nv);
  std::vector<QuadPoint2D> pts;
  pts.reserve(gu.size() * gv.size());
  for (const auto& pu : gu)
    for (const auto& pv : gv)
      pts.push_back({pu.t, pv.t * (1.0 - pu.t), pu.w * pv.w * (1.0 - pu.t)});
  return cache.emplace(degree, std::move(pts)).first->second;
}

/// Integrates fn over the physical triangle (a,b,c) with the rule of the
/// given degree, optionally on a uniformly 4-split hierarchy of the given
/// depth (for integrands with features far below the element size).
template <class F>
inline double integrate_triangle(const Vec2& a, const Vec2& b, const Vec2& c,
                                 int degree, int depth, F&& fn) {
  if (depth > 0) {
    Vec2 mab = (a + b) * 0.5, mbc = (b + c) * 0.5, mca = (c + a) * 0.5;
    return integrate_triangle(a, mab, mca, degree, depth - 1, fn) +
           integrate_triangle(mab, b, mbc, degree, depth - 1, fn) +
           integrate_triangle(mca, mbc, c, degree, depth - 1, fn) +
           integrate_triangle(mab, mbc, mca, degree, depth - 1, fn);
  }
  double detJ = (b - a).x * (c - a).y - (b - a).y * (c - a).x;
  double s = 0.0;
  for (const auto& qp : triangle_rule(degree)) {
    Vec2 p{a.x + (b - a).x * qp.x + (c - a).x * qp.y,
           a.y + (b - a).y * qp.x + (c - a).y * qp.y};
    s += qp.w * fn(p);
  }
  return s * detJ;
}

}  // namespace ladg
