#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ladg/core.hpp"

namespace ladg {

/// Lagrange basis of total degree `deg` on the reference triangle.
/// Nodes are the uniform lattice (i/deg, j/deg), i+j <= deg, ordered so the
/// first three are the vertices (0,0), (1,0), (0,1). Coefficients over the
/// monomial basis come from inverting the node Vandermonde matrix once.
class TriangleBasis {
public:
  explicit TriangleBasis(int deg) : deg_(deg) {
    LADG_REQUIRE(deg >= 1, "TriangleBasis: degree must be >= 1");
    nb_ = (deg + 1) * (deg + 2) / 2;
    // Monomial exponents x^p y^q, p+q <= deg.
    for (int total = 0; total <= deg; ++total)
      for (int p = total; p >= 0; --p) exps_.push_back({p, total - p});
    // Vertex nodes first, then the remaining lattice points.
    nodes_ = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; j + i <= deg; ++j) {
        if ((i == 0 && j == 0) || (i == deg && j == 0) || (i == 0 && j == deg))
          continue;
        nodes_.push_back({double(i) / deg, double(j) / deg});
      }
    Eigen::MatrixXd V(nb_, nb_);
    for (int r = 0; r < nb_; ++r)
      for (int c = 0; c < nb_; ++c)
        V(r, c) = mono(c, nodes_[r]);
    coef_ = V.inverse();
  }

  int degree() const { return deg_; }
  int size() const { return nb_; }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  /// Values of all basis functions at a reference point.
  void eval(const Vec2& p, double* out) const {
    for (int b = 0; b < nb_; ++b) {
      double s = 0.0;
      for (int c = 0; c < nb_; ++c) s += coef_(c, b) * mono(c, p);
      out[b] = s;
    }
  }

  /// Reference-coordinate gradients of all basis functions at a point.
  void eval_grad(const Vec2& p, Vec2* out) const {
    for (int b = 0; b < nb_; ++b) {
      Vec2 g{0.0, 0.0};
      for (int c = 0; c < nb_; ++c) {
        auto [px, py] = exps_[c];
        if (px > 0) g.x += coef_(c, b) * px * ipow(p.x, px - 1) * ipow(p.y, py);
        if (py > 0) g.y += coef_(c, b) * py * ipow(p.x, px) * ipow(p.y, py - 1);
      }
      out[b] = g;
    }
  }

private:
  static double ipow(double v, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= v;
    return r;
  }
  double mono(int c, const Vec2& p) const {
    return ipow(p.x, exps_[c].first) * ipow(p.y, exps_[c].second);
  }

  int deg_, nb_;
  std::vector<std::pair<int, int>> exps_;
  std::vector<Vec2> nodes_;
  Eigen::MatrixXd coef_;  // coef_(c, b): monomial c coefficient of basis b
};

}  // namespace ladg
