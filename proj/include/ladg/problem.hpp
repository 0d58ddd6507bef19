#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ladg/core.hpp"
#include "ladg/mesh.hpp"

namespace ladg {

/// Data of the boundary value problem
///   -div(A grad u) + beta . grad u + mu u = f   in the unit square,
///   u = 0 on the boundary,
/// with A symmetric positive definite and piecewise constant per region
/// label. Solvability needs mu - div(beta)/2 >= 0; the error estimators
/// additionally require strict positivity (checked where used).
struct ProblemData {
  std::vector<Mat2> A_by_region;  // indexed by element label; size 1 = global
  std::function<Vec2(const Vec2&)> beta;
  std::function<double(const Vec2&)> div_beta;
  std::function<double(const Vec2&)> mu;
  std::function<double(const Vec2&)> f;

  std::optional<std::function<double(const Vec2&)>> exact_u;
  std::optional<std::function<Vec2(const Vec2&)>> exact_grad;

  double eta_sigma = 10.0;  // user jump-penalty factor

  // Structure flags consumed by the augmented-norm proxy.
  std::optional<double> iso_eps;     // set when A = eps * I everywhere
  std::optional<Vec2> beta_const;    // set when beta is constant
  bool beta_zero = false;

  // Optional resolution hint: distance to the solution's sharp features and
  // their width; drives quadrature subdivision in error/residual integrals.
  std::function<double(const Vec2&)> feature_dist;
  double feature_width = 0.0;

  const Mat2& A(int label) const {
    if (A_by_region.size() == 1) return A_by_region[0];
    LADG_REQUIRE(label >= 0 && label < int(A_by_region.size()),
                 "ProblemData: no diffusion tensor for region label");
    return A_by_region[label];
  }
  const Mat2& A_of_element(const Mesh& m, int e) const {
    return A_by_region.size() == 1 ? A_by_region[0]
                                   : A(m.element_label[e]);
  }
};

inline ProblemData make_constant_problem(Mat2 A, Vec2 beta, double mu,
                                         std::function<double(const Vec2&)> f) {
  ProblemData p;
  p.A_by_region = {A};
  p.beta = [beta](const Vec2&) { return beta; };
  p.div_beta = [](const Vec2&) { return 0.0; };
  p.mu = [mu](const Vec2&) { return mu; };
  p.f = std::move(f);
  p.beta_const = beta;
  p.beta_zero = (beta.x == 0.0 && beta.y == 0.0);
  if (A.a12 == 0.0 && A.a11 == A.a22) p.iso_eps = A.a11;
  return p;
}

}  // namespace ladg
