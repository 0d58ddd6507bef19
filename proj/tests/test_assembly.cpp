#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ladg/ladg.hpp"

using namespace ladg;

namespace {

ProblemData laplace_like(double mu = 0.0) {
  return make_constant_problem(Mat2::identity(), {0.0, 0.0}, mu,
                               [](const Vec2&) { return 0.0; });
}

}  // namespace

TEST_CASE("face weights for equal diffusivities are one half") {
  Mesh m = build_uniform_mesh(2);
  ProblemData prob = laplace_like();
  for (int f = 0; f < m.n_faces(); ++f) {
    if (m.faces[f].boundary()) continue;
    FaceData d = face_coefficients(prob, m, f);
    CHECK(d.omega_K == Catch::Approx(0.5));
    CHECK(d.omega_T == Catch::Approx(0.5));
    CHECK(d.gamma == Catch::Approx(1.0));
  }
}

TEST_CASE("face weights skew toward the less diffusive side") {
  // two regions: label 0 with A = I, label 1 with A = 3I
  Mesh m = build_uniform_mesh(2);
  for (int e = 0; e < m.n_elements(); ++e) {
    Vec2 c = (m.vertices[m.elements[e][0]] + m.vertices[m.elements[e][1]] +
              m.vertices[m.elements[e][2]]) *
             (1.0 / 3.0);
    m.element_label[e] = c.x < 0.5 ? 0 : 1;
  }
  ProblemData prob = laplace_like();
  prob.A_by_region = {Mat2::identity(), Mat2::scalar(3.0)};

  bool saw_interface = false;
  for (int f = 0; f < m.n_faces(); ++f) {
    const auto& fc = m.faces[f];
    if (fc.boundary()) continue;
    if (m.element_label[fc.owner] == m.element_label[fc.neighbor]) continue;
    saw_interface = true;
    FaceData d = face_coefficients(prob, m, f);
    double dK = d.delta_K, dT = d.delta_T;
    CHECK(((dK == Catch::Approx(1.0) && dT == Catch::Approx(3.0)) ||
           (dK == Catch::Approx(3.0) && dT == Catch::Approx(1.0))));
    // the weight of a side is the opposite delta over the sum
    CHECK(d.omega_K == Catch::Approx(dT / (dK + dT)));
    CHECK(d.omega_T == Catch::Approx(dK / (dK + dT)));
    CHECK(d.omega_K + d.omega_T == Catch::Approx(1.0));
    CHECK(d.gamma == Catch::Approx(2.0 * dK * dT / (dK + dT)));  // = 3/2
    CHECK(d.gamma == Catch::Approx(1.5));
  }
  CHECK(saw_interface);
}

TEST_CASE("boundary faces take the one-sided weight and penalty") {
  Mesh m = build_uniform_mesh(2);
  double eps = 1e-3;
  ProblemData prob = make_constant_problem(Mat2::scalar(eps),
                                           {0.0, 0.0}, 1.0,
                                           [](const Vec2&) { return 0.0; });
  for (int f = 0; f < m.n_faces(); ++f) {
    if (!m.faces[f].boundary()) continue;
    FaceData d = face_coefficients(prob, m, f);
    CHECK(d.omega_K == 1.0);
    CHECK(d.gamma == Catch::Approx(eps));
  }
}

TEST_CASE("pure diffusion assembles a symmetric positive matrix") {
  Mesh m = build_uniform_mesh(4);
  DGSpace sp(m, 1);
  ProblemData prob = laplace_like(0.0);
  auto sys = assemble(sp, prob, nullptr);
  REQUIRE(sys.A.rows() == sp.n_dofs());
  CHECK(is_symmetric(sys.A, 1e-12));

  // nonnegative Rayleigh quotients on random vectors
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd v(sys.A.rows());
    for (int i = 0; i < v.size(); ++i) v[i] = gauss(rng);
    double q = v.dot(sys.A * v) / v.squaredNorm();
    CHECK(q >= -1e-12);
  }
}

TEST_CASE("advection breaks symmetry") {
  Mesh m = build_uniform_mesh(3);
  DGSpace sp(m, 1);
  ProblemData prob = make_constant_problem(Mat2::identity(), {1.0, 0.5}, 1.0,
                                           [](const Vec2&) { return 1.0; });
  auto sys = assemble(sp, prob, nullptr);
  CHECK_FALSE(is_symmetric(sys.A, 1e-12));
}

TEST_CASE("constant one with matching data has zero residual") {
  Mesh m = build_uniform_mesh(3);
  DGSpace sp(m, 1);
  double mu = 2.0;
  ProblemData prob = make_constant_problem(Mat2::identity(), {0.4, -0.3}, mu,
                                           [mu](const Vec2&) { return mu; });
  BoundaryData g_one = [](int, const Vec2&) { return 1.0; };
  auto sys = assemble(sp, prob, g_one);

  DGField one(sp);
  one.interpolate([](const Vec2&) { return 1.0; });
  Eigen::VectorXd r = sys.A * one.coeffs - sys.b;
  CHECK(r.lpNorm<Eigen::Infinity>() <= 1e-12 * sys.b.lpNorm<Eigen::Infinity>());
}

TEST_CASE("linear solutions are reproduced exactly") {
  auto exact = [](const Vec2& p) { return 2.0 + 3.0 * p.x - p.y; };
  Vec2 grad_exact{3.0, -1.0};
  Vec2 beta{0.7, -0.2};
  double mu = 1.5;
  ProblemData prob = make_constant_problem(
      Mat2::identity(), beta, mu, [=](const Vec2& p) {
        return beta.dot(grad_exact) + mu * exact(p);
      });
  Mesh m = build_uniform_mesh(4);
  DGSpace sp(m, 1);
  BoundaryData g = [&](int, const Vec2& p) { return exact(p); };
  auto sys = assemble(sp, prob, g);
  auto [x, st] = solve(sys.A, sys.b, {});

  DGField uh(sp);
  uh.coeffs = x;
  DGField ih(sp);
  ih.interpolate(exact);
  CHECK((uh.coeffs - ih.coeffs).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("the matrix does not depend on boundary data and the rhs is affine in it") {
  Mesh m = build_uniform_mesh(2);
  DGSpace sp(m, 1);
  ProblemData prob = make_constant_problem(Mat2::identity(), {1.0, 0.0}, 1.0,
                                           [](const Vec2&) { return 1.0; });
  BoundaryData g1 = [](int, const Vec2& p) { return p.x; };
  BoundaryData g2 = [](int, const Vec2& p) { return 0.5 - p.y; };
  BoundaryData g12 = [](int, const Vec2& p) { return p.x + 0.5 - p.y; };
  auto s0 = assemble(sp, prob, nullptr);
  auto s1 = assemble(sp, prob, g1);
  auto s2 = assemble(sp, prob, g2);
  auto s12 = assemble(sp, prob, g12);

  SpMat d1 = s1.A - s0.A;
  SpMat d2 = s12.A - s2.A;
  CHECK(d1.norm() == 0.0);
  CHECK(d2.norm() == 0.0);

  Eigen::VectorXd lhs = (s1.b - s0.b) + (s2.b - s0.b);
  Eigen::VectorXd rhs = s12.b - s0.b;
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-12 * (1.0 + s0.b.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("local solve with exact artificial data beats the zero-data solve") {
  // u = sin(pi x) sin(pi y): order one on the interface x = 1/2, so wrong
  // (zero) artificial data must cost far more than the exact trace.
  auto exact = [](const Vec2& p) { return std::sin(M_PI * p.x) * std::sin(M_PI * p.y); };
  ProblemData prob = make_constant_problem(
      Mat2::identity(), {0.0, 0.0}, 1.0, [&](const Vec2& p) {
        return (2.0 * M_PI * M_PI + 1.0) * std::sin(M_PI * p.x) * std::sin(M_PI * p.y);
      });
  prob.exact_u = exact;
  prob.exact_grad = [](const Vec2& p) {
    return Vec2{M_PI * std::cos(M_PI * p.x) * std::sin(M_PI * p.y),
                M_PI * std::sin(M_PI * p.x) * std::cos(M_PI * p.y)};
  };

  Mesh m = build_uniform_mesh(8);
  std::vector<int> left;
  for (int e = 0; e < m.n_elements(); ++e) {
    Vec2 c = (m.vertices[m.elements[e][0]] + m.vertices[m.elements[e][1]] +
              m.vertices[m.elements[e][2]]) *
             (1.0 / 3.0);
    if (c.x < 0.5) left.push_back(e);
  }
  auto [sub, map] = extract_submesh(m, left);
  DGSpace ssp(sub, 1);

  BoundaryData g = [&](int f, const Vec2& p) {
    return map.face_artificial[f] ? exact(p) : 0.0;
  };
  auto [ul, stl] = solve_local(ssp, prob, g, {});
  ExactErrors el = exact_errors(ul, prob);

  auto [uz, stz] = solve_global(ssp, prob, {});  // zero data everywhere
  ExactErrors ez = exact_errors(uz, prob);

  CHECK(el.energy < 0.5 * ez.energy);
}

TEST_CASE("a one-element subdomain produces a well-posed three-dof system") {
  Mesh m = build_uniform_mesh(2);
  auto [sub, map] = extract_submesh(m, {0});
  DGSpace ssp(sub, 1);
  CHECK(ssp.n_dofs() == 3);
  ProblemData prob = laplace_like(1.0);
  prob.f = [](const Vec2&) { return 1.0; };
  auto [u, st] = solve_local(ssp, prob, nullptr, {});
  CHECK(u.coeffs.allFinite());
  CHECK(u.coeffs.lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("correcting with the local solution overwrites only the subdomain") {
  Mesh m = build_uniform_mesh(2);
  DGSpace sp(m, 1);
  DGField prev(sp);
  prev.interpolate([](const Vec2& p) { return p.x + p.y; });

  std::vector<int> sub_ids = {0, 1, 2};
  auto [sub, map] = extract_submesh(m, sub_ids);
  DGSpace ssp(sub, 1);
  DGField uhat(ssp);
  uhat.interpolate([](const Vec2&) { return -5.0; });

  DGField corrected = correct_global(prev, uhat, map);
  for (int e = 0; e < m.n_elements(); ++e) {
    bool inside = map.parent_elem_to_sub[e] >= 0;
    for (int i = 0; i < sp.n_loc; ++i) {
      double v = corrected.coeffs[sp.dof(e, i)];
      if (inside)
        CHECK(v == -5.0);
      else
        CHECK(v == prev.coeffs[sp.dof(e, i)]);
    }
  }
}

TEST_CASE("uniform refinement halves the peak energy error") {
  ManufacturedProblem mp = make_peak_problem(10.0);
  double err[2];
  int idx = 0;
  for (int n : {8, 16}) {
    Mesh m = build_uniform_mesh(n);
    DGSpace sp(m, 1);
    auto [u, st] = solve_global(sp, mp.data, {});
    err[idx++] = exact_errors(u, mp.data).energy;
  }
  double ratio = err[0] / err[1];
  CHECK(ratio > 1.5);
  CHECK(ratio < 3.0);
}
