#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ladg/ladg.hpp"

using namespace ladg;

TEST_CASE("smoothing a continuous field is the identity") {
  Mesh m = build_uniform_mesh(3);
  DGSpace sp(m, 1);
  auto fn = [](const Vec2& p) { return std::sin(p.x) + p.y * p.y; };
  DGField u(sp);
  u.interpolate(fn);
  auto bnd = [&](int v) { return fn(m.vertices[v]); };
  PotentialField s = oswald(sp, u, bnd);
  for (int v = 0; v < m.n_vertices(); ++v)
    CHECK(s.values[v] == Catch::Approx(fn(m.vertices[v])).margin(1e-13));
}

TEST_CASE("interior nodes take the plain average of element values") {
  // crossed 1x1 pattern: four triangles share the center vertex
  Mesh m = build_uniform_mesh(1, MeshPattern::crossed);
  REQUIRE(m.n_elements() == 4);
  int center = -1;
  for (int v = 0; v < m.n_vertices(); ++v)
    if (!m.vertex_on_boundary[v]) center = v;
  REQUIRE(center >= 0);

  DGSpace sp(m, 1);
  DGField u(sp);
  // center sees 0, 0, 2, 2; every other local value stays 0
  int seen = 0;
  for (int e = 0; e < m.n_elements(); ++e)
    for (int i = 0; i < 3; ++i)
      if (m.elements[e][i] == center)
        u.coeffs[sp.dof(e, i)] = (seen++ < 2) ? 0.0 : 2.0;
  REQUIRE(seen == 4);

  PotentialField s = oswald(sp, u, nullptr);
  CHECK(s.values[center] == Catch::Approx(1.0));
  for (int v = 0; v < m.n_vertices(); ++v)
    if (v != center) CHECK(s.values[v] == 0.0);
}

TEST_CASE("physical boundary nodes are pinned to zero") {
  Mesh m = build_uniform_mesh(2);
  DGSpace sp(m, 1);
  DGField u(sp);
  u.interpolate([](const Vec2&) { return 42.0; });
  PotentialField s = oswald(sp, u, nullptr);
  for (int v = 0; v < m.n_vertices(); ++v) {
    if (m.vertex_on_boundary[v])
      CHECK(s.values[v] == 0.0);
    else
      CHECK(s.values[v] == Catch::Approx(42.0));
  }
}

TEST_CASE("potential evaluation and gradients are exact for linears") {
  Mesh m = build_uniform_mesh(2);
  PotentialField s(m);
  auto lin = [](const Vec2& p) { return 0.3 * p.x - 0.7 * p.y + 0.1; };
  for (int v = 0; v < m.n_vertices(); ++v) s.values[v] = lin(m.vertices[v]);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> bary(0.05, 0.45);
  for (int e = 0; e < m.n_elements(); ++e) {
    Vec2 a = m.vertices[m.elements[e][0]], b = m.vertices[m.elements[e][1]],
         c = m.vertices[m.elements[e][2]];
    double l1 = bary(rng), l2 = bary(rng);
    Vec2 p{a.x + l1 * (b.x - a.x) + l2 * (c.x - a.x),
           a.y + l1 * (b.y - a.y) + l2 * (c.y - a.y)};
    CHECK(s.eval(e, p) == Catch::Approx(lin(p)).margin(1e-13));
    Vec2 g = s.grad(e);
    CHECK(g.x == Catch::Approx(0.3).margin(1e-13));
    CHECK(g.y == Catch::Approx(-0.7).margin(1e-13));
  }
}

TEST_CASE("potential transport is exact linear interpolation") {
  Mesh m = build_uniform_mesh(2);
  PotentialField s(m);
  auto lin = [](const Vec2& p) { return 1.5 * p.x + 0.25 * p.y; };
  for (int v = 0; v < m.n_vertices(); ++v) s.values[v] = lin(m.vertices[v]);

  auto [fine, rel] = refine(m, {0, 2});
  PotentialField sf = transport_potential(s, rel, fine);
  for (int v = 0; v < fine.n_vertices(); ++v)
    CHECK(sf.values[v] == Catch::Approx(lin(fine.vertices[v])).margin(1e-13));
}

TEST_CASE("potential composition overwrites subdomain vertices and stays conforming") {
  Mesh m = build_uniform_mesh(2);
  PotentialField prev(m);
  for (int v = 0; v < m.n_vertices(); ++v) prev.values[v] = 1.0;

  std::vector<int> ids = {0, 1};
  auto [sub, map] = extract_submesh(m, ids);
  PotentialField hat(sub);
  for (int sv = 0; sv < sub.n_vertices(); ++sv) hat.values[sv] = 7.0;

  PotentialField out = compose_potential(prev, hat, map);
  std::vector<uint8_t> touched(m.n_vertices(), 0);
  for (int sv = 0; sv < sub.n_vertices(); ++sv) touched[map.vertex_parent[sv]] = 1;
  for (int v = 0; v < m.n_vertices(); ++v)
    CHECK(out.values[v] == (touched[v] ? 7.0 : 1.0));
}

TEST_CASE("subdomain smoother boundary data uses zero physically and the previous potential inside") {
  Mesh m = build_uniform_mesh(2);
  PotentialField prev(m);
  for (int v = 0; v < m.n_vertices(); ++v) prev.values[v] = 5.0 + v;

  std::vector<int> left;
  for (int e = 0; e < m.n_elements(); ++e) {
    Vec2 c = (m.vertices[m.elements[e][0]] + m.vertices[m.elements[e][1]] +
              m.vertices[m.elements[e][2]]) *
             (1.0 / 3.0);
    if (c.x < 0.5) left.push_back(e);
  }
  auto [sub, map] = extract_submesh(m, left);
  auto bnd = potential_boundary(m, map, prev);
  for (int sv = 0; sv < sub.n_vertices(); ++sv) {
    int pv = map.vertex_parent[sv];
    if (m.vertex_on_boundary[pv])
      CHECK(bnd(sv) == 0.0);
    else
      CHECK(bnd(sv) == prev.values[pv]);
  }
}

TEST_CASE("the smoother rejects higher degrees") {
  Mesh m = build_uniform_mesh(2);
  DGSpace sp(m, 2);
  DGField u(sp);
  CHECK_THROWS_AS(oswald(sp, u, nullptr), LadgError);
}
