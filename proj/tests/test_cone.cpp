#include "doctest.h"

#include "indeftheta/cone.hpp"
#include "indeftheta/error.hpp"
#include "indeftheta/examples.hpp"

#include "helpers.hpp"

#include <algorithm>
#include <random>

using namespace indeftheta;
using namespace testing_helpers;

namespace {

Cone make_cone(const Example& ex) { return Cone(QuadSpace(ex.gram), ex.walls); }

const Edge* find_edge(const std::vector<Edge>& edges, WallMask m) {
  for (const auto& e : edges)
    if (e.walls == m) return &e;
  return nullptr;
}

}  // namespace

TEST_CASE("wall set validation") {
  const QuadSpace ex(diag({1, -1, -1}));
  CHECK_THROWS_AS(Cone(ex, WallSet{ConeKind::Tetrahedral, {vec({0, 0, 1}), vec({1, 1, 2})}, {}}), Error);
  CHECK_THROWS_AS(Cone(ex, WallSet{ConeKind::Tetrahedral, {vec({0, 0, 1}), vec({0, 0, 0}), vec({1, 2, 2})}, {}}),
                  Error);
  CHECK_THROWS_AS(Cone(ex, WallSet{ConeKind::Tetrahedral, {vec({0, 0, 1}), vec({0, 0, 3}), vec({1, 2, 2})}, {}}),
                  Error);
  // a negative multiple is a legitimate (if degenerate) wall set
  CHECK_NOTHROW(Cone(ex, WallSet{ConeKind::Tetrahedral, {vec({0, 0, 1}), vec({0, 0, -1}), vec({1, 2, 2})}, {}}));
  CHECK_THROWS_AS(Cone(ex, WallSet{ConeKind::Cubical,
                                   {vec({0, 0, 1}), vec({1, 1, 2}), vec({1, 2, 2}), vec({1, 0, 0})},
                                   {{0, 1}, {1, 2}}}),
                  Error);
}

TEST_CASE("edges of the running example") {
  const Cone c = make_cone(builtin_example("running"));
  const auto edges = c.edges();
  REQUIRE(edges.size() == 3);
  CHECK(edges[0].walls == 0b011);
  CHECK(edges[1].walls == 0b101);
  CHECK(edges[2].walls == 0b110);

  const Edge* iso = find_edge(edges, 0b011);
  CHECK(iso->isotropic);
  CHECK(iso->rational);
  CHECK(iso->span == SpanKind::NegativeSemidefinite);
  REQUIRE(iso->radical.size() == 1);
  const RatVector& r = iso->radical[0];
  CHECK(r[0] == r[1]);
  CHECK(r[2] == 0);
  CHECK(r[0] != 0);
  for (WallMask m : {WallMask{0b101}, WallMask{0b110}}) {
    CHECK_FALSE(find_edge(edges, m)->isotropic);
    CHECK(find_edge(edges, m)->span == SpanKind::NegativeDefinite);
  }

  const auto locus = c.isotropic_locus();
  REQUIRE(locus.size() == 1);
  CHECK(locus[0].walls == 0b011);
  // E^perp is the isotropic line through (1,1,0)
  CHECK(c.wall_signs(vec({1, 1, 0}))[0] == 0);
  CHECK(c.wall_signs(vec({1, 1, 0}))[1] == 0);
}

TEST_CASE("edges in degenerate and small cases") {
  const Cone pos = make_cone(builtin_example("control-posdef"));
  const auto edges = pos.edges();
  REQUIRE(edges.size() == 1);
  CHECK(edges[0].walls == 0);
  CHECK_FALSE(edges[0].isotropic);
  CHECK(pos.isotropic_locus().empty());

  // l1 >= 0, l2 >= 0 for the Gram matrix ((1,1),(1,0)): only the wall dual to
  // l1 has an isotropic orthogonal complement.
  const Cone al = make_cone(builtin_example("appell-lerch"));
  const auto al_edges = al.edges();
  REQUIRE(al_edges.size() == 2);
  CHECK(find_edge(al_edges, 0b01)->isotropic);
  CHECK_FALSE(find_edge(al_edges, 0b10)->isotropic);
  CHECK(find_edge(al_edges, 0b01)->span == SpanKind::NegativeSemidefinite);
  CHECK(find_edge(al_edges, 0b10)->span == SpanKind::NegativeDefinite);
  CHECK(al.isotropic_locus().size() == 1);
}

TEST_CASE("non-negativity") {
  CHECK(make_cone(builtin_example("running")).is_non_negative());
  CHECK(make_cone(builtin_example("appell-lerch")).is_non_negative());
  CHECK(make_cone(builtin_example("control-posdef")).is_non_negative());

  SUBCASE("cone containing (0,1,0)") {
    const Cone bad(QuadSpace(diag({1, -1, -1})),
                   WallSet{ConeKind::Tetrahedral, {vec({0, -1, 0}), vec({1, 0, 0}), vec({-1, -1, 1})}, {}});
    CHECK(bad.membership(vec({0, 1, 0})) != Membership::Outside);
    const NonNegativity nn = bad.non_negativity();
    CHECK_FALSE(nn.non_negative);
    REQUIRE(nn.witness);
    CHECK(bad.space().quad(*nn.witness) < 0);
    CHECK(bad.membership(*nn.witness) != Membership::Outside);
    CHECK_THROWS_AS(bad.isotropic_locus(), Error);
  }
  SUBCASE("positive definite spaces") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> d(-5, 5);
    const QuadSpace pd(mat({{2, 1, 0}, {1, 3, 1}, {0, 1, 4}}));
    for (int trial = 0; trial < 20; ++trial) {
      RatVector w = vec({d(rng), d(rng), d(rng)});
      if (is_zero(w)) continue;
      CHECK(Cone(pd, WallSet{ConeKind::Tetrahedral, {w}, {}}).is_non_negative());
    }
  }
  SUBCASE("lineality space with a negative direction") {
    // signature (2,1), d^- = 1: W^perp is the negative line through e3
    const QuadSpace s(diag({1, 1, -1}));
    const Cone c(s, WallSet{ConeKind::Cubical, {vec({1, 0, 0}), vec({1, 1, 0})}, {{0, 1}}});
    const NonNegativity nn = c.non_negativity();
    CHECK_FALSE(nn.non_negative);
    REQUIRE(nn.witness);
    CHECK(s.quad(*nn.witness) < 0);
    CHECK(c.membership(*nn.witness) != Membership::Outside);
  }
}

TEST_CASE("copositivity") {
  CHECK(copositivity(mat({{1, -1}, {-1, 1}})).copositive);
  CHECK(copositivity(mat({{0, 1}, {1, 0}})).copositive);
  const auto neg = copositivity(mat({{1, -2}, {-2, 1}}));
  CHECK_FALSE(neg.copositive);
  REQUIRE(neg.witness);
  const RatMatrix a = mat({{1, -2}, {-2, 1}});
  CHECK(dot(*neg.witness, a * *neg.witness) < 0);
  for (const auto& x : *neg.witness) CHECK(x >= 0);
  // Horn's matrix is copositive but neither PSD nor entrywise nonnegative.
  CHECK(copositivity(mat({{1, -1, 1, 1, -1},
                          {-1, 1, -1, 1, 1},
                          {1, -1, 1, -1, 1},
                          {1, 1, -1, 1, -1},
                          {-1, 1, 1, -1, 1}}))
            .copositive);
  CHECK_FALSE(copositivity(mat({{-1}})).copositive);
}

TEST_CASE("linear inequalities") {
  const auto x = solve_inequalities({{vec({1, 0}), 1}, {vec({0, 1}), 1}, {vec({-1, -1}), -5}}, 2);
  REQUIRE(x);
  CHECK((*x)[0] >= 1);
  CHECK((*x)[1] >= 1);
  CHECK((*x)[0] + (*x)[1] <= 5);
  CHECK_FALSE(solve_inequalities({{vec({1}), 1}, {vec({-1}), 0}}, 1));
}

TEST_CASE("validation reports") {
  const Example ex = builtin_example("running");
  const Cone c = make_cone(ex);
  const ValidationReport r = c.validate(Lattice(ex.gram));
  CHECK(r.ok());
  CHECK(r.failures.empty());
  REQUIRE(r.interior_point);
  CHECK(c.membership(*r.interior_point) == Membership::Interior);

  for (const auto& name : builtin_example_names()) {
    const Example e = builtin_example(name);
    CHECK_MESSAGE(make_cone(e).validate(Lattice(e.gram)).ok(), name);
  }

  SUBCASE("isotropic edge that is not rational") {
    // span{e1, e3+e4} carries x^2 - 2y^2, which is isotropic over R only
    const RatMatrix g = diag({1, 1, -1, -1});
    const Cone irr(QuadSpace(g),
                   WallSet{ConeKind::Tetrahedral, {vec({1, 0, 0, 0}), vec({0, 0, 1, 1}), vec({0, 1, 0, 0})}, {}});
    const auto irr_edges = irr.edges();
    const Edge* e = find_edge(irr_edges, 0b011);
    REQUIRE(e);
    CHECK(e->isotropic);
    CHECK_FALSE(e->rational);
    const ValidationReport vr = irr.validate(Lattice(g));
    CHECK_FALSE(vr.rational_edges);
    CHECK_FALSE(vr.ok());
  }
  SUBCASE("edge spanning a hyperbolic plane") {
    const RatMatrix g = diag({1, 1, -1, -1});
    const Cone hyp(QuadSpace(g),
                   WallSet{ConeKind::Tetrahedral, {vec({1, 0, 1, 0}), vec({1, 0, -1, 0}), vec({0, 0, 0, 1})}, {}});
    CHECK(span_kind(hyp.space(), {vec({1, 0, 1, 0}), vec({1, 0, -1, 0})}) == SpanKind::NotNegative);
    const ValidationReport vr = hyp.validate(Lattice(g));
    CHECK_FALSE(vr.semidefinite_spans);
    CHECK_FALSE(vr.ok());
  }
  SUBCASE("cone without interior") {
    const RatMatrix g = diag({1, -1});
    const Cone flat(QuadSpace(g), WallSet{ConeKind::Tetrahedral, {vec({0, 1}), vec({0, -1})}, {}});
    CHECK_FALSE(flat.interior_point());
    CHECK_FALSE(flat.validate(Lattice(g)).nondegenerate);
  }
}

TEST_CASE("face indicator of the running example") {
  const Cone c = make_cone(builtin_example("running"));
  const SignPolynomial p = face_indicator_tetrahedral(c);
  const std::map<WallMask, Rational> expected{
      {0b000, Rational(1, 4)}, {0b011, Rational(1, 4)}, {0b101, Rational(1, 4)}, {0b110, Rational(1, 4)}};
  CHECK(p.terms() == expected);
  CHECK(p.max_degree() <= c.d_minus());
  CHECK(p.evaluate({1, 1, 1}) == 1);
  CHECK(p.evaluate({-1, -1, -1}) == 1);
  CHECK(p.evaluate({1, -1, 1}) == 0);

  // exact support check on random rational points
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> num(-60, 60);
  std::uniform_int_distribution<int> den(1, 7);
  int interior = 0, outside = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const RatVector v{Rational(num(rng), den(rng)), Rational(num(rng), den(rng)), Rational(num(rng), den(rng))};
    const Rational val = p.evaluate(c.space(), v);
    switch (c.membership(v)) {
      case Membership::Interior:
        ++interior;
        CHECK(abs(val) == 1);
        break;
      case Membership::Outside:
        ++outside;
        CHECK(val == 0);
        break;
      case Membership::Boundary:
        CHECK(val >= 0);
        CHECK(val <= 1);
        break;
    }
  }
  CHECK(interior > 100);
  CHECK(outside > 100);
}

TEST_CASE("tetrahedral indicators in other sizes") {
  for (int n = 1; n <= 5; ++n) {
    // signature (1, n-1) with walls e_2..e_n and a generic extra wall
    RatMatrix g(static_cast<std::size_t>(n) + 1, static_cast<std::size_t>(n) + 1);
    g(0, 0) = 1;
    g(1, 1) = 1;
    for (int i = 2; i <= n; ++i) g(static_cast<std::size_t>(i), static_cast<std::size_t>(i)) = -1;
    if (n == 1) g(1, 1) = 3;
    const QuadSpace s(g);
    std::vector<RatVector> walls;
    for (int i = 0; i < n; ++i) {
      RatVector w(static_cast<std::size_t>(n) + 1);
      w[static_cast<std::size_t>(i)] = 1;
      w[static_cast<std::size_t>(n)] = i + 2;
      walls.push_back(w);
    }
    const Cone c(s, WallSet{ConeKind::Tetrahedral, walls, {}});
    const SignPolynomial p = face_indicator_tetrahedral(c);
    CHECK(p.max_degree() <= c.d_minus());
    // all 3^n sign patterns: value is 1 on (+..+), (-1)^{n+1} on (-..-), 0 on mixed
    std::vector<int> signs(static_cast<std::size_t>(n), -1);
    while (true) {
      const bool has_pos = std::count(signs.begin(), signs.end(), 1) > 0;
      const bool has_neg = std::count(signs.begin(), signs.end(), -1) > 0;
      const bool has_zero = std::count(signs.begin(), signs.end(), 0) > 0;
      const Rational val = p.evaluate(signs);
      if (has_pos && has_neg) {
        CHECK(val == 0);
      } else if (!has_zero) {
        CHECK(val == (has_pos ? 1 : (n % 2 == 1 ? 1 : -1)));
      }
      std::size_t i = 0;
      while (i < signs.size() && signs[i] == 1) signs[i++] = -1;
      if (i == signs.size()) break;
      ++signs[i];
    }
  }
}

TEST_CASE("cubical indicators") {
  const QuadSpace s(diag({1, -1, -1}));
  const Cone c(s, WallSet{ConeKind::Cubical, {vec({0, 0, 1}), vec({0, 1, 1}), vec({0, 1, 0}), vec({1, 2, 3})},
                          {{0, 1}, {2, 3}}});
  const std::map<WallMask, Rational> expected{
      {0b0101, Rational(1, 4)}, {0b1001, Rational(1, 4)}, {0b0110, Rational(1, 4)}, {0b1010, Rational(1, 4)}};
  CHECK(face_indicator_cubical(c).terms() == expected);
  CHECK(face_indicator_cubical(c).evaluate({1, 1, 1, 1}) == 1);
  CHECK(c.edges().size() == 4);

  const Cone one(QuadSpace(diag({1, -1})), WallSet{ConeKind::Cubical, {vec({1, 2}), vec({1, -2})}, {{0, 1}}});
  const std::map<WallMask, Rational> half{{0b01, Rational(1, 2)}, {0b10, Rational(1, 2)}};
  CHECK(face_indicator_cubical(one).terms() == half);
}

TEST_CASE("the Appell-Lerch cone is tetrahedral and cubical") {
  Example ex = builtin_example("appell-lerch");
  const Cone cub = make_cone(ex);
  ex.walls.kind = ConeKind::Tetrahedral;
  ex.walls.pairs.clear();
  const Cone tet = make_cone(ex);
  CHECK(face_indicator_cubical(cub).terms() == face_indicator_tetrahedral(tet).terms());
  CHECK(cub.face_indicator().evaluate(cub.space(), vec({1, 0})) == Rational(1, 2));
  CHECK(cub.face_indicator().evaluate(cub.space(), vec({2, 3})) == 1);
  CHECK(cub.face_indicator().evaluate(cub.space(), vec({-2, -3})) == -1);
  CHECK(cub.face_indicator().evaluate(cub.space(), vec({2, -3})) == 0);
}

TEST_CASE("membership") {
  const Cone c = make_cone(builtin_example("running"));
  CHECK(c.membership(vec({3, 1, 1})) == Membership::Boundary);
  CHECK(c.membership(vec({0, 0, 0})) == Membership::Boundary);
  CHECK(c.membership(vec({-4, -1, -1})) == c.membership(vec({4, 1, 1})));
  CHECK(c.membership(vec({7, 2, 2})) == Membership::Interior);
  CHECK(c.membership(vec({-7, -2, -2})) == Membership::Interior);
  CHECK(c.membership(vec({5, 1, 1})) == Membership::Outside);
  CHECK(c.membership(Eigen::Vector3d(7.0, 2.0, 2.0)) == Membership::Interior);
}

TEST_CASE("sign polynomial is invariant under relabelling walls") {
  const Example ex = builtin_example("running");
  const Cone c = make_cone(ex);
  WallSet permuted = ex.walls;
  std::swap(permuted.walls[0], permuted.walls[2]);
  const Cone d(QuadSpace(ex.gram), permuted);
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> num(-9, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const RatVector v = vec({num(rng), num(rng), num(rng)});
    CHECK(c.face_indicator().evaluate(c.space(), v) == d.face_indicator().evaluate(d.space(), v));
  }
}
