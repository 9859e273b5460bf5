#include "frames.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include "indeftheta/error.hpp"
#include "indeftheta/examples.hpp"
#include "indeftheta/gerf.hpp"

#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <random>

using namespace indeftheta;
using namespace testing_helpers;

namespace {

Cone running_cone() {
  const auto ex = builtin_example("running");
  return Cone(QuadSpace(ex.gram), ex.walls);
}

}  // namespace

TEST_CASE("normal and bivariate normal probabilities") {
  QuadratureConfig cfg;
  CHECK(normal_cdf(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(-30) == doctest::Approx(4.906713927148187e-198).epsilon(1e-12));

  for (double rho : {-0.95, -0.5, 0.0, 0.3, 0.8, 0.99})
    CHECK(bivariate_normal_cdf(0, 0, rho, cfg) ==
          doctest::Approx(0.25 + std::asin(rho) / (2 * oracles::pi)).epsilon(1e-13));
  for (double h : {-2.0, -0.3, 1.5})
    for (double k : {-1.0, 0.7})
      CHECK(bivariate_normal_cdf(h, k, 0, cfg) ==
            doctest::Approx(oracles::phi_cdf(h) * oracles::phi_cdf(k)).epsilon(1e-12));

  // Deep lower-left tail against the conditional integral.
  for (double rho : {-0.5, 0.5, 0.9}) {
    for (auto [h, k] : {std::pair{-8.0, -8.0}, std::pair{-6.0, -9.0}, std::pair{-1.0, -12.0}}) {
      const double s = std::sqrt(1 - rho * rho);
      auto f = [&](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2 * oracles::pi) * oracles::phi_cdf((k - rho * t) / s); };
      const double ref = oracles::gk(f, h - 40, h, 1e-13);
      CAPTURE(rho);
      CAPTURE(h);
      CHECK(bivariate_normal_cdf(h, k, rho, cfg) == doctest::Approx(ref).epsilon(1e-9));
    }
  }
}

TEST_CASE("trivariate orthant probability") {
  QuadratureConfig cfg;
  const std::vector<std::array<double, 3>> corrs{{0.2, -0.4, 0.5}, {0.0, 0.0, 0.0}, {0.9, 0.85, 0.8}, {-0.45, -0.45, -0.1}};
  for (const auto& c : corrs) {
    Eigen::Matrix3d r;
    r << 1, c[0], c[1], c[0], 1, c[2], c[1], c[2], 1;
    const Eigen::MatrixXd a = r.llt().matrixL();
    const double expected = 0.125 + (std::asin(c[0]) + std::asin(c[1]) + std::asin(c[2])) / (4 * oracles::pi);
    CHECK(gaussian_polyhedron_probability(a, Eigen::Vector3d::Zero(), cfg) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("rank deficient and deterministic constraints") {
  QuadratureConfig cfg;
  Eigen::MatrixXd a(2, 1);
  a << 1, -2;
  Eigen::VectorXd b(2);
  b << 0.5, 0.4;  // -0.2 < z < 0.5
  CHECK(gaussian_polyhedron_probability(a, b, cfg) ==
        doctest::Approx(oracles::phi_cdf(0.5) - oracles::phi_cdf(-0.2)).epsilon(1e-14));
  Eigen::MatrixXd a2(2, 2);
  a2 << 1, 0, 0, 0;
  Eigen::VectorXd b2(2);
  b2 << 0.3, 1.0;
  CHECK(gaussian_polyhedron_probability(a2, b2, cfg) == doctest::Approx(oracles::phi_cdf(0.3)).epsilon(1e-14));
  b2(1) = 0.0;
  CHECK(gaussian_polyhedron_probability(a2, b2, cfg) == 0.0);
}

TEST_CASE("one dimensional smoothed sign is the error function") {
  const QuadSpace line(diag({-2}));
  const SignFrame frame(line, {vec({-1})});
  for (int i = -60; i <= 60; ++i) {
    const double t = i * 0.05;
    const double v = sgn_hat(frame, evec({t}));
    CAPTURE(t);
    CHECK(v == doctest::Approx(std::erf(2 * std::sqrt(oracles::pi) * t)).epsilon(1e-12).scale(1));
    CHECK(std::abs(v - oracles::sgn_hat_line(t, -1.0)) <= 1e-10);
  }
  // On the wall: vol is the half line, sgn_hat vanishes.
  CHECK(vol_hat(frame, evec({0.0})) == doctest::Approx(0.5));
  CHECK(sgn_hat(frame, evec({0.0})) == doctest::Approx(0.0).scale(1));
  CHECK(sgn_E(line, {vec({-1})}, evec({0.0})) == 0);
}

TEST_CASE("coefficient recursion") {
  for (int m = 0; m <= 10; ++m) {
    CHECK(a_coeff(0, m) == (m % 2 ? -1 : 1));
    Integer p = 1;
    for (int i = 0; i < m; ++i) p *= -2;
    CHECK(a_coeff(m, m) == p);
  }
}

TEST_CASE("decomposition agrees with the defining integral") {
  FrameSampler s(20240611);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 1 + trial % 3;
    const auto e = s.frame(k);
    const SignFrame frame(s.space, e);
    const Eigen::VectorXd v = s.point(1.0);
    const double direct = oracles::sgn_hat_direct(gram_double(frame), frame.pairings(v));
    CAPTURE(trial);
    CHECK(std::abs(sgn_hat(frame, v) - direct) <= 1e-8);
  }
}

TEST_CASE("symmetries of the smoothed sign") {
  FrameSampler s(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = 1 + trial % 3;
    auto e = s.frame(k);
    const SignFrame frame(s.space, e);
    const Eigen::VectorXd v = s.point(1.0);
    const double f = sgn_hat(frame, v);
    CHECK(sgn_hat(frame, -v) == doctest::Approx((k % 2 ? -1 : 1) * f).epsilon(1e-10).scale(1));
    std::reverse(e.begin(), e.end());
    CHECK(sgn_hat(SignFrame(s.space, e), v) == doctest::Approx(f).epsilon(1e-10).scale(1));
    const Eigen::VectorXd ve = project(s.space, v, e);
    CHECK(sgn_hat(frame, ve) == doctest::Approx(f).epsilon(1e-10).scale(1));
    CHECK(std::abs(f) <= 1 + 1e-12);
  }
}

TEST_CASE("frame validation") {
  FrameSampler s(1);
  std::vector<RatVector> five(5, vec({0, 0, 1, 0}));
  CHECK_THROWS_AS(SignFrame(s.space, five), Error);
  try {
    SignFrame(s.space, five);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::UnsupportedDimension);
  }
  try {
    SignFrame(s.space, {vec({1, 0, 0, 0})});
    FAIL("positive vector accepted");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::SpanNotNegativeSemidefinite);
  }
}

TEST_CASE("sector volume stays under the Gaussian tail envelope") {
  FrameSampler s(99);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  struct Sample {
    double d;
    double vol;
  };
  std::vector<std::vector<Sample>> frames;
  for (int f = 0; f < 50; ++f) {
    const auto e = s.frame(2);
    const SignFrame frame(s.space, e);
    const Eigen::MatrixXd g = gram_double(frame);
    std::vector<Sample> samples;
    for (int j = 0; j < 40; ++j) {
      const Eigen::VectorXd v = s.point(3.0);
      const Eigen::VectorXd m = frame.pairings(v);
      const double d = oracles::opposite_sector_distance(g, m);
      if (d < 0.5 || d > 2.5) continue;
      samples.push_back({d, vol_hat(frame, v)});
      // Lemma: outside a ball of radius D the Gaussian mass is the
      // incomplete gamma tail.
      CHECK(samples.back().vol <= boost::math::gamma_q(1.0, 4 * oracles::pi * d * d) * (1 + 1e-9));
    }
    frames.push_back(samples);
  }
  double c = 0;
  for (int f = 0; f < 25; ++f)
    for (const auto& x : frames[f]) c = std::max(c, x.vol / std::exp(-4 * oracles::pi * x.d * x.d));
  REQUIRE(c > 0);
  int violations = 0;
  for (int f = 25; f < 50; ++f)
    for (const auto& x : frames[f])
      if (x.vol > 1.05 * c * std::exp(-4 * oracles::pi * x.d * x.d)) ++violations;
  CHECK(violations == 0);
}

TEST_CASE("semidefinite edge of the running example") {
  const Cone cone = running_cone();
  const auto& w = cone.walls();
  const SignFrame frame(cone.space(), {w[0], w[1]});
  CHECK_FALSE(frame.definite());
  CHECK(frame.factor().cols() == 1);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  const double s = 1 / std::sqrt(4 * oracles::pi);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd v = evec({u(rng), u(rng), u(rng)});
    const Eigen::VectorXd m = frame.pairings(v);
    // X1 = m1 + s z, X2 = m2 - 2 s z.
    const double z1 = -m(0) / s;
    const double z2 = m(1) / (2 * s);
    // Same signs exactly when z lies between the two roots.
    const double inside = std::abs(oracles::phi_cdf(z2) - oracles::phi_cdf(z1));
    CHECK(sgn_hat(frame, v) == doctest::Approx(2 * inside - 1).epsilon(1e-12).scale(1));

    // Limit of definite frames w2 + t e2.
    const RatVector w2t = w[1] + scale(Rational(1, 100000), vec({0, 1, 0}));
    REQUIRE(span_kind(cone.space(), {w[0], w2t}) == SpanKind::NegativeDefinite);
    CHECK(std::abs(sgn_hat(SignFrame(cone.space(), {w[0], w2t}), v) - sgn_hat(frame, v)) < 1e-3);

    QuadratureConfig quotient;
    quotient.semidefinite = SemidefiniteRule::Quotient;
    CHECK(sgn_hat(frame, v, quotient) == doctest::Approx(-1.0).epsilon(1e-12));
  }
}

TEST_CASE("isotropic wall carries a deterministic sign") {
  const auto ex = builtin_example("appell-lerch");
  const QuadSpace space(ex.gram);
  const SignFrame frame(space, {ex.walls.walls[0]});
  CHECK(frame.isotropic_walls() == 1u);
  for (double x : {-1.5, -0.2, 0.3, 2.0}) {
    const Eigen::VectorXd v = evec({x, 0.7});
    const double p = frame.pairings(v)(0);
    CHECK(sgn_hat(frame, v) == (p > 0 ? 1.0 : -1.0));
  }
  CHECK(sgn_hat(frame, evec({0.0, 0.7})) == 0.0);
}

TEST_CASE("regrouped cone evaluation matches the sum of terms") {
  const Cone cone = running_cone();
  const SmoothedSign f(cone.space(), cone.face_indicator());
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd v = evec({u(rng), u(rng), u(rng)});
    double sum = 0;
    for (const auto& [e, a] : f.polynomial().terms()) sum += to_double(a) * f.term(e, v);
    const auto val = f.evaluate(v);
    CHECK(val.value() == doctest::Approx(sum).epsilon(1e-12).scale(1));
    CHECK(val.base == doctest::Approx(f.sgn(v)).scale(1));
    CHECK(std::log(std::abs(val.tail)) <= f.log_tail_bound(f.wall_functionals() * v) + 1e-9);
  }
}

TEST_CASE("Vigneras operator annihilates smoothed signs") {
  const QuadSpace line(diag({-2}));
  const SignFrame frame(line, {vec({-1})});
  auto erf_fn = [&](const Eigen::VectorXd& x) { return sgn_hat(frame, x); };
  for (double t : {-1.2, -0.3, 0.1, 0.8}) CHECK(std::abs(vigneras_residual(erf_fn, line, evec({t}), 1e-3)) < 1e-6);

  const Cone cone = running_cone();
  const SmoothedSign f(cone.space(), cone.face_indicator());
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  double worst = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::VectorXd v = evec({u(rng), u(rng), u(rng)});
    worst = std::max(worst, std::abs(vigneras_residual(f, v)));
  }
  CHECK(worst < 1e-4);

  // With 2 pi in place of 4 pi the residual does not vanish.
  const Eigen::VectorXd v = evec({0.2});
  const double h = 1e-4;
  const double d1 = (erf_fn(v + evec({h})) - erf_fn(v - evec({h}))) / (2 * h);
  const double lap = vigneras_residual(erf_fn, line, v, 1e-3) - 4 * oracles::pi * 0.2 * d1;
  CHECK(std::abs(2 * oracles::pi * 0.2 * d1 + lap) > 0.1);
}

TEST_CASE("stencil refuses to cross an isotropic wall") {
  const auto ex = builtin_example("appell-lerch");
  const Cone cone(QuadSpace(ex.gram), ex.walls);
  const SmoothedSign f(cone.space(), cone.face_indicator());
  CHECK(f.discontinuous_walls() == 1u);
  try {
    (void)vigneras_residual(f, evec({0.0, 0.5}));
    FAIL("no TooCloseToWall");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TooCloseToWall);
  }
  CHECK(std::abs(vigneras_residual(f, evec({0.4, 0.5}))) < 1e-4);
}

TEST_CASE("degeneration towards an isotropic vector") {
  const QuadSpace space(diag({1, -1, -1}));
  std::vector<Rational> grid;
  for (int j = 1; j <= 8; ++j) grid.push_back(Rational(1, 1 << j));
  const auto rep = degeneration_check(space, {}, vec({1, 1, 0}), vec({0, 0, 1}), grid, evec({0.3, -0.1, 0.2}));
  CHECK(rep.decay_expected);
  CHECK(rep.bounded);
  CHECK(rep.rows.size() == grid.size());
  CHECK(rep.rows.back().vol < 1e-10);

  const auto flat = degeneration_check(space, {}, vec({1, 1, 0}), vec({0, 0, 1}), grid, evec({0.5, 0.5, 0.2}));
  CHECK_FALSE(flat.decay_expected);

  try {
    (void)degeneration_check(space, {}, vec({1, 0, 0}), vec({0, 0, 1}), grid, evec({0.3, -0.1, 0.2}));
    FAIL("positive family accepted");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::FamilyNotNegative);
  }
}
