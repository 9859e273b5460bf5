#include "doctest.h"

#include "indeftheta/error.hpp"
#include "indeftheta/examples.hpp"
#include "indeftheta/verify.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace indeftheta;

namespace {

using cd = std::complex<double>;
constexpr double pi = std::numbers::pi;

struct Fixture {
  Example ex;
  Lattice lattice;
  SignPolynomial p;
  explicit Fixture(const char* name)
      : ex(builtin_example(name)), lattice(ex.gram), p(Cone(QuadSpace(ex.gram), ex.walls).face_indicator()) {}
};

Eigen::VectorXcd cvec(std::initializer_list<cd> v) {
  Eigen::VectorXcd z(v.size());
  Eigen::Index i = 0;
  for (cd x : v) z(i++) = x;
  return z;
}

}  // namespace

TEST_CASE("transformation laws on the positive definite control") {
  Fixture f("control-posdef");
  CheckOptions strict;
  strict.floor = 1e-10;
  for (const JacobiPoint& pt : {JacobiPoint(cd(0, 1), cvec({0})), JacobiPoint(cd(0.3, 0.8), cvec({cd(0.2, -0.1)}))}) {
    const auto t = check_T(f.lattice, f.p, pt, {}, {}, strict);
    const auto s = check_S(f.lattice, f.p, pt, {}, {}, strict);
    const auto el = check_elliptic(f.lattice, f.p, pt, Eigen::VectorXi::Constant(1, 1),
                                   Eigen::VectorXi::Constant(1, -2), {}, {}, strict);
    CHECK(t.passed);
    CHECK(s.passed);
    CHECK(el.passed);
    CHECK(s.max_abs_error < 1e-12);
  }
}

TEST_CASE("S at tau = i and z = 0 for the control") {
  // theta_0(i) and theta_{1/2}(i) are fixed by the unitary rho_S up to sqrt(i).
  Fixture f("control-posdef");
  const JacobiPoint pt(cd(0, 1), cvec({0}));
  const auto th = theta_hat(f.lattice, f.p, pt);
  const double a = th.components(0).real();
  const double b = th.components(1).real();
  CHECK(std::abs(a - (a + b) / std::sqrt(2.0)) < 1e-14);
}

TEST_CASE("report tolerance follows the tails") {
  const auto r = make_report("x", {1e-7, 3e-7}, 2e-7);
  CHECK(r.max_abs_error == 3e-7);
  CHECK_FALSE(r.passed);
  CHECK(make_report("y", {}, 0).passed);
  CHECK_FALSE(make_report("z", {std::nan("")}, 1).passed);

  Fixture f("control-posdef");
  TruncationPolicy loose;
  loose.term_tol = 0.5;
  loose.initial_radius = 1;
  loose.doubling = false;
  const auto s = check_S(f.lattice, f.p, JacobiPoint(cd(0.1, 0.6), cvec({cd(0.1, 0.05)})), loose);
  CHECK(s.tolerance > 1e-6);
}

TEST_CASE("running example: T^2 and elliptic shifts") {
  Fixture f("running");
  const JacobiPoint pt(cd(0, 1), cvec({cd(0.05, 0.35), cd(-0.2, 0.1), cd(0.13, 0.2)}));
  CHECK(singular_set_distance(f.lattice, f.p, pt) >= 0.2);
  const auto t2 = check_T(f.lattice, f.p, pt, {}, {}, {}, 2);
  CHECK(t2.passed);
  Eigen::VectorXi lambda(3), mu(3);
  lambda << 1, 0, 0;
  mu << 0, 1, -1;
  const auto el = check_elliptic(f.lattice, f.p, pt, lambda, mu);
  CHECK(el.passed);
}

TEST_CASE("running example: inversion with the signature phase") {
  // L_ex is odd and unimodular: the Gauss sum is 1 while inversion carries
  // e(-sig/8) = e(1/8).
  Fixture f("running");
  const JacobiPoint pt(cd(0, 1), cvec({cd(0.31, 0.27), cd(-0.12, -0.05), cd(0.4, 0.11)}));
  const JacobiPoint inv(-1.0 / pt.tau, pt.z / pt.tau);
  CHECK(singular_set_distance(f.lattice, f.p, pt) >= 0.2);
  CHECK(singular_set_distance(f.lattice, f.p, inv) >= 0.2);
  const auto lhs = theta_hat(f.lattice, f.p, inv);
  const auto rhs = theta_hat(f.lattice, f.p, pt);
  const cd qz = 0.5 * (pt.z(0) * pt.z(0) - pt.z(1) * pt.z(1) - pt.z(2) * pt.z(2));
  const cd factor = std::exp(cd(0, 2 * pi) * (0.125 + qz / pt.tau)) * std::pow(std::sqrt(pt.tau), 3);
  CHECK(std::abs(lhs.components(0) - factor * rhs.components(0)) < 1e-8);
  CHECK(std::abs(lhs.components(0)) > 1e-3);

  const auto s = check_S(f.lattice, f.p, pt);
  CHECK(s.details.find("e(-sig/8)") != std::string::npos);
}

TEST_CASE("Vigneras residual at dominant arguments") {
  Fixture f("running");
  const std::vector<JacobiPoint> pts{JacobiPoint(cd(0, 1), cvec({cd(0.05, 0.3), cd(-0.2, 0.1), cd(0.13, 0.2)}))};
  const auto r = check_vigneras_theta(f.lattice, f.p, pts, 1e-4, 1e-3, 6);
  CHECK(r.errors.size() == 6);
  CHECK(r.passed);

  Fixture c("control-posdef");
  const auto rc = check_vigneras_theta(c.lattice, c.p, {JacobiPoint(cd(0, 1), cvec({cd(0, 0.2)}))}, 1e-12);
  CHECK(rc.passed);
}

TEST_CASE("running example oracle: definite edges") {
  Fixture f("running");
  const QuadSpace space(f.ex.gram);
  const SmoothedSign s(space, f.p);
  for (const auto& v : {Eigen::Vector3d(0.3, 0.2, -0.5), Eigen::Vector3d(2.1, -0.4, 1.3), Eigen::Vector3d(-1, 0.7, 0.2)}) {
    const auto [oracle, pipeline] = running_example_oracle(v);
    CHECK(std::abs(oracle - pipeline - 0.25 * (1 - s.term(0b011, v))) < 1e-9);
  }
  // Deep in the cone both tend to 1. (4,1,1) pairs to 0 with w3, so along
  // that ray the unsmoothed value is 1/2.
  const auto [o, pl] = running_example_oracle(3 * Eigen::Vector3d(7, 3, 1));
  CHECK(std::abs(o - 1) < 1e-4);
  CHECK(std::abs(pl - 1) < 1e-4);
  const auto [ow, pw] = running_example_oracle(3 * Eigen::Vector3d(4, 1, 1));
  CHECK(std::abs(ow - 0.5) < 1e-4);
  CHECK(std::abs(pw - 0.5) < 1e-4);
  // At the origin the definite edges give (2/pi) asin of the pairing
  // correlation.
  const auto [o0, p0] = running_example_oracle(Eigen::Vector3d::Zero());
  auto corr = [](double a, double b, double c) { return c / std::sqrt(a * b); };
  const double e13 = 2 / pi * std::asin(corr(1, 7, 2));
  const double e23 = 2 / pi * std::asin(corr(4, 7, -5));
  CHECK(o0 == doctest::Approx(0.5 + 0.25 * (e13 + e23)).epsilon(1e-9));
  CHECK(p0 == doctest::Approx(0.25 * (e13 + e23)).epsilon(1e-9));
}

TEST_CASE("elliptic shift of the wrong dimension") {
  Fixture f("running");
  const JacobiPoint pt(cd(0, 1), cvec({cd(0.05, 0.3), cd(-0.2, 0.1), cd(0.13, 0.2)}));
  CHECK_THROWS_AS(check_elliptic(f.lattice, f.p, pt, Eigen::VectorXi::Zero(2), Eigen::VectorXi::Zero(3)), Error);
}
