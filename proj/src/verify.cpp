#include "indeftheta/verify.hpp"

#include "indeftheta/error.hpp"
#include "indeftheta/examples.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

namespace indeftheta {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

cd e(cd x) { return std::exp(cd(0, 2 * kPi) * x); }

std::vector<double> component_errors(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  std::vector<double> out(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = std::abs(a(i) - b(i));
  return out;
}

double tolerance_for(const CheckOptions& opts, double tails) { return std::max(opts.floor, opts.tail_factor * tails); }

std::string tail_details(const ThetaValue& lhs, const ThetaValue& rhs, double rhs_scale) {
  std::ostringstream os;
  os.precision(3);
  os << "lhs tail " << lhs.tail_estimate << " (radius " << lhs.radius << ", " << lhs.terms_used
     << " terms), rhs tail " << rhs.tail_estimate * rhs_scale << " (radius " << rhs.radius << ", "
     << rhs.terms_used << " terms)";
  return os.str();
}

cd bilinear(const Eigen::MatrixXd& g, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a.transpose() * g.cast<cd>() * b)(0);
}

}  // namespace

CheckReport make_report(std::string name, std::vector<double> errors, double tolerance, std::string details) {
  CheckReport r;
  r.name = std::move(name);
  r.errors = std::move(errors);
  r.max_abs_error = r.errors.empty() ? 0.0 : *std::max_element(r.errors.begin(), r.errors.end());
  r.tolerance = tolerance;
  r.passed = std::isfinite(r.max_abs_error) && r.max_abs_error <= tolerance;
  r.details = std::move(details);
  return r;
}

CheckReport check_T(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                    const TruncationPolicy& policy, const QuadratureConfig& cfg, const CheckOptions& opts,
                    int n) {
  const WeilRep rep = build_weil(lattice);
  const auto base = theta_hat(lattice, p, pt, policy, cfg);
  const auto moved = theta_hat(lattice, p, JacobiPoint(pt.tau + static_cast<double>(n), pt.z), policy, cfg);
  Eigen::VectorXcd rhs = base.components;
  for (int i = 0; i < std::abs(n); ++i) rhs = apply(rep, n > 0 ? Generator::T : Generator::TInv, rhs);
  const std::string name = n == 1 ? "T" : "T^" + std::to_string(n);
  return make_report(name, component_errors(moved.components, rhs),
                     tolerance_for(opts, moved.tail_estimate + base.tail_estimate), tail_details(moved, base, 1));
}

CheckReport check_S(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                    const TruncationPolicy& policy, const QuadratureConfig& cfg, const CheckOptions& opts) {
  const WeilRep rep = build_weil(lattice);
  const Eigen::MatrixXd& g = lattice.space().gram_double();
  const auto base = theta_hat(lattice, p, pt, policy, cfg);
  const auto moved = theta_hat(lattice, p, JacobiPoint(-1.0 / pt.tau, pt.z / pt.tau), policy, cfg);
  const cd root = std::sqrt(pt.tau);
  const cd factor = std::pow(root, static_cast<int>(lattice.dim())) * e(0.5 * bilinear(g, pt.z, pt.z) / pt.tau);
  const Eigen::VectorXcd rhs = factor * apply(rep, Generator::S, base.components);
  auto report = make_report("S", component_errors(moved.components, rhs),
                            tolerance_for(opts, moved.tail_estimate + std::abs(factor) * base.tail_estimate),
                            tail_details(moved, base, std::abs(factor)));
  // The Gauss sum equals e(-sig/8) only for even lattices.
  const auto sig = lattice.space().signature();
  const cd milgram = e(-(static_cast<double>(sig.plus) - static_cast<double>(sig.minus)) / 8.0);
  const auto alt = component_errors(moved.components, rhs * (milgram / rep.sigma));
  std::ostringstream os;
  os.precision(3);
  os << "; Gauss sum " << rep.sigma.real() << (rep.sigma.imag() < 0 ? "" : "+") << rep.sigma.imag()
     << "i, with e(-sig/8) in its place the error is " << *std::max_element(alt.begin(), alt.end());
  report.details += os.str();
  return report;
}

CheckReport check_elliptic(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                           const Eigen::VectorXi& lambda, const Eigen::VectorXi& mu,
                           const TruncationPolicy& policy, const QuadratureConfig& cfg,
                           const CheckOptions& opts) {
  const auto n = static_cast<Eigen::Index>(lattice.dim());
  if (lambda.size() != n || mu.size() != n) throw Error(ErrorCode::DimensionMismatch, "shift has the wrong dimension");
  const Eigen::MatrixXd& g = lattice.space().gram_double();
  const Eigen::VectorXcd l = lambda.cast<double>().cast<cd>();
  const Eigen::VectorXcd shift = l * pt.tau + mu.cast<double>().cast<cd>();
  const auto base = theta_hat(lattice, p, pt, policy, cfg);
  const auto moved = theta_hat(lattice, p, JacobiPoint(pt.tau, pt.z + shift), policy, cfg);
  const cd factor = e(-0.5 * bilinear(g, l, l) * pt.tau - bilinear(g, pt.z, l));
  const Eigen::VectorXcd rhs = factor * base.components;
  return make_report("elliptic", component_errors(moved.components, rhs),
                     tolerance_for(opts, moved.tail_estimate + std::abs(factor) * base.tail_estimate),
                     tail_details(moved, base, std::abs(factor)));
}

CheckReport check_vigneras_theta(const Lattice& lattice, const SignPolynomial& p,
                                 const std::vector<JacobiPoint>& points, double tolerance, double h,
                                 std::size_t terms, const QuadratureConfig& cfg) {
  const QuadSpace& space = lattice.space();
  const SmoothedSign f(space, p, cfg);
  const auto disc = discriminant_group(lattice);
  const auto n = static_cast<Eigen::Index>(lattice.dim());
  const Eigen::MatrixXd& g = space.gram_double();
  constexpr int kBox = 4;
  std::vector<double> errors;
  std::size_t skipped = 0;
  for (const auto& pt : points) {
    const double y = pt.y();
    const Eigen::VectorXd shift = pt.v() / y;
    struct Candidate {
      double log_size;
      Eigen::VectorXd x;
    };
    std::vector<Candidate> found;
    for (const auto& rep : disc.reps) {
      const Eigen::VectorXd mu = to_eigen(rep);
      std::vector<int> k(static_cast<std::size_t>(n), -kBox);
      for (;;) {
        Eigen::VectorXd l = mu;
        for (Eigen::Index i = 0; i < n; ++i) l(i) += k[static_cast<std::size_t>(i)] - std::round(shift(i));
        const Eigen::VectorXd x = std::sqrt(y) * (l + shift);
        const double weight = std::abs(f(x));
        if (weight > 0) {
          const double growth = -2 * kPi * (0.5 * y * l.dot(g * l) + pt.v().dot(g * l));
          found.push_back({growth + std::log(weight), x});
        }
        Eigen::Index pos = 0;
        while (pos < n && ++k[static_cast<std::size_t>(pos)] > kBox) k[static_cast<std::size_t>(pos++)] = -kBox;
        if (pos == n) break;
      }
    }
    std::sort(found.begin(), found.end(),
              [](const Candidate& a, const Candidate& b) { return a.log_size > b.log_size; });
    std::size_t used = 0;
    for (const auto& c : found) {
      if (used == terms) break;
      try {
        errors.push_back(std::abs(vigneras_residual(f, c.x, h)));
        ++used;
      } catch (const Error& err) {
        if (err.code() != ErrorCode::TooCloseToWall) throw;
        ++skipped;
      }
    }
  }
  std::ostringstream os;
  os << errors.size() << " dominant arguments, " << skipped << " skipped next to deterministic walls, h = " << h;
  return make_report("vigneras", std::move(errors), tolerance, os.str());
}

namespace {

// E[sgn <x, w_i> sgn <x, w_j>] for x in span(w_i, w_j) with coordinates
// c ~ N(M^{-1} m, (-M)^{-1} / (4 pi)), M the Gram matrix of the pair and m the
// pairings of v. The density is 2 sqrt(det Q) exp(-2 pi (c - c0)^T Q (c - c0))
// with Q = -M, integrated by nested adaptive quadrature.
double edge_expectation(const Eigen::Matrix2d& m_gram, const Eigen::Vector2d& pairings) {
  const Eigen::Matrix2d q = -m_gram;
  const Eigen::Vector2d centre = m_gram.inverse() * pairings;
  const double norm = 2 * std::sqrt(q.determinant());
  const double sd_a = std::sqrt(q.inverse()(0, 0) / (4 * kPi));
  const double sd_b = 1 / std::sqrt(4 * kPi * q(1, 1));
  constexpr double kWidth = 10;
  auto sgn = [](double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

  auto inner = [&](double a) {
    const double b0 = centre(1) - q(0, 1) / q(1, 1) * (a - centre(0));
    const double lo = b0 - kWidth * sd_b;
    const double hi = b0 + kWidth * sd_b;
    std::vector<double> cuts{lo, hi};
    for (int r = 0; r < 2; ++r) {
      if (m_gram(r, 1) == 0) continue;
      const double b = -m_gram(r, 0) * a / m_gram(r, 1);
      if (b > lo && b < hi) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    auto density = [&](double b) {
      const Eigen::Vector2d c(a, b);
      const Eigen::Vector2d d = c - centre;
      const Eigen::Vector2d s = m_gram * c;
      return sgn(s(0)) * sgn(s(1)) * std::exp(-2 * kPi * d.dot(q * d));
    };
    double sum = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (cuts[i + 1] > cuts[i]) sum += GK::integrate(density, cuts[i], cuts[i + 1], 12, 1e-10);
    return sum;
  };
  const double lo = centre(0) - kWidth * sd_a;
  const double hi = centre(0) + kWidth * sd_a;
  std::vector<double> cuts{lo, hi};
  if (lo < 0 && hi > 0) cuts.push_back(0);
  std::sort(cuts.begin(), cuts.end());
  double sum = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += GK::integrate(inner, cuts[i], cuts[i + 1], 12, 1e-10);
  return norm * sum;
}

}  // namespace

std::pair<double, double> running_example_oracle(const Eigen::VectorXd& v, const QuadratureConfig& cfg) {
  if (v.size() != 3) throw Error(ErrorCode::DimensionMismatch, "the running example lives in dimension 3");
  const Eigen::Vector3d gdiag(1, -1, -1);
  const Eigen::Vector3d w[3] = {{0, 0, -1}, {1, 1, 2}, {-1, -2, -2}};
  auto pair = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a.dot(gdiag.asDiagonal() * b); };
  auto edge = [&](int i, int j) {
    Eigen::Matrix2d m;
    m << pair(w[i], w[i]), pair(w[i], w[j]), pair(w[j], w[i]), pair(w[j], w[j]);
    const Eigen::Vector2d pv(pair(v, w[i]), pair(v, w[j]));
    return 0.25 * edge_expectation(m, pv);
  };
  const double oracle = 0.25 + 0.25 + edge(0, 2) + edge(1, 2);

  const auto ex = builtin_example("running");
  const QuadSpace space(ex.gram);
  const double pipeline = sgn_hat_cone(Cone(space, ex.walls).face_indicator(), space, v, cfg);
  return {oracle, pipeline};
}

CheckReport check_running_example(std::size_t samples, double radius, double tolerance, unsigned seed,
                                  const QuadratureConfig& cfg) {
  const auto ex = builtin_example("running");
  const QuadSpace space(ex.gram);
  const SmoothedSign f(space, Cone(space, ex.walls).face_indicator(), cfg);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-radius, radius);
  std::vector<double> errors;
  double semidefinite_gap = 0;
  double residual = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Eigen::VectorXd v = Eigen::Vector3d(u(rng), u(rng), u(rng));
    const auto [oracle, pipeline] = running_example_oracle(v, cfg);
    errors.push_back(std::abs(oracle - pipeline));
    // Walls {w1, w2}: the one term the expression takes to be the constant 1/4.
    const double edge = f.term(0b011, v);
    semidefinite_gap = std::max(semidefinite_gap, std::abs(edge - 1));
    residual = std::max(residual, std::abs(oracle - pipeline - 0.25 * (1 - edge)));
  }
  std::ostringstream os;
  os.precision(3);
  os << "max |sgn_hat_{w1,w2} - 1| = " << semidefinite_gap
     << "; after replacing the constant 1/4 by the library's {w1,w2} term the gap is " << residual;
  return make_report("example", std::move(errors), tolerance, os.str());
}

}  // namespace indeftheta
