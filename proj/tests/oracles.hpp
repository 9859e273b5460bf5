#pragma once

// Reference computations for the tests. They work from the defining
// integrals in coordinates of span E and share no code path with the
// library's orthant decomposition.

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracles {

inline constexpr double pi = std::numbers::pi;

inline double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

template <class F>
double gk(F f, double a, double b, double tol = 1e-12, unsigned depth = 18) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, depth, tol);
}

/// int sgn(x) exp(-4 pi (x - t)^2 |c|) dx / int exp(...) for the line with
/// q(x) = c x^2 (c < 0) and wall w = -1, by plain quadrature on both sides of
/// the wall.
inline double sgn_hat_line(double t, double c) {
  const double a = 4 * pi * -c;
  auto g = [&](double x) { return std::exp(-a * (x - t) * (x - t)); };
  const double width = 12 / std::sqrt(a);
  const double lo = std::min(t - width, -1e-300);
  const double hi = std::max(t + width, 1e-300);
  const double pos = hi > 0 ? gk(g, 0.0, hi) : 0.0;
  const double neg = lo < 0 ? gk(g, lo, 0.0) : 0.0;
  return (pos - neg) / std::sqrt(pi / a);
}

/// E[prod_i sgn((M c)_i)] for c ~ exp(2 pi (c - c0)^T M (c - c0)), where M is
/// the negative definite Gram matrix of the frame (k <= 3) and c0 = M^{-1} m:
/// the defining integral in frame coordinates. With c = c0 + L u the pairings
/// are m + M L u; the last u-coordinate is integrated exactly (the sign is
/// piecewise constant), the others by quadrature split where the roots in
/// the last coordinate cross.
inline double sgn_hat_direct(const Eigen::MatrixXd& gram, const Eigen::VectorXd& m) {
  const auto k = gram.rows();
  if (k == 0) return 1;
  const Eigen::MatrixXd cov = (-4 * pi * gram).inverse();
  const Eigen::MatrixXd l = cov.llt().matrixL();
  const Eigen::MatrixXd ml = gram * l;
  const Eigen::Index last = k - 1;

  // root_i(u) = r0_i + rd_i . u over the first k - 1 coordinates.
  std::vector<double> r0(k);
  std::vector<Eigen::VectorXd> rd(k);
  std::vector<bool> has_root(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    has_root[i] = ml(i, last) != 0;
    rd[i] = Eigen::VectorXd::Zero(last);
    if (!has_root[i]) continue;
    r0[i] = -m(i) / ml(i, last);
    for (Eigen::Index j = 0; j < last; ++j) rd[i](j) = -ml(i, j) / ml(i, last);
  }

  auto innermost = [&](const Eigen::VectorXd& u) {
    std::vector<double> cuts{-INFINITY, INFINITY};
    for (Eigen::Index i = 0; i < k; ++i)
      if (has_root[i]) cuts.push_back(r0[i] + rd[i].head(last).dot(u.head(last)));
    std::sort(cuts.begin(), cuts.end());
    double total = 0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double a = cuts[s], b = cuts[s + 1];
      if (!(a < b)) continue;
      const double mid = std::isinf(a) ? (std::isinf(b) ? 0 : b - 1) : (std::isinf(b) ? a + 1 : 0.5 * (a + b));
      int sign = 1;
      for (Eigen::Index i = 0; i < k; ++i) {
        double p = m(i) + ml(i, last) * mid;
        for (Eigen::Index j = 0; j < last; ++j) p += ml(i, j) * u(j);
        sign *= (p > 0) - (p < 0);
      }
      const double mass = a >= 0 ? phi_cdf(-a) - phi_cdf(-b) : phi_cdf(b) - phi_cdf(a);
      total += sign * mass;
    }
    return total;
  };

  // Breakpoints in coordinate `level` where two roots coincide (level k-2),
  // or where all three coincide (level k-3 = 0 for k = 3).
  auto breakpoints = [&](const Eigen::VectorXd& u, Eigen::Index level) {
    std::vector<double> out;
    // Pairings that no longer depend on later coordinates jump in sign.
    for (Eigen::Index i = 0; i < k; ++i) {
      bool settled = ml(i, level) != 0;
      for (Eigen::Index j = level + 1; j < k && settled; ++j) settled = ml(i, j) == 0;
      if (!settled) continue;
      double c = m(i);
      for (Eigen::Index j = 0; j < level; ++j) c += ml(i, j) * u(j);
      out.push_back(-c / ml(i, level));
    }
    if (level == k - 2) {
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j) {
          if (!has_root[i] || !has_root[j]) continue;
          const Eigen::VectorXd dd = rd[i] - rd[j];
          double c = r0[i] - r0[j];
          for (Eigen::Index t = 0; t < level; ++t) c += dd(t) * u(t);
          if (dd(level) != 0) out.push_back(-c / dd(level));
        }
    } else if (level == 0 && k == 3 && has_root[0] && has_root[1] && has_root[2]) {
      Eigen::Matrix2d a;
      a.row(0) = (rd[0] - rd[1]).transpose();
      a.row(1) = (rd[0] - rd[2]).transpose();
      const Eigen::Vector2d b(-(r0[0] - r0[1]), -(r0[0] - r0[2]));
      if (std::abs(a.determinant()) > 1e-14) out.push_back(a.partialPivLu().solve(b)(0));
    }
    return out;
  };

  std::function<double(Eigen::VectorXd&, Eigen::Index)> rec = [&](Eigen::VectorXd& u, Eigen::Index level) -> double {
    if (level == last) return innermost(u);
    auto f = [&](double x) {
      u(level) = x;
      return std::exp(-0.5 * x * x) / std::sqrt(2 * pi) * rec(u, level + 1);
    };
    std::vector<double> cuts{-9.0, 9.0};
    for (double x : breakpoints(u, level))
      if (x > -9 && x < 9) cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    double total = 0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
      if (cuts[s] < cuts[s + 1]) total += gk(f, cuts[s], cuts[s + 1], level == 0 ? 1e-10 : 1e-12, 12);
    return total;
  };
  Eigen::VectorXd u = Eigen::VectorXd::Zero(k);
  return rec(u, 0);
}

/// Distance, in the metric sqrt(-q) on span E, from v to the sector where
/// every pairing has the opposite sign. Whitened coordinates: pairings are
/// m + a u with a a^T = -M / (4 pi) and |u|^2 = 8 pi (-q).
inline double opposite_sector_distance(const Eigen::MatrixXd& gram, const Eigen::VectorXd& m) {
  const auto k = gram.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-gram / (4 * pi));
  const Eigen::MatrixXd a = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0).cwiseSqrt().asDiagonal();
  // Constraints s_i (m_i + a_i u) <= 0, s_i = sgn m_i: g u <= h.
  Eigen::MatrixXd g(k, k);
  Eigen::VectorXd h(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double s = m(i) < 0 ? -1 : 1;
    g.row(i) = s * a.row(i);
    h(i) = -s * m(i);
  }
  double best = INFINITY;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < k; ++i)
      if (mask >> i & 1u) act.push_back(i);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(k);
    if (!act.empty()) {
      Eigen::MatrixXd ga(act.size(), k);
      Eigen::VectorXd ha(act.size());
      for (std::size_t j = 0; j < act.size(); ++j) {
        ga.row(j) = g.row(act[j]);
        ha(j) = h(act[j]);
      }
      const Eigen::VectorXd mu = -(ga * ga.transpose()).ldlt().solve(ha);
      if ((mu.array() < -1e-12).any()) continue;
      u = -ga.transpose() * mu;
    }
    if (((g * u - h).array() > 1e-9).any()) continue;
    best = std::min(best, u.norm());
  }
  return best / std::sqrt(8 * pi);
}

}  // namespace oracles
