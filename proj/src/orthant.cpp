#include "indeftheta/orthant.hpp"

#include "indeftheta/gerf.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/owens_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace indeftheta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelTol = 1e-12;
// Relative mass of a standard Gaussian beyond this distance from the
// dominant point is below e^{-45}.
constexpr double kWindow = 9.5;

// P[lo < Z < hi] without cancellation in either tail.
double normal_mass(double lo, double hi) {
  if (lo >= hi) return 0;
  if (lo >= 0) return normal_cdf(-lo) - normal_cdf(-hi);
  if (hi <= 0) return normal_cdf(hi) - normal_cdf(lo);
  return 1 - normal_cdf(lo) - normal_cdf(-hi);
}

double row_scale(const Eigen::MatrixXd& a) {
  double s = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) s = std::max(s, a.row(i).norm());
  return s;
}

template <int MaxK, int MaxN>
std::optional<Eigen::VectorXd> dominant_point_impl(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, MaxK, MaxK>;
  using VecK = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, MaxK, 1>;
  using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, MaxN, 1>;
  const auto k = a.rows();
  const auto n = a.cols();
  const double slack = 1e-9 * (1 + b.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd full = a * a.transpose();
  VecN best = VecN::Zero(n);
  double best_norm = kInf;
  std::vector<Eigen::Index> act(static_cast<std::size_t>(k));
  for (std::uint32_t s = 0; s < (1u << k); ++s) {
    Eigen::Index m = 0;
    for (Eigen::Index i = 0; i < k; ++i)
      if (s >> i & 1u) act[m++] = i;
    VecN u = VecN::Zero(n);
    if (m > 0) {
      Mat gram(m, m);
      VecK bs(m);
      for (Eigen::Index r = 0; r < m; ++r) {
        bs(r) = b(act[r]);
        for (Eigen::Index c = 0; c < m; ++c) gram(r, c) = full(act[r], act[c]);
      }
      Eigen::FullPivLU<Mat> lu(gram);
      if (!lu.isInvertible()) continue;
      const VecK mu = -lu.solve(bs);
      if ((mu.array() < -1e-12).any()) continue;
      for (Eigen::Index r = 0; r < m; ++r) u.noalias() -= mu(r) * a.row(act[r]).transpose();
    }
    bool feasible = true;
    for (Eigen::Index i = 0; i < k && feasible; ++i)
      if (a.row(i).dot(u) - b(i) > slack) feasible = false;
    if (!feasible) continue;
    const double norm = u.norm();
    if (norm < best_norm) {
      best_norm = norm;
      best = u;
    }
  }
  if (best_norm == kInf) return std::nullopt;
  return Eigen::VectorXd(best);
}

// Minimiser of |u|^2 over {a u <= b}, by enumerating active sets; nullopt
// when the polyhedron is empty.
std::optional<Eigen::VectorXd> dominant_point(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (a.rows() <= 8 && a.cols() <= 16) return dominant_point_impl<8, 16>(a, b);
  return dominant_point_impl<Eigen::Dynamic, Eigen::Dynamic>(a, b);
}

double polyhedron(Eigen::MatrixXd a, Eigen::VectorXd b, const QuadratureConfig& cfg, bool closed_forms);

// Condition on the first coordinate after a rotation that makes the
// constraint matrix lower trapezoidal.
double integrate_first(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const QuadratureConfig& cfg) {
  const auto k = a.rows();
  const auto r = a.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a.transpose());
  Eigen::MatrixXd l = qr.matrixQR().triangularView<Eigen::Upper>().toDenseMatrix().transpose();
  l.conservativeResize(k, r);
  // Zero the strict upper part left by the compact storage.
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < r; ++j) l(i, j) = 0;

  const double scale = row_scale(l);
  double lo = -kInf;
  double hi = kInf;
  std::vector<Eigen::Index> inner;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double rest = r > 1 ? l.row(i).tail(r - 1).norm() : 0.0;
    if (rest > 1e-13 * scale) {
      inner.push_back(i);
      continue;
    }
    const double c = l(i, 0);
    if (c > 0)
      hi = std::min(hi, b(i) / c);
    else if (c < 0)
      lo = std::max(lo, b(i) / c);
    else if (!(0 < b(i)))
      return 0;
  }
  if (lo >= hi) return 0;

  Eigen::MatrixXd li(inner.size(), r - 1);
  Eigen::VectorXd bi(inner.size());
  Eigen::VectorXd ci(inner.size());
  for (std::size_t j = 0; j < inner.size(); ++j) {
    li.row(j) = l.row(inner[j]).tail(r - 1);
    bi(j) = b(inner[j]);
    ci(j) = l(inner[j], 0);
  }
  if (inner.empty()) return normal_mass(lo, hi);

  const auto dominant = dominant_point(l, b);
  if (!dominant) return 0;
  const double centre = (*dominant)(0);
  lo = std::max(lo, centre - kWindow);
  hi = std::min(hi, centre + kWindow);
  if (lo >= hi) return 0;

  auto f = [&](double u) {
    const double density = std::exp(-0.5 * u * u) / std::sqrt(2 * M_PI);
    if (density == 0) return 0.0;
    return density * polyhedron(li, bi - ci * u, cfg, true);
  };
  double err = 0;
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, lo, hi, cfg.max_depth, kRelTol,
                                                                        &err);
}

double owen_bivariate(double h, double k, double rho) {
  const double s = std::sqrt(1 - rho * rho);
  const double ah = (k - rho * h) / (h * s);
  const double ak = (h - rho * k) / (k * s);
  const double beta = (h * k > 0) ? 0.0 : 0.5;
  return 0.5 * (normal_cdf(h) + normal_cdf(k)) - boost::math::owens_t(h, ah) - boost::math::owens_t(k, ak) - beta;
}

double polyhedron(Eigen::MatrixXd a, Eigen::VectorXd b, const QuadratureConfig& cfg, bool closed_forms) {
  // Deterministic rows.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a.row(i).isZero(0)) {
      if (!(0 < b(i))) return 0;
    } else {
      keep.push_back(i);
    }
  }
  if (keep.empty()) return 1;
  if (keep.size() != static_cast<std::size_t>(a.rows())) {
    Eigen::MatrixXd a2(keep.size(), a.cols());
    Eigen::VectorXd b2(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
      a2.row(j) = a.row(keep[j]);
      b2(j) = b(keep[j]);
    }
    a = std::move(a2);
    b = std::move(b2);
  }
  const auto k = a.rows();

  if (a.cols() == 1) {
    double lo = -kInf;
    double hi = kInf;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (a(i, 0) > 0)
        hi = std::min(hi, b(i) / a(i, 0));
      else
        lo = std::max(lo, b(i) / a(i, 0));
    }
    return normal_mass(lo, hi);
  }
  if (k == 1) return normal_cdf(b(0) / a.row(0).norm());

  // Restrict z to the row space of a.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-12 * sv(0)) ++rank;
  if (rank < a.cols()) {
    Eigen::MatrixXd reduced = a * svd.matrixV().leftCols(rank);
    return polyhedron(std::move(reduced), std::move(b), cfg, closed_forms);
  }

  if (closed_forms && k == 2 && rank == 2) {
    const double s0 = a.row(0).norm();
    const double s1 = a.row(1).norm();
    const double rho = a.row(0).dot(a.row(1)) / (s0 * s1);
    return bivariate_normal_cdf(b(0) / s0, b(1) / s1, rho, cfg);
  }
  return integrate_first(a, b, cfg);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * boost::math::erfc(-x / std::sqrt(2.0)); }

double bivariate_normal_cdf(double h, double k, double rho, const QuadratureConfig& cfg) {
  if (std::isinf(h) || std::isinf(k)) {
    if (h == -kInf || k == -kInf) return 0;
    return h == kInf ? normal_cdf(k) : normal_cdf(h);
  }
  const double ph = normal_cdf(h);
  const double pk = normal_cdf(k);
  if (h != 0 && k != 0 && std::abs(rho) < 1 - 1e-9) {
    const double r = owen_bivariate(h, k, rho);
    // Accept unless cancellation may have eaten the relative accuracy.
    if (r > 1e-6 * std::max(ph, pk)) return std::clamp(r, 0.0, std::min(ph, pk));
  }
  const double s = std::sqrt(std::max(0.0, 1 - rho * rho));
  Eigen::MatrixXd a(2, 2);
  a << 1, 0, rho, s;
  Eigen::VectorXd b(2);
  b << h, k;
  return polyhedron(a, b, cfg, false);
}

double gaussian_polyhedron_probability(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       const QuadratureConfig& cfg) {
  return polyhedron(a, b, cfg, true);
}

double gaussian_polyhedron_log_bound(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a.row(i).isZero(0)) {
      if (!(0 < b(i))) return -kInf;
    } else {
      keep.push_back(i);
    }
  }
  if (std::all_of(keep.begin(), keep.end(), [&](Eigen::Index i) { return b(i) > 0; })) return 0;
  Eigen::MatrixXd a2(keep.size(), a.cols());
  Eigen::VectorXd b2(keep.size());
  for (std::size_t j = 0; j < keep.size(); ++j) {
    a2.row(j) = a.row(keep[j]);
    b2(j) = b(keep[j]);
  }
  const auto dominant = dominant_point(a2, b2);
  if (!dominant) return -kInf;
  const Eigen::VectorXd& u = *dominant;
  // Shrink slightly so a point found within the feasibility slack still
  // gives a valid bound.
  const double d = std::max(0.0, u.norm() * (1 - 1e-9) - 1e-9);
  return std::min(0.0, -std::log(2.0) - 0.5 * d * d);
}

}  // namespace indeftheta
