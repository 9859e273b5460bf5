#include "indeftheta/quadspace.hpp"

#include "indeftheta/error.hpp"

#include <algorithm>
#include <utility>

namespace indeftheta {

Signature signature(const RatMatrix& gram) {
  if (!gram.is_symmetric()) throw Error(ErrorCode::DegenerateForm, "Gram matrix is not symmetric");
  const Inertia in = inertia(gram);
  if (in.zero > 0) throw Error(ErrorCode::DegenerateForm, "Gram matrix is singular");
  return {in.plus, in.minus};
}

Eigen::VectorXd to_eigen(const RatVector& v) {
  Eigen::VectorXd r(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) r(static_cast<Eigen::Index>(i)) = to_double(v[i]);
  return r;
}

QuadSpace::QuadSpace(RatMatrix gram) : gram_(std::move(gram)) {
  if (gram_.rows() == 0) throw Error(ErrorCode::DegenerateForm, "empty Gram matrix");
  signature_ = indeftheta::signature(gram_);
  const auto n = static_cast<Eigen::Index>(dim());
  gram_d_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      gram_d_(i, j) = to_double(gram_(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
  const RatMatrix inv = *inverse(gram_);
  gram_inv_d_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      gram_inv_d_(i, j) = to_double(inv(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
}

void QuadSpace::check_dim(std::size_t n) const {
  if (n != dim()) throw Error(ErrorCode::DimensionMismatch, "vector dimension does not match the space");
}

Rational QuadSpace::bilinear(const RatVector& v, const RatVector& w) const {
  check_dim(v.size());
  check_dim(w.size());
  return dot(v, gram_ * w);
}

Rational QuadSpace::quad(const RatVector& v) const { return bilinear(v, v) / 2; }

double QuadSpace::bilinear(const Eigen::VectorXd& v, const Eigen::VectorXd& w) const {
  check_dim(static_cast<std::size_t>(v.size()));
  check_dim(static_cast<std::size_t>(w.size()));
  return v.dot(gram_d_ * w);
}

double QuadSpace::quad(const Eigen::VectorXd& v) const { return 0.5 * bilinear(v, v); }

RatVector QuadSpace::functional(const RatVector& w) const {
  check_dim(w.size());
  return gram_ * w;
}

RatMatrix QuadSpace::gram_of(std::span<const RatVector> family) const {
  RatMatrix g(family.size(), family.size());
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) g(i, j) = g(j, i) = bilinear(family[i], family[j]);
  return g;
}

RatVector project(const QuadSpace& space, const RatVector& v, std::span<const RatVector> family) {
  if (family.empty()) return RatVector(space.dim());
  const RatMatrix g = space.gram_of(family);
  RatVector rhs(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) rhs[i] = space.bilinear(v, family[i]);
  auto coeffs = solve(g, rhs);
  if (!coeffs) throw Error(ErrorCode::DegenerateSpan, "Gram matrix of the projection family is singular");
  RatVector out(space.dim());
  for (std::size_t i = 0; i < family.size(); ++i) out = out + (*coeffs)[i] * family[i];
  return out;
}

Eigen::VectorXd project(const QuadSpace& space, const Eigen::VectorXd& v, std::span<const RatVector> family) {
  if (family.empty()) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dim()));
  const RatMatrix g = space.gram_of(family);
  if (determinant(g) == 0)
    throw Error(ErrorCode::DegenerateSpan, "Gram matrix of the projection family is singular");
  const auto k = static_cast<Eigen::Index>(family.size());
  Eigen::MatrixXd gd(k, k);
  Eigen::MatrixXd basis(v.size(), k);
  Eigen::VectorXd rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    basis.col(i) = to_eigen(family[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j)
      gd(i, j) = to_double(g(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
  }
  for (Eigen::Index i = 0; i < k; ++i) rhs(i) = space.bilinear(v, Eigen::VectorXd(basis.col(i)));
  return basis * gd.fullPivLu().solve(rhs);
}

Lattice::Lattice(QuadSpace space) : space_(std::move(space)) {
  if (!space_.gram().is_integral())
    throw Error(ErrorCode::NotIntegral, "lattice Gram matrix must have integer entries");
}

bool Lattice::is_even() const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (boost::multiprecision::numerator(space_.gram()(i, i)) % 2 != 0) return false;
  return true;
}

SmithForm smith_normal_form(const RatMatrix& integral) {
  if (!integral.is_integral()) throw Error(ErrorCode::NotIntegral, "Smith normal form needs an integer matrix");
  const std::size_t m = integral.rows();
  const std::size_t n = integral.cols();
  SmithForm s{RatMatrix::identity(m), RatMatrix::identity(m), RatMatrix::identity(n), integral};
  RatMatrix& d = s.d;

  auto swap_rows = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < n; ++j) std::swap(d(a, j), d(b, j));
    for (std::size_t j = 0; j < m; ++j) std::swap(s.u(a, j), s.u(b, j));
    for (std::size_t i = 0; i < m; ++i) std::swap(s.u_inv(i, a), s.u_inv(i, b));
  };
  auto swap_cols = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < m; ++i) std::swap(d(i, a), d(i, b));
    for (std::size_t i = 0; i < n; ++i) std::swap(s.v(i, a), s.v(i, b));
  };
  // row_i -= f * row_t
  auto row_sub = [&](std::size_t i, std::size_t t, const Rational& f) {
    for (std::size_t j = 0; j < n; ++j) d(i, j) -= f * d(t, j);
    for (std::size_t j = 0; j < m; ++j) s.u(i, j) -= f * s.u(t, j);
    for (std::size_t r = 0; r < m; ++r) s.u_inv(r, t) += f * s.u_inv(r, i);
  };
  // col_j -= f * col_t
  auto col_sub = [&](std::size_t j, std::size_t t, const Rational& f) {
    for (std::size_t i = 0; i < m; ++i) d(i, j) -= f * d(i, t);
    for (std::size_t i = 0; i < n; ++i) s.v(i, j) -= f * s.v(i, t);
  };

  for (std::size_t t = 0; t < std::min(m, n); ++t) {
    while (true) {
      // Smallest nonzero entry of the trailing block becomes the pivot.
      std::size_t bi = m, bj = n;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j)
          if (d(i, j) != 0 && (bi == m || abs(d(i, j)) < abs(d(bi, bj)))) {
            bi = i;
            bj = j;
          }
      if (bi == m) return s;
      swap_rows(t, bi);
      swap_cols(t, bj);
      bool clean = true;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (d(i, t) == 0) continue;
        row_sub(i, t, Rational(floor_div(d(i, t) / d(t, t))));
        if (d(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (d(t, j) == 0) continue;
        col_sub(j, t, Rational(floor_div(d(t, j) / d(t, t))));
        if (d(t, j) != 0) clean = false;
      }
      if (clean) break;
    }
    if (d(t, t) < 0) {
      for (std::size_t j = 0; j < n; ++j) d(t, j) = -d(t, j);
      for (std::size_t j = 0; j < m; ++j) s.u(t, j) = -s.u(t, j);
      for (std::size_t r = 0; r < m; ++r) s.u_inv(r, t) = -s.u_inv(r, t);
    }
  }
  return s;
}

namespace {

RatVector reduce_mod_lattice(RatVector v) {
  for (auto& x : v) x = frac(x);
  return v;
}

}  // namespace

std::size_t DiscriminantGroup::index_of(const RatVector& dual_vector) const {
  const RatVector r = reduce_mod_lattice(dual_vector);
  for (std::size_t i = 0; i < reps.size(); ++i)
    if (reps[i] == r) return i;
  throw Error(ErrorCode::OutOfRange, "vector is not in the dual lattice");
}

DiscriminantGroup discriminant_group(const Lattice& lattice) {
  // L^dual = G^{-1} Z^n and L^dual / L is isomorphic to Z^n / G Z^n, whose
  // representatives are u^{-1} k with 0 <= k_i < d_i for u G v = diag(d).
  const RatMatrix& g = lattice.space().gram();
  const std::size_t n = lattice.dim();
  const SmithForm snf = smith_normal_form(g);
  const RatMatrix g_inv = *inverse(g);

  DiscriminantGroup group;
  std::vector<Integer> divisors(n);
  for (std::size_t i = 0; i < n; ++i) {
    divisors[i] = boost::multiprecision::numerator(snf.d(i, i));
    if (divisors[i] > 1) group.orders.push_back(divisors[i]);
  }
  std::vector<Integer> k(n, 0);
  while (true) {
    RatVector kv(n);
    for (std::size_t i = 0; i < n; ++i) kv[i] = Rational(k[i]);
    group.reps.push_back(reduce_mod_lattice(g_inv * (snf.u_inv * kv)));
    std::size_t pos = n;
    while (pos > 0) {
      --pos;
      if (++k[pos] < divisors[pos]) break;
      k[pos] = 0;
      if (pos == 0) {
        pos = n + 1;
        break;
      }
    }
    if (pos == n + 1 || n == 0) break;
  }
  return group;
}

}  // namespace indeftheta
