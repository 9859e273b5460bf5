#include "indeftheta/cone.hpp"

#include "indeftheta/error.hpp"

#include <algorithm>
#include <numeric>

namespace indeftheta {

namespace {

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

std::vector<std::size_t> independent_subset(const std::vector<RatVector>& family) {
  std::vector<std::size_t> chosen;
  std::vector<RatVector> basis;
  for (std::size_t i = 0; i < family.size(); ++i) {
    basis.push_back(family[i]);
    if (rank(RatMatrix::from_columns(basis)) == basis.size()) {
      chosen.push_back(i);
    } else {
      basis.pop_back();
    }
  }
  return chosen;
}

bool is_square(const Integer& n) {
  if (n < 0) return false;
  const Integer r = boost::multiprecision::sqrt(n);
  return r * r == n;
}

bool is_rational_square(const Rational& x) { return x >= 0 && is_square(numerator(x)) && is_square(denominator(x)); }

int sign_of(const Rational& x) { return x > 0 ? 1 : x < 0 ? -1 : 0; }
int sign_of(double x) { return x > 0 ? 1 : x < 0 ? -1 : 0; }

Membership classify(const std::vector<int>& signs) {
  bool any_pos = false, any_neg = false, any_zero = false;
  for (int s : signs) {
    any_pos |= s > 0;
    any_neg |= s < 0;
    any_zero |= s == 0;
  }
  if (any_pos && any_neg) return Membership::Outside;
  return any_zero ? Membership::Boundary : Membership::Interior;
}

bool positive_multiple(const RatVector& a, const RatVector& b) {
  std::optional<Rational> ratio;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] == 0) != (b[i] == 0)) return false;
    if (a[i] == 0) continue;
    const Rational r = b[i] / a[i];
    if (ratio && *ratio != r) return false;
    ratio = r;
  }
  return ratio && *ratio > 0;
}

Rational pow2(int e) {
  Rational r = 1;
  for (int i = 0; i < std::abs(e); ++i) r *= 2;
  return e >= 0 ? r : Rational(1) / r;
}

}  // namespace

SpanKind span_kind(const QuadSpace& space, const std::vector<RatVector>& family) {
  if (family.empty()) return SpanKind::NegativeDefinite;
  const Inertia in = inertia(space.gram_of(family));
  if (in.plus > 0) return SpanKind::NotNegative;
  return rank(RatMatrix::from_columns(family)) == static_cast<std::size_t>(in.minus) ? SpanKind::NegativeDefinite
                                                                                     : SpanKind::NegativeSemidefinite;
}

// ---------------------------------------------------------------------------
// SignPolynomial

SignPolynomial::SignPolynomial(std::vector<RatVector> walls, std::map<WallMask, Rational> terms)
    : walls_(std::move(walls)), terms_(std::move(terms)) {
  std::erase_if(terms_, [](const auto& t) { return t.second == 0; });
  for (const auto& [mask, coeff] : terms_)
    if (walls_.size() < 32 && (mask >> walls_.size()) != 0)
      throw Error(ErrorCode::DimensionMismatch, "sign polynomial term refers to a missing wall");
}

std::vector<RatVector> SignPolynomial::subset(WallMask mask) const {
  std::vector<RatVector> out;
  for (std::size_t i = 0; i < walls_.size(); ++i)
    if (mask & (WallMask{1} << i)) out.push_back(walls_[i]);
  return out;
}

int SignPolynomial::max_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, popcount(t.first));
  return d;
}

Rational SignPolynomial::evaluate(const std::vector<int>& signs) const {
  if (signs.size() != walls_.size()) throw Error(ErrorCode::DimensionMismatch, "one sign per wall expected");
  Rational total = 0;
  for (const auto& [mask, coeff] : terms_) {
    int prod = 1;
    for (std::size_t i = 0; i < signs.size() && prod != 0; ++i)
      if (mask & (WallMask{1} << i)) prod *= signs[i];
    if (prod != 0) total += prod * coeff;
  }
  return total;
}

Rational SignPolynomial::evaluate(const QuadSpace& space, const RatVector& v) const {
  std::vector<int> signs;
  for (const auto& w : walls_) signs.push_back(sign_of(space.bilinear(v, w)));
  return evaluate(signs);
}

double SignPolynomial::evaluate(const QuadSpace& space, const Eigen::VectorXd& v) const {
  std::vector<int> signs;
  for (const auto& w : walls_) signs.push_back(sign_of(space.bilinear(v, to_eigen(w))));
  return to_double(evaluate(signs));
}

// ---------------------------------------------------------------------------
// Linear inequalities by Fourier-Motzkin elimination with back substitution.

std::optional<RatVector> solve_inequalities(const std::vector<Inequality>& system, std::size_t vars) {
  for (const auto& row : system)
    if (row.a.size() != vars) throw Error(ErrorCode::DimensionMismatch, "inequality has the wrong length");
  if (vars == 0) {
    for (const auto& row : system)
      if (row.b > 0) return std::nullopt;
    return RatVector{};
  }
  const std::size_t k = vars - 1;
  std::vector<Inequality> lower, upper, reduced;
  auto shrink = [&](const Inequality& row) {
    Inequality r{RatVector(row.a.begin(), row.a.begin() + static_cast<std::ptrdiff_t>(k)), row.b};
    return r;
  };
  for (const auto& row : system) {
    if (row.a[k] > 0) {
      lower.push_back(row);
    } else if (row.a[k] < 0) {
      upper.push_back(row);
    } else {
      reduced.push_back(shrink(row));
    }
  }
  for (const auto& lo : lower)
    for (const auto& up : upper) {
      // lo/lo.a[k] + up/(-up.a[k]) eliminates x_k
      Inequality comb = shrink(lo);
      const Rational fl = 1 / lo.a[k];
      const Rational fu = -1 / up.a[k];
      for (std::size_t i = 0; i < k; ++i) comb.a[i] = fl * lo.a[i] + fu * up.a[i];
      comb.b = fl * lo.b + fu * up.b;
      if (std::find_if(reduced.begin(), reduced.end(), [&](const Inequality& r) {
            return r.a == comb.a && r.b == comb.b;
          }) == reduced.end())
        reduced.push_back(std::move(comb));
    }
  auto head = solve_inequalities(reduced, k);
  if (!head) return std::nullopt;
  std::optional<Rational> lo_bound, up_bound;
  for (const auto& row : lower) {
    Rational rest = row.b;
    for (std::size_t i = 0; i < k; ++i) rest -= row.a[i] * (*head)[i];
    const Rational bound = rest / row.a[k];
    if (!lo_bound || bound > *lo_bound) lo_bound = bound;
  }
  for (const auto& row : upper) {
    Rational rest = row.b;
    for (std::size_t i = 0; i < k; ++i) rest -= row.a[i] * (*head)[i];
    const Rational bound = rest / row.a[k];
    if (!up_bound || bound < *up_bound) up_bound = bound;
  }
  Rational x = 0;
  if (lo_bound && up_bound) {
    x = (*lo_bound + *up_bound) / 2;
  } else if (lo_bound) {
    x = *lo_bound;
  } else if (up_bound) {
    x = *up_bound;
  }
  head->push_back(x);
  return head;
}

// ---------------------------------------------------------------------------
// Copositivity: Cottle-Habetler-Lemke. If every principal submatrix of order
// n-1 is copositive, a is not copositive iff det a < 0 and adj a >= 0.

Copositivity copositivity(const RatMatrix& a) {
  if (!a.is_symmetric()) throw Error(ErrorCode::DimensionMismatch, "copositivity needs a symmetric matrix");
  const std::size_t n = a.rows();
  if (n >= 25) throw Error(ErrorCode::CertificateUnavailable, "too many rays for exact copositivity");
  std::vector<WallMask> masks(std::size_t{1} << n);
  std::iota(masks.begin(), masks.end(), WallMask{0});
  std::stable_sort(masks.begin(), masks.end(), [](WallMask x, WallMask y) { return popcount(x) < popcount(y); });
  for (WallMask mask : masks) {
    if (mask == 0) continue;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (WallMask{1} << i)) idx.push_back(i);
    RatMatrix b(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) b(i, j) = a(idx[i], idx[j]);
    const Rational det = determinant(b);
    if (det >= 0) continue;
    const RatMatrix inv = *inverse(b);
    bool adj_nonneg = true;
    for (std::size_t i = 0; i < idx.size() && adj_nonneg; ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        if (det * inv(i, j) < 0) {
          adj_nonneg = false;
          break;
        }
    if (!adj_nonneg) continue;
    RatVector x(n);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j) x[idx[i]] += det * inv(i, j);
    return {false, x};
  }
  return {true, std::nullopt};
}

// ---------------------------------------------------------------------------
// Cone

Cone::Cone(QuadSpace space, WallSet walls) : space_(std::move(space)), walls_(std::move(walls)) {
  const int dm = d_minus();
  const auto& w = walls_.walls;
  if (w.size() > 31) throw Error(ErrorCode::InvalidWallSet, "at most 31 walls are supported");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i].size() != space_.dim()) throw Error(ErrorCode::InvalidWallSet, "wall dimension does not match the space");
    if (is_zero(w[i])) throw Error(ErrorCode::InvalidWallSet, "zero wall");
    for (std::size_t j = 0; j < i; ++j)
      if (positive_multiple(w[j], w[i]))
        throw Error(ErrorCode::InvalidWallSet,
                    "wall " + std::to_string(i) + " is a positive multiple of wall " + std::to_string(j));
  }
  if (walls_.kind == ConeKind::Tetrahedral) {
    if (w.size() != static_cast<std::size_t>(dm) + 1)
      throw Error(ErrorCode::InvalidWallSet, "a tetrahedral cone needs 1 + d^- walls");
  } else {
    if (w.size() != 2 * static_cast<std::size_t>(dm) || walls_.pairs.size() != static_cast<std::size_t>(dm))
      throw Error(ErrorCode::InvalidWallSet, "a cubical cone needs d^- pairs of walls");
    std::vector<int> seen(w.size(), 0);
    for (const auto& p : walls_.pairs)
      for (std::size_t i : p) {
        if (i >= w.size()) throw Error(ErrorCode::InvalidWallSet, "pair index out of range");
        ++seen[i];
      }
    if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
      throw Error(ErrorCode::InvalidWallSet, "pairs must cover every wall exactly once");
  }
  for (const auto& wall : w) {
    functionals_.push_back(space_.functional(wall));
    functionals_d_.push_back(to_eigen(functionals_.back()));
  }
}

std::vector<Edge> Cone::edges() const {
  const auto& w = walls();
  std::vector<WallMask> masks;
  const int dm = d_minus();
  if (kind() == ConeKind::Tetrahedral) {
    for (WallMask m = 0; m < (WallMask{1} << w.size()); ++m)
      if (popcount(m) == dm) masks.push_back(m);
  } else {
    for (WallMask choice = 0; choice < (WallMask{1} << dm); ++choice) {
      WallMask m = 0;
      for (int p = 0; p < dm; ++p) m |= WallMask{1} << walls_.pairs[static_cast<std::size_t>(p)][(choice >> p) & 1];
      masks.push_back(m);
    }
    std::sort(masks.begin(), masks.end());
  }

  std::vector<Edge> out;
  for (WallMask m : masks) {
    Edge e;
    e.walls = m;
    std::vector<RatVector> members, funcs;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (m & (WallMask{1} << i)) {
        members.push_back(w[i]);
        funcs.push_back(functionals_[i]);
      }

    // Orthogonal complement and its isotropy.
    std::vector<RatVector> perp_basis;
    if (funcs.empty()) {
      for (std::size_t i = 0; i < space_.dim(); ++i) perp_basis.push_back(RatMatrix::identity(space_.dim()).col(i));
    } else {
      perp_basis = nullspace(RatMatrix::from_rows(funcs));
    }
    if (!perp_basis.empty()) {
      const Inertia in = inertia(space_.gram_of(perp_basis));
      e.isotropic = in.zero > 0 || (in.plus > 0 && in.minus > 0);
    }

    // Span of E: radical, Witt index and rationality.
    std::vector<RatVector> basis;
    for (std::size_t i : independent_subset(members)) basis.push_back(members[i]);
    e.span = span_kind(space_, members);
    if (!basis.empty()) {
      const RatMatrix g = space_.gram_of(basis);
      for (const auto& c : nullspace(g)) {
        RatVector r(space_.dim());
        for (std::size_t j = 0; j < basis.size(); ++j) r = r + c[j] * basis[j];
        e.radical.push_back(r);
      }
      const Congruence dg = diagonalize(g);
      std::vector<Rational> nonzero;
      int plus = 0, minus = 0;
      for (const auto& d : dg.d)
        if (d != 0) {
          nonzero.push_back(d);
          (d > 0 ? plus : minus) += 1;
        }
      if (plus > 0 && minus > 0) {
        // Indefinite nondegenerate part: decided exactly for a binary form
        // (isotropic over Q iff -det is a square), left undecided otherwise.
        e.rational = nonzero.size() == 2 && is_rational_square(-nonzero[0] * nonzero[1]) && plus == 1 && minus == 1;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Edge> Cone::isotropic_locus() const {
  if (!is_non_negative()) throw Error(ErrorCode::ConeNotNonNegative, "the cone contains negative vectors");
  std::vector<Edge> out;
  for (auto& e : edges())
    if (e.isotropic) out.push_back(std::move(e));
  return out;
}

std::optional<RatVector> Cone::interior_point() const {
  std::vector<Inequality> system;
  for (const auto& f : functionals_) system.push_back({f, Rational(1)});
  return solve_inequalities(system, space_.dim());
}

NonNegativity Cone::non_negativity() const {
  NonNegativity result;
  const std::size_t n = space_.dim();
  const auto& w = walls();

  // Lineality space W^perp: q must be positive definite on it.
  const std::vector<RatVector> lineality = nullspace(RatMatrix::from_rows(functionals_));
  if (!lineality.empty()) {
    const Congruence c = diagonalize(space_.gram_of(lineality));
    auto combine = [&](std::size_t col) {
      RatVector x(n);
      for (std::size_t j = 0; j < lineality.size(); ++j) x = x + c.p(j, col) * lineality[j];
      return x;
    };
    for (std::size_t k = 0; k < c.d.size(); ++k)
      if (c.d[k] < 0) {
        result.witness = combine(k);
        return result;
      }
    for (std::size_t k = 0; k < c.d.size(); ++k) {
      if (c.d[k] != 0) continue;
      // e is isotropic and orthogonal to all of W^perp; moving an interior
      // point p along e changes q linearly once <p, e> != 0.
      const RatVector e = combine(k);
      auto p = interior_point();
      if (!p) return result;
      if (space_.bilinear(*p, e) == 0) {
        // nudge p by y with <y, e> = 1 while keeping every slack positive
        const RatVector ge = space_.functional(e);
        RatVector y(n);
        for (std::size_t i = 0; i < n; ++i)
          if (ge[i] != 0) {
            y[i] = 1 / ge[i];
            break;
          }
        Rational bound = 0;
        for (const auto& f : functionals_) bound += abs(dot(f, y));
        *p = *p + (Rational(1, 2) / (bound + 1)) * y;
      }
      const Rational s = -(space_.quad(*p) + 1) / space_.bilinear(*p, e);
      result.witness = *p + s * e;
      return result;
    }
  }

  // Pointed part inside span W: extreme rays are the one-dimensional
  // solutions of k-1 independent tight walls.
  std::vector<RatVector> basis;
  for (std::size_t i : independent_subset(w)) basis.push_back(w[i]);
  const std::size_t k = basis.size();
  RatMatrix m(w.size(), k);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < k; ++j) m(i, j) = dot(functionals_[i], basis[j]);
  for (WallMask tight = 0; tight < (WallMask{1} << w.size()); ++tight) {
    if (static_cast<std::size_t>(popcount(tight)) != k - 1) continue;
    std::vector<RatVector> rows;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (tight & (WallMask{1} << i)) rows.push_back(m.row(i));
    std::vector<RatVector> ns;
    if (rows.empty()) {
      for (std::size_t j = 0; j < k; ++j) ns.push_back(RatMatrix::identity(k).col(j));
    } else {
      ns = nullspace(RatMatrix::from_rows(rows));
    }
    if (ns.size() != 1) continue;
    const RatVector vals = m * ns[0];
    const bool all_nonneg = std::all_of(vals.begin(), vals.end(), [](const Rational& x) { return x >= 0; });
    const bool all_nonpos = std::all_of(vals.begin(), vals.end(), [](const Rational& x) { return x <= 0; });
    if (!all_nonneg && !all_nonpos) continue;
    RatVector ray(n);
    for (std::size_t j = 0; j < k; ++j) ray = ray + ns[0][j] * basis[j];
    if (!all_nonneg) ray = scale(Rational(-1), ray);
    if (is_zero(ray)) continue;
    if (std::none_of(result.rays.begin(), result.rays.end(),
                     [&](const RatVector& r) { return positive_multiple(r, ray); }))
      result.rays.push_back(ray);
  }

  const Copositivity cp = copositivity(space_.gram_of(result.rays));
  if (!cp.copositive) {
    RatVector x(n);
    for (std::size_t i = 0; i < result.rays.size(); ++i) x = x + (*cp.witness)[i] * result.rays[i];
    result.witness = x;
    return result;
  }
  result.non_negative = true;
  return result;
}

ValidationReport Cone::validate(const Lattice& lattice) const {
  ValidationReport r;
  if (!(lattice.space().gram() == space_.gram())) {
    r.failures.push_back("lattice Gram matrix differs from the cone's space");
    return r;
  }
  r.interior_point = interior_point();
  r.nondegenerate = r.interior_point.has_value();
  if (!r.nondegenerate) r.failures.push_back("non-degenerate: C(W) has no interior points");

  const NonNegativity nn = non_negativity();
  r.non_negative = nn.non_negative;
  r.negative_witness = nn.witness;
  if (!r.non_negative) r.failures.push_back("non-negative: the cone contains vectors with q < 0");

  r.semidefinite_spans = true;
  const SignPolynomial p = face_indicator();
  for (const auto& [mask, coeff] : p.terms())
    if (span_kind(space_, p.subset(mask)) == SpanKind::NotNegative) {
      r.semidefinite_spans = false;
      r.failures.push_back("semidefinite: span of wall subset " + std::to_string(mask) +
                           " is not negative semidefinite");
    }
  for (const auto& e : edges())
    if (e.span == SpanKind::NotNegative && !p.terms().contains(e.walls)) {
      r.semidefinite_spans = false;
      r.failures.push_back("semidefinite: span of edge " + std::to_string(e.walls) + " is not negative semidefinite");
    }

  r.rational_edges = true;
  for (const auto& e : edges())
    if (e.isotropic && !e.rational) {
      r.rational_edges = false;
      r.failures.push_back("rational: isotropic edge " + std::to_string(e.walls) + " is not rational");
    }
  return r;
}

SignPolynomial Cone::face_indicator() const {
  return kind() == ConeKind::Tetrahedral ? face_indicator_tetrahedral(*this) : face_indicator_cubical(*this);
}

std::vector<int> Cone::wall_signs(const RatVector& v) const {
  if (v.size() != space_.dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension does not match the space");
  std::vector<int> s;
  for (const auto& f : functionals_) s.push_back(sign_of(dot(f, v)));
  return s;
}

std::vector<int> Cone::wall_signs(const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(v.size()) != space_.dim())
    throw Error(ErrorCode::DimensionMismatch, "point dimension does not match the space");
  std::vector<int> s;
  for (const auto& f : functionals_d_) s.push_back(sign_of(f.dot(v)));
  return s;
}

Membership Cone::membership(const RatVector& v) const { return classify(wall_signs(v)); }
Membership Cone::membership(const Eigen::VectorXd& v) const { return classify(wall_signs(v)); }

SignPolynomial face_indicator_tetrahedral(const Cone& cone) {
  if (cone.kind() != ConeKind::Tetrahedral) throw Error(ErrorCode::InvalidWallSet, "cone is not tetrahedral");
  // 2^{-n} (prod (1 + s_w) - (-1)^n prod (1 - s_w)): the monomial s_E survives
  // iff n + |E| is odd, so |E| <= n - 1 = d^-.
  const int n = static_cast<int>(cone.walls().size());
  std::map<WallMask, Rational> terms;
  for (WallMask m = 0; m < (WallMask{1} << n); ++m)
    if ((n + popcount(m)) % 2 == 1) terms[m] = pow2(1 - n);
  return SignPolynomial(cone.walls(), std::move(terms));
}

SignPolynomial face_indicator_cubical(const Cone& cone) {
  if (cone.kind() != ConeKind::Cubical) throw Error(ErrorCode::InvalidWallSet, "cone is not cubical");
  const auto& pairs = cone.wall_set().pairs;
  const int dm = static_cast<int>(pairs.size());
  std::map<WallMask, Rational> terms;
  for (WallMask choice = 0; choice < (WallMask{1} << dm); ++choice) {
    WallMask m = 0;
    for (int p = 0; p < dm; ++p) m |= WallMask{1} << pairs[static_cast<std::size_t>(p)][(choice >> p) & 1];
    terms[m] += pow2(-dm);
  }
  return SignPolynomial(cone.walls(), std::move(terms));
}

}  // namespace indeftheta
