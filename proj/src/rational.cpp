#include "indeftheta/rational.hpp"

#include "indeftheta/error.hpp"

#include <algorithm>
#include <utility>

namespace indeftheta {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateForm: return "DegenerateForm";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateSpan: return "DegenerateSpan";
    case ErrorCode::NotIntegral: return "NotIntegral";
    case ErrorCode::InvalidWallSet: return "InvalidWallSet";
    case ErrorCode::ConeNotNonNegative: return "ConeNotNonNegative";
    case ErrorCode::CertificateUnavailable: return "CertificateUnavailable";
    case ErrorCode::SpanNotNegativeDefinite: return "SpanNotNegativeDefinite";
    case ErrorCode::SpanNotNegativeSemidefinite: return "SpanNotNegativeSemidefinite";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::TooCloseToWall: return "TooCloseToWall";
    case ErrorCode::FamilyNotNegative: return "FamilyNotNegative";
    case ErrorCode::NonRationalEdge: return "NonRationalEdge";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::OnSingularSet: return "OnSingularSet";
    case ErrorCode::TruncationNotConverged: return "TruncationNotConverged";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Integer floor_div(const Rational& x) {
  const Integer num = boost::multiprecision::numerator(x);
  const Integer den = boost::multiprecision::denominator(x);  // always > 0
  Integer q = num / den;
  if (num < 0 && q * den != num) q -= 1;
  return q;
}

Rational frac(const Rational& x) { return x - Rational(floor_div(x)); }

double to_double(const Rational& x) { return x.convert_to<double>(); }

std::string to_string(const Rational& x) {
  const Integer den = boost::multiprecision::denominator(x);
  if (den == 1) return boost::multiprecision::numerator(x).str();
  return boost::multiprecision::numerator(x).str() + "/" + den.str();
}

Rational parse_rational(const std::string& text) {
  auto bad = [&] { return Error(ErrorCode::ParseError, "not a rational number: '" + text + "'"); };
  if (text.empty()) throw bad();
  try {
    if (auto slash = text.find('/'); slash != std::string::npos) {
      Integer p(text.substr(0, slash));
      Integer q(text.substr(slash + 1));
      if (q == 0) throw bad();
      return Rational(p, q);
    }
    if (auto dot = text.find('.'); dot != std::string::npos) {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      bool negative = false;
      if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) {
        negative = digits[0] == '-';
        digits.erase(0, 1);
      }
      // a leading zero would make cpp_int read the digits as octal
      digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
      if (digits.empty()) digits = "0";
      if (digits.find_first_not_of("0123456789") != std::string::npos) throw bad();
      Integer den = 1;
      for (std::size_t i = dot + 1; i < text.size(); ++i) den *= 10;
      const Integer num(digits);
      return Rational(negative ? Integer(-num) : num, den);
    }
    return Rational(Integer(text));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
}

RatMatrix RatMatrix::identity(std::size_t n) {
  RatMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RatMatrix RatMatrix::from_rows(const std::vector<RatVector>& rows) {
  if (rows.empty()) return {};
  RatMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

RatMatrix RatMatrix::from_columns(const std::vector<RatVector>& cols) {
  return from_rows(cols).transpose();
}

RatVector RatMatrix::row(std::size_t i) const {
  return RatVector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                   data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

RatVector RatMatrix::col(std::size_t j) const {
  RatVector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

RatMatrix RatMatrix::transpose() const {
  RatMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool RatMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if ((*this)(i, j) != (*this)(j, i)) return false;
  return true;
}

bool RatMatrix::is_integral() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const Rational& x) { return boost::multiprecision::denominator(x) == 1; });
}

RatMatrix operator*(const RatMatrix& a, const RatMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "matrix product");
  RatMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
    }
  return c;
}

RatVector operator*(const RatMatrix& a, const RatVector& v) {
  if (a.cols() != v.size()) throw Error(ErrorCode::DimensionMismatch, "matrix-vector product");
  RatVector r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r[i] += a(i, j) * v[j];
  return r;
}

Rational dot(const RatVector& a, const RatVector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "dot product");
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

RatVector operator+(const RatVector& a, const RatVector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "vector sum");
  RatVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

RatVector operator-(const RatVector& a, const RatVector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "vector difference");
  RatVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

RatVector scale(const Rational& s, const RatVector& v) {
  RatVector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = s * v[i];
  return r;
}

bool is_zero(const RatVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& x) { return x == 0; });
}

namespace {

// In-place reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(RatMatrix& m) {
  std::vector<std::size_t> pivots;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t p = r;
    while (p < m.rows() && m(p, c) == 0) ++p;
    if (p == m.rows()) continue;
    if (p != r)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
    const Rational inv = 1 / m(r, c);
    for (std::size_t j = 0; j < m.cols(); ++j) m(r, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0) continue;
      const Rational f = m(i, c);
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

Rational determinant(RatMatrix m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "determinant of non-square matrix");
  const std::size_t n = m.rows();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m(p, c) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m(i, c) == 0) continue;
      const Rational f = m(i, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
    }
  }
  return det;
}

std::size_t rank(RatMatrix m) { return rref(m).size(); }

std::optional<RatVector> solve(const RatMatrix& m, const RatVector& b) {
  if (m.rows() != m.cols() || b.size() != m.rows())
    throw Error(ErrorCode::DimensionMismatch, "linear solve");
  const std::size_t n = m.rows();
  RatMatrix aug(n, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n) = b[i];
  }
  auto piv = rref(aug);
  if (piv.size() < n || piv.back() >= n) return std::nullopt;
  return aug.col(n);
}

std::optional<RatMatrix> inverse(const RatMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "inverse of non-square matrix");
  const std::size_t n = m.rows();
  RatMatrix aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1;
  }
  auto piv = rref(aug);
  if (piv.size() < n || piv[n - 1] >= n) return std::nullopt;
  RatMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

std::vector<RatVector> nullspace(const RatMatrix& m) {
  RatMatrix r = m;
  auto piv = rref(r);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto c : piv) is_pivot[c] = true;
  std::vector<RatVector> basis;
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    RatVector x(m.cols());
    x[free] = 1;
    for (std::size_t k = 0; k < piv.size(); ++k) x[piv[k]] = -r(k, free);
    basis.push_back(std::move(x));
  }
  return basis;
}

Congruence diagonalize(const RatMatrix& symmetric) {
  if (!symmetric.is_symmetric()) throw Error(ErrorCode::DimensionMismatch, "diagonalize needs a symmetric matrix");
  RatMatrix a = symmetric;
  const std::size_t n = a.rows();
  Congruence c{RatMatrix::identity(n), RatVector(n)};
  auto swap_index = [&](std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t k = 0; k < n; ++k) std::swap(a(i, k), a(j, k));
    for (std::size_t k = 0; k < n; ++k) std::swap(a(k, i), a(k, j));
    for (std::size_t k = 0; k < n; ++k) std::swap(c.p(k, i), c.p(k, j));
  };
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    while (p < n && a(p, p) == 0) ++p;
    if (p == n) {
      // Zero diagonal: a nonzero off-diagonal entry a(i,j) becomes a nonzero
      // diagonal entry 2 a(i,j) after the congruence row_i += row_j.
      std::size_t pi = n, pj = n;
      for (std::size_t i = k; i < n && pi == n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (a(i, j) != 0) {
            pi = i;
            pj = j;
            break;
          }
      if (pi == n) break;
      for (std::size_t col = 0; col < n; ++col) a(pi, col) += a(pj, col);
      for (std::size_t r = 0; r < n; ++r) a(r, pi) += a(r, pj);
      for (std::size_t r = 0; r < n; ++r) c.p(r, pi) += c.p(r, pj);
      p = pi;
    }
    swap_index(p, k);
    const Rational pivot = a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (a(i, k) == 0) continue;
      const Rational f = a(i, k) / pivot;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t r = 0; r < n; ++r) c.p(r, i) -= f * c.p(r, k);
    }
    for (std::size_t i = k + 1; i < n; ++i) a(i, k) = a(k, i) = 0;
  }
  for (std::size_t k = 0; k < n; ++k) c.d[k] = a(k, k);
  return c;
}

Inertia inertia(const RatMatrix& symmetric) {
  Inertia result;
  for (const auto& x : diagonalize(symmetric).d) (x > 0 ? result.plus : x < 0 ? result.minus : result.zero) += 1;
  return result;
}

std::optional<PsdFactor> psd_factor(const RatMatrix& a) {
  if (!a.is_symmetric()) throw Error(ErrorCode::DimensionMismatch, "psd_factor needs a symmetric matrix");
  const std::size_t n = a.rows();
  PsdFactor f;
  f.perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;
  RatMatrix s = a;  // Schur complement, indexed by original positions
  f.l = RatMatrix(n, n);
  f.d.assign(n, Rational(0));
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t best = k;
    for (std::size_t i = k; i < n; ++i) {
      const Rational& di = s(f.perm[i], f.perm[i]);
      if (di < 0) return std::nullopt;
      if (di > s(f.perm[best], f.perm[best])) best = i;
    }
    std::swap(f.perm[k], f.perm[best]);
    for (std::size_t c = 0; c < k; ++c) std::swap(f.l(k, c), f.l(best, c));
    const std::size_t pk = f.perm[k];
    const Rational dk = s(pk, pk);
    if (dk == 0) {
      for (std::size_t i = k; i < n; ++i)
        for (std::size_t j = k; j < n; ++j)
          if (s(f.perm[i], f.perm[j]) != 0) return std::nullopt;
      break;
    }
    f.d[k] = dk;
    f.rank = k + 1;
    f.l(k, k) = 1;
    for (std::size_t i = k + 1; i < n; ++i) f.l(i, k) = s(f.perm[i], pk) / dk;
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        s(f.perm[i], f.perm[j]) -= f.l(i, k) * dk * f.l(j, k);
  }
  // Rows past the rank were never touched as pivots; keep l unit-diagonal.
  for (std::size_t k = f.rank; k < n; ++k) f.l(k, k) = 1;
  return f;
}

}  // namespace indeftheta
