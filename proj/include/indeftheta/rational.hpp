#pragma once

// Exact rational scalars, vectors and dense matrices. Everything the
// lattice layer decides (signatures, radicals, coset representatives,
// copositivity) goes through this header; floating point only appears at
// the quadrature/theta boundary.

#include <boost/multiprecision/cpp_int.hpp>

#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace indeftheta {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using RatVector = std::vector<Rational>;

Integer floor_div(const Rational& x);
/// x - floor(x), in [0, 1).
Rational frac(const Rational& x);
double to_double(const Rational& x);
/// "p/q" (or "p" when the denominator is 1).
std::string to_string(const Rational& x);
/// Accepts "p", "p/q", or a finite decimal such as "-0.25".
Rational parse_rational(const std::string& text);

class RatMatrix {
 public:
  RatMatrix() = default;
  RatMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  static RatMatrix identity(std::size_t n);
  static RatMatrix from_rows(const std::vector<RatVector>& rows);
  static RatMatrix from_columns(const std::vector<RatVector>& cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  RatVector row(std::size_t i) const;
  RatVector col(std::size_t j) const;
  RatMatrix transpose() const;
  bool is_symmetric() const;
  bool is_integral() const;

  friend RatMatrix operator*(const RatMatrix& a, const RatMatrix& b);
  friend RatVector operator*(const RatMatrix& a, const RatVector& v);
  friend bool operator==(const RatMatrix& a, const RatMatrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

Rational dot(const RatVector& a, const RatVector& b);
RatVector operator+(const RatVector& a, const RatVector& b);
RatVector operator-(const RatVector& a, const RatVector& b);
RatVector scale(const Rational& s, const RatVector& v);
// Constrained so overload resolution never tries to convert foreign types
// (e.g. Eigen expressions) to Rational.
template <class S>
  requires std::same_as<S, Rational>
RatVector operator*(const S& s, const RatVector& v) {
  return scale(s, v);
}
bool is_zero(const RatVector& v);

Rational determinant(RatMatrix m);
std::size_t rank(RatMatrix m);
/// Unique solution of m x = b; nullopt when m is singular.
std::optional<RatVector> solve(const RatMatrix& m, const RatVector& b);
std::optional<RatMatrix> inverse(const RatMatrix& m);
/// Basis of {x : m x = 0}.
std::vector<RatVector> nullspace(const RatMatrix& m);

/// Inertia of a symmetric rational matrix, computed by congruence
/// diagonalisation (no eigenvalues involved).
struct Inertia {
  int plus = 0;
  int minus = 0;
  int zero = 0;
};
Inertia inertia(const RatMatrix& symmetric);

/// p^T a p = diag(d) with p invertible. Columns of p with d < 0 (d == 0) are
/// negative (isotropic) witnesses.
struct Congruence {
  RatMatrix p;
  RatVector d;
};
Congruence diagonalize(const RatMatrix& symmetric);

/// Symmetric pivoted LDL^T of a positive semidefinite matrix:
/// a(perm[i], perm[j]) = sum_k l(i,k) d[k] l(j,k), l unit lower triangular in
/// pivot order, d >= 0 with exactly rank() nonzero leading entries.
struct PsdFactor {
  std::vector<std::size_t> perm;
  RatMatrix l;
  RatVector d;
  std::size_t rank = 0;
};
/// nullopt when the matrix is not positive semidefinite.
std::optional<PsdFactor> psd_factor(const RatMatrix& a);

}  // namespace indeftheta
