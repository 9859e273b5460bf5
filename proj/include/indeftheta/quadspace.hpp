#pragma once

#include "indeftheta/rational.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace indeftheta {

struct Signature {
  int plus = 0;
  int minus = 0;
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// Exact inertia of a nondegenerate symmetric Gram matrix.
/// Throws DegenerateForm when det(gram) = 0.
Signature signature(const RatMatrix& gram);

/// Rational quadratic space in fixed coordinates: <v,w> = v^T gram w and
/// q(v) = <v,v>/2.
class QuadSpace {
 public:
  explicit QuadSpace(RatMatrix gram);

  std::size_t dim() const noexcept { return gram_.rows(); }
  const RatMatrix& gram() const noexcept { return gram_; }
  Signature signature() const noexcept { return signature_; }
  const Eigen::MatrixXd& gram_double() const noexcept { return gram_d_; }
  const Eigen::MatrixXd& gram_inverse_double() const noexcept { return gram_inv_d_; }

  Rational bilinear(const RatVector& v, const RatVector& w) const;
  Rational quad(const RatVector& v) const;
  double bilinear(const Eigen::VectorXd& v, const Eigen::VectorXd& w) const;
  double quad(const Eigen::VectorXd& v) const;
  /// Functional l -> <l, w> as a coefficient vector (gram * w).
  RatVector functional(const RatVector& w) const;

  /// Gram matrix (<w_i, w_j>) of a family of vectors.
  RatMatrix gram_of(std::span<const RatVector> family) const;

 private:
  void check_dim(std::size_t n) const;

  RatMatrix gram_;
  Signature signature_;
  Eigen::MatrixXd gram_d_;
  Eigen::MatrixXd gram_inv_d_;
};

/// Orthogonal projection of v onto span(family). Requires the Gram matrix of
/// the family to be nonsingular; throws DegenerateSpan otherwise.
RatVector project(const QuadSpace& space, const RatVector& v, std::span<const RatVector> family);
Eigen::VectorXd project(const QuadSpace& space, const Eigen::VectorXd& v, std::span<const RatVector> family);

/// The lattice of integer vectors in the coordinates of an integral space.
class Lattice {
 public:
  /// Throws NotIntegral unless every Gram entry is an integer.
  explicit Lattice(QuadSpace space);
  explicit Lattice(RatMatrix gram) : Lattice(QuadSpace(std::move(gram))) {}

  const QuadSpace& space() const noexcept { return space_; }
  std::size_t dim() const noexcept { return space_.dim(); }
  /// True when q takes integer values on the lattice.
  bool is_even() const;

 private:
  QuadSpace space_;
};

/// L^dual / L, with representatives reduced to [0,1)^n in lattice coordinates.
/// Representative 0 always comes first.
struct DiscriminantGroup {
  std::vector<RatVector> reps;
  /// Nontrivial elementary divisors of the Gram matrix.
  std::vector<Integer> orders;

  std::size_t size() const noexcept { return reps.size(); }
  /// Index of the coset containing a dual vector; throws OutOfRange otherwise.
  std::size_t index_of(const RatVector& dual_vector) const;
};

DiscriminantGroup discriminant_group(const Lattice& lattice);

/// Smith normal form d = u * a * v with u, v unimodular (exposed for tests).
struct SmithForm {
  RatMatrix u, u_inv, v, d;
};
SmithForm smith_normal_form(const RatMatrix& integral);

Eigen::VectorXd to_eigen(const RatVector& v);

}  // namespace indeftheta
