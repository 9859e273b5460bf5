#pragma once

// Tetrahedral and cubical cones C(W) u -C(W) in a rational quadratic space,
// with exact edge classification and face-indicator sign polynomials.

#include "indeftheta/quadspace.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace indeftheta {

enum class ConeKind { Tetrahedral, Cubical };

/// Bit i set <=> wall i belongs to the subset.
using WallMask = std::uint32_t;

inline int popcount(WallMask m) { return __builtin_popcount(m); }

struct WallSet {
  ConeKind kind = ConeKind::Tetrahedral;
  std::vector<RatVector> walls;
  /// Cubical only: a partition of the wall indices into d^- pairs.
  std::vector<std::array<std::size_t, 2>> pairs;
};

enum class SpanKind { NegativeDefinite, NegativeSemidefinite, NotNegative };

SpanKind span_kind(const QuadSpace& space, const std::vector<RatVector>& family);

struct Edge {
  WallMask walls = 0;
  SpanKind span = SpanKind::NegativeDefinite;
  /// E^perp contains a nonzero isotropic vector.
  bool isotropic = false;
  /// Real Witt index of span E equals the dimension of its largest rational
  /// totally isotropic subspace.
  bool rational = true;
  /// Basis of the radical of span E (the rational isotropic part when the span
  /// is negative semidefinite).
  std::vector<RatVector> radical;
};

enum class Membership { Interior, Boundary, Outside };

/// sum_E a_E prod_{w in E} sgn<v, w>, keyed by wall subsets.
class SignPolynomial {
 public:
  SignPolynomial(std::vector<RatVector> walls, std::map<WallMask, Rational> terms);

  const std::vector<RatVector>& walls() const noexcept { return walls_; }
  const std::map<WallMask, Rational>& terms() const noexcept { return terms_; }
  std::vector<RatVector> subset(WallMask mask) const;
  int max_degree() const;

  /// signs[i] in {-1, 0, 1} is sgn<v, w_i>.
  Rational evaluate(const std::vector<int>& signs) const;
  Rational evaluate(const QuadSpace& space, const RatVector& v) const;
  double evaluate(const QuadSpace& space, const Eigen::VectorXd& v) const;

 private:
  std::vector<RatVector> walls_;
  std::map<WallMask, Rational> terms_;
};

struct NonNegativity {
  bool non_negative = false;
  /// A point of the cone with q < 0, when one was found.
  std::optional<RatVector> witness;
  /// Extreme rays of the cone modulo its lineality space W^perp.
  std::vector<RatVector> rays;
};

struct ValidationReport {
  bool nondegenerate = false;
  bool non_negative = false;
  bool semidefinite_spans = false;
  bool rational_edges = false;
  std::vector<std::string> failures;
  std::optional<RatVector> interior_point;
  std::optional<RatVector> negative_witness;

  bool ok() const { return nondegenerate && non_negative && semidefinite_spans && rational_edges; }
};

class Cone {
 public:
  /// Throws InvalidWallSet on zero walls, repeated directions, wrong wall
  /// counts for the kind, or an invalid pairing.
  Cone(QuadSpace space, WallSet walls);

  const QuadSpace& space() const noexcept { return space_; }
  const WallSet& wall_set() const noexcept { return walls_; }
  const std::vector<RatVector>& walls() const noexcept { return walls_.walls; }
  ConeKind kind() const noexcept { return walls_.kind; }
  int d_minus() const noexcept { return space_.signature().minus; }

  std::vector<Edge> edges() const;
  /// Edges whose orthogonal complement meets the isotropic cone. Throws
  /// ConeNotNonNegative when the cone contains negative vectors.
  std::vector<Edge> isotropic_locus() const;

  /// A point with <v, w> >= 1 for every wall; nullopt iff C(W) has empty
  /// interior.
  std::optional<RatVector> interior_point() const;
  NonNegativity non_negativity() const;
  bool is_non_negative() const { return non_negativity().non_negative; }

  ValidationReport validate(const Lattice& lattice) const;

  SignPolynomial face_indicator() const;

  std::vector<int> wall_signs(const RatVector& v) const;
  std::vector<int> wall_signs(const Eigen::VectorXd& v) const;
  Membership membership(const RatVector& v) const;
  Membership membership(const Eigen::VectorXd& v) const;

 private:
  QuadSpace space_;
  WallSet walls_;
  std::vector<RatVector> functionals_;
  std::vector<Eigen::VectorXd> functionals_d_;
};

/// Multilinear lift of the indicator of the all-equal sign patterns; value 1
/// on C(W) and (-1)^{#W+1} on -C(W). Terms have |E| <= d^-.
SignPolynomial face_indicator_tetrahedral(const Cone& cone);
/// 2^{-d^-} prod over pairs (s_w + s_w').
SignPolynomial face_indicator_cubical(const Cone& cone);

/// Exact copositivity of a symmetric matrix (x^T a x >= 0 for x >= 0). On
/// failure returns a nonnegative x with x^T a x < 0.
struct Copositivity {
  bool copositive = false;
  std::optional<RatVector> witness;
};
Copositivity copositivity(const RatMatrix& a);

/// A solution of a_i . x >= b_i for all i, or nullopt if infeasible.
struct Inequality {
  RatVector a;
  Rational b;
};
std::optional<RatVector> solve_inequalities(const std::vector<Inequality>& system, std::size_t vars);

}  // namespace indeftheta
