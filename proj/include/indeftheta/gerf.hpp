#pragma once

// Smoothed signs (generalized error functions) and smoothed sector volumes.
//
// For a frame E = {w_1..w_k} with negative semidefinite Gram matrix M and a
// point v, the pairings X_i = <v', w_i> of v' ~ exp(4 pi q(v' - v)) on span E
// are Gaussian with mean m_i = <v, w_i> and covariance -M / (4 pi).  Then
//   sgn_hat_E(v) = E[prod sgn X_i],
//   vol_hat_E(v) = P[sgn X_i != sgn m_i for all i].
// A semidefinite span gives a degenerate Gaussian (the limit of definite
// frames); walls with q(w) = 0 then carry a deterministic sign.

#include "indeftheta/cone.hpp"
#include "indeftheta/orthant.hpp"

#include <functional>
#include <vector>

namespace indeftheta {

enum class SemidefiniteRule {
  /// Degenerate Gaussian; continuous limit of negative definite frames.
  Limit,
  /// sgn_hat_{E^-}(pi(v)) sgn_{E^0}(v) with pi the quotient by the radical;
  /// the pairings of v on E^- are first projected onto the range of M.
  Quotient,
};

struct QuadratureConfig {
  double abs_tol = 1e-10;
  int max_depth = 15;
  SemidefiniteRule semidefinite = SemidefiniteRule::Limit;
};

class SignFrame {
 public:
  /// Throws SpanNotNegativeSemidefinite, or UnsupportedDimension for k > 4.
  SignFrame(const QuadSpace& space, std::vector<RatVector> vectors);

  std::size_t size() const noexcept { return vectors_.size(); }
  const std::vector<RatVector>& vectors() const noexcept { return vectors_; }
  const RatMatrix& gram() const noexcept { return gram_; }
  bool definite() const noexcept { return definite_; }
  /// Walls with q(w) = 0 (they lie in the radical of span E).
  WallMask isotropic_walls() const noexcept { return isotropic_; }
  /// Covariance factor: X = m + factor() z with z standard normal.
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  /// Exact rank of the Gram matrix of every subset of the frame.
  std::size_t subset_rank(WallMask mask) const { return ranks_.at(mask); }

  /// m_i = <v, w_i>.
  Eigen::VectorXd pairings(const Eigen::VectorXd& v) const;

 private:
  std::vector<RatVector> vectors_;
  RatMatrix gram_;
  bool definite_ = true;
  WallMask isotropic_ = 0;
  Eigen::MatrixXd functionals_;
  Eigen::MatrixXd factor_;
  std::vector<std::size_t> ranks_;
};

/// sgn with 0 mapped to +1: the one-sided convention used inside the
/// decomposition so that it stays valid on walls.
std::vector<int> effective_signs(const Eigen::VectorXd& m);

/// Exact sgn_E(v) = prod sgn <v, w>, with sgn(0) = 0.
int sgn_E(const QuadSpace& space, const std::vector<RatVector>& frame, const RatVector& v);
int sgn_E(const QuadSpace& space, const std::vector<RatVector>& frame, const Eigen::VectorXd& v);

/// vol_hat of the sub-frame `mask` from pairings m. On a wall (m_i = 0) the
/// opposite side is taken to be m_i < 0, giving 1/2 in one dimension.
double vol_hat_pairings(const SignFrame& frame, WallMask mask, const Eigen::VectorXd& m,
                        const QuadratureConfig& cfg);
double vol_hat(const SignFrame& frame, const Eigen::VectorXd& v, const QuadratureConfig& cfg = {});

/// sgn_hat via sgn_E(v) * sum_{E' in E} (-2)^{|E'|} vol_hat_{E'}(v).
double sgn_hat(const SignFrame& frame, const Eigen::VectorXd& v, const QuadratureConfig& cfg = {});

/// a_0(m) = (-1)^m, a_n(m) = a_{n-1}(m) - binom(m, n-1) a_{n-1}(n-1).
Integer a_coeff(int n, int m);

/// sgn_hat_C^+ = sum_E a_E sgn_hat_E for a sign polynomial, evaluated in the
/// regrouped form sum_{E'} (-2)^{|E'|} vol_hat_{E'} sum_{E >= E'} a_E sgn_E.
/// The O(1) part (`base`) is exact; `tail` carries only smoothing terms.
class SmoothedSign {
 public:
  struct Value {
    double base = 0;
    double tail = 0;
    double value() const { return base + tail; }
  };

  SmoothedSign(const QuadSpace& space, SignPolynomial polynomial, QuadratureConfig cfg = {});

  const SignPolynomial& polynomial() const noexcept { return polynomial_; }
  const QuadSpace& space() const noexcept { return space_; }
  const QuadratureConfig& config() const noexcept { return cfg_; }

  /// From the wall pairings <v, w_i> of all walls of the polynomial.
  Value evaluate_pairings(const Eigen::VectorXd& pairings) const;
  Value evaluate(const Eigen::VectorXd& v) const;
  double operator()(const Eigen::VectorXd& v) const { return evaluate(v).value(); }
  /// The single term sgn_hat_E for a key of the polynomial.
  double term(WallMask e, const Eigen::VectorXd& v) const;
  /// Unsmoothed sgn_C^+ with sgn(0) = 0.
  double sgn(const Eigen::VectorXd& v) const;

  /// Log of an upper bound on |tail| from the wall pairings: each sign
  /// pattern probability is at most exp(-d^2/2)/2, d the distance of the
  /// pattern's polyhedron from the mean.
  double log_tail_bound(const Eigen::VectorXd& pairings) const;
  /// Cheaper, looser bound of the same kind, using for each pattern only the
  /// most violated single constraint. Always >= log_tail_bound.
  double quick_log_tail_bound(const Eigen::VectorXd& pairings) const;
  /// sum_E |a_E|.
  double coefficient_norm() const noexcept { return coeff_norm_; }
  /// Walls whose sign enters deterministically (isotropic walls); the
  /// function is discontinuous across them.
  WallMask discontinuous_walls() const noexcept { return discontinuous_; }
  const Eigen::MatrixXd& wall_functionals() const noexcept { return functionals_; }

 private:
  // P_E[exactly the walls in `flips` change sign] for a term E, with its
  // coefficient in the tail.
  struct Pattern {
    WallMask term = 0;
    WallMask flips = 0;
    double k = 0;
    double log_bound = 0;
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
  };
  WallMask zero_walls(const Eigen::VectorXd& pairings) const;
  double coefficient_sum(WallMask sub, const std::vector<int>& sig, WallMask zero) const;
  std::vector<Pattern> plan(const Eigen::VectorXd& pairings, const std::vector<int>& sig, WallMask zero,
                            bool quick = false) const;
  double planned_log_bound(const Eigen::VectorXd& pairings, bool quick) const;
  // Exact candidate coefficient vectors over (term, flips) patterns for one
  // sign pattern of the walls: the vertices of the l1 problem.
  struct Split {
    std::vector<std::pair<WallMask, WallMask>> patterns;
    std::vector<std::vector<double>> candidates;
  };
  void build_splits();
  std::vector<Split> splits_;  // indexed by the mask of walls with sign -1; empty when unavailable
  double quotient_log_tail_bound(const Eigen::VectorXd& pairings) const;

  QuadSpace space_;
  SignPolynomial polynomial_;
  QuadratureConfig cfg_;
  std::vector<WallMask> subsets_;
  std::vector<SignFrame> frames_;
  std::vector<std::vector<std::size_t>> frame_walls_;
  std::map<WallMask, SignFrame> term_frames_;
  std::vector<std::pair<WallMask, double>> coeffs_;
  Eigen::MatrixXd functionals_;
  std::vector<double> sigma_;
  double coeff_norm_ = 0;
  WallMask discontinuous_ = 0;
};

double sgn_hat_cone(const SignPolynomial& p, const QuadSpace& space, const Eigen::VectorXd& v,
                    const QuadratureConfig& cfg = {});

/// (4 pi E - Delta) f at v, with E = <v, d/dv> and Delta = sum (G^{-1})_{ij}
/// d_i d_j, by 4th-order central differences in the coordinates of v.
double vigneras_residual(const std::function<double(const Eigen::VectorXd&)>& f, const QuadSpace& space,
                         const Eigen::VectorXd& v, double h);
/// Same for sgn_hat_C^+; throws TooCloseToWall when the stencil crosses a
/// wall whose sign enters deterministically.
double vigneras_residual(const SmoothedSign& f, const Eigen::VectorXd& v, double h = 1e-3);

/// Tabulation of the degeneration bounds along E(t) = E u {w(t)}.
struct DegenerationRow {
  double t = 0;
  double vol = 0;
  double vol_bound = 0;
  double sgn_difference = 0;
  double sgn_bound = 0;
};
struct DegenerationReport {
  std::vector<DegenerationRow> rows;
  /// False when v is orthogonal to w(0): the bounds are then vacuous.
  bool decay_expected = true;
  /// vol / vol_bound and difference / sgn_bound stay within a factor 100 of
  /// their values at the largest t.
  bool bounded = true;
  double max_vol_ratio = 0;
  double max_sgn_ratio = 0;
};
/// w(t) = w0 + t w1 over the given (positive, rational) grid; E(0) uses w0.
/// Throws FamilyNotNegative unless every E(t) on the grid is independent
/// with negative definite span.
DegenerationReport degeneration_check(const QuadSpace& space, const std::vector<RatVector>& fixed,
                                      const RatVector& w0, const RatVector& w1, const std::vector<Rational>& t_grid,
                                      const Eigen::VectorXd& v, const QuadratureConfig& cfg = {});

}  // namespace indeftheta
