#pragma once

// Vector-valued theta series over L^dual / L:
//   theta_mu(tau, z) = sum_{l in mu + L} h(l + v/y) e(q(l) tau + <z, l>)
// for the cone indicator, a sign polynomial, or its smoothed completion.

#include "indeftheta/cone.hpp"
#include "indeftheta/gerf.hpp"

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace indeftheta {

struct JacobiPoint {
  std::complex<double> tau;
  Eigen::VectorXcd z;

  /// Throws OutOfRange unless Im tau > 0.
  JacobiPoint(std::complex<double> tau, Eigen::VectorXcd z);

  double y() const { return tau.imag(); }
  Eigen::VectorXd u() const { return z.real(); }
  Eigen::VectorXd v() const { return z.imag(); }
};

struct TruncationPolicy {
  double term_tol = 1e-9;
  int initial_radius = 8;
  int max_radius = 64;
  bool doubling = true;
};

struct ThetaValue {
  /// One entry per coset representative, in DiscriminantGroup order.
  Eigen::VectorXcd components;
  std::size_t terms_used = 0;
  double tail_estimate = 0;
  int radius = 0;
  /// 0 < singular_set_distance < 0.01.
  bool near_singular = false;
  std::vector<std::string> warnings;
};

inline constexpr double kUnconstrained = std::numeric_limits<double>::infinity();

/// Distance of <v/y, g> to Z + <L^dual, g>, minimised over generators g of
/// L^dual meet the rational radical of every isotropic edge; kUnconstrained
/// when no edge imposes a condition. Throws NonRationalEdge.
double singular_set_distance(const Lattice& lattice, const Cone& cone, const JacobiPoint& pt);
/// Same, with the radicals of the spans of the polynomial's terms.
double singular_set_distance(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt);

struct SingularConstraint {
  double distance = kUnconstrained;
  /// Generator g of L^dual meet the radical attaining the distance.
  RatVector generator;
};
/// The constraint behind singular_set_distance(lattice, p, pt).
SingularConstraint nearest_singular_constraint(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt);

/// Points with l + v/y in C(W) (weight 1) or -C(W) (weight of the face
/// indicator there), boundaries included.
ThetaValue theta_cone(const Lattice& lattice, const Cone& cone, const JacobiPoint& pt,
                      const TruncationPolicy& policy = {});
ThetaValue theta_sign(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                      const TruncationPolicy& policy = {});
/// Weights sgn_hat_C^+(sqrt(y) (l + v/y)).
ThetaValue theta_hat(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                     const TruncationPolicy& policy = {}, const QuadratureConfig& cfg = {});

/// Worker count from INDEFTHETA_THREADS (default: hardware concurrency).
unsigned theta_threads();

}  // namespace indeftheta
