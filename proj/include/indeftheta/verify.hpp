#pragma once

// Numerical checks of the Jacobi transformation laws, the Vigneras equation
// and the explicit running example.

#include "indeftheta/theta.hpp"
#include "indeftheta/weil.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace indeftheta {

struct CheckReport {
  std::string name;
  double max_abs_error = 0;
  double tolerance = 0;
  bool passed = false;
  /// One entry per compared component (or sample).
  std::vector<double> errors;
  std::string details;
};

/// tolerance = max(floor, tail_factor * (tail of lhs + tail of rhs)).
struct CheckOptions {
  double floor = 1e-6;
  double tail_factor = 10;
};

CheckReport make_report(std::string name, std::vector<double> errors, double tolerance, std::string details = {});

/// theta_hat(tau + n, z) against rho_T^n theta_hat(tau, z). Odd lattices only
/// satisfy this for even n.
CheckReport check_T(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                    const TruncationPolicy& policy = {}, const QuadratureConfig& cfg = {},
                    const CheckOptions& opts = {}, int n = 1);

/// theta_hat(-1/tau, z/tau) against
/// rho_S (sqrt tau)^{2k} e(q(z)/tau) theta_hat(tau, z), k = dim/2, principal
/// branch.
CheckReport check_S(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                    const TruncationPolicy& policy = {}, const QuadratureConfig& cfg = {},
                    const CheckOptions& opts = {});

/// theta_hat(tau, z + lambda tau + mu) against
/// e(-q(lambda) tau - <z, lambda>) theta_hat(tau, z) for lambda, mu in L.
CheckReport check_elliptic(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                           const Eigen::VectorXi& lambda, const Eigen::VectorXi& mu,
                           const TruncationPolicy& policy = {}, const QuadratureConfig& cfg = {},
                           const CheckOptions& opts = {});

/// Kernel residual (4 pi E - Delta) sgn_hat at sqrt(y) (l + v/y) for the
/// `terms` largest terms of the sum at each point; arguments whose stencil
/// touches a deterministic wall are skipped.
CheckReport check_vigneras_theta(const Lattice& lattice, const SignPolynomial& p,
                                 const std::vector<JacobiPoint>& points, double tolerance = 1e-4,
                                 double h = 1e-3, std::size_t terms = 10, const QuadratureConfig& cfg = {});

/// Explicit two-integral expression for sgn_hat^+ of the running example,
/// 1/4 + 1/4 + I_{13}(v) + I_{23}(v), by iterated two-dimensional quadrature;
/// second: the library value sgn_hat_cone at v.
std::pair<double, double> running_example_oracle(const Eigen::VectorXd& v, const QuadratureConfig& cfg = {});

/// running_example_oracle at `samples` uniform points of the box of the given
/// radius.
CheckReport check_running_example(std::size_t samples = 50, double radius = 3, double tolerance = 1e-7,
                                  unsigned seed = 1, const QuadratureConfig& cfg = {});

}  // namespace indeftheta
