#pragma once

// Gaussian probabilities of polyhedra, the numerical core of the smoothed
// sign functions.

#include <Eigen/Dense>

namespace indeftheta {

struct QuadratureConfig;

/// Standard normal CDF, accurate in relative terms in the lower tail.
double normal_cdf(double x);
/// P[X < h, Y < k] for standard normals with correlation rho, |rho| < 1.
double bivariate_normal_cdf(double h, double k, double rho, const QuadratureConfig& cfg);
/// P[a z < b] for z ~ N(0, I_r) with a of size k x r. Rows of a that vanish
/// are deterministic constraints 0 < b_i. Zero rows are detected exactly, so
/// callers should pass exact zeros for them.
double gaussian_polyhedron_probability(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       const QuadratureConfig& cfg);
/// log of an upper bound on the same probability: log(1/2) - d^2/2 with d the
/// distance from 0 to the polyhedron (a supporting half-space contains it),
/// 0 when it contains 0, -inf when a deterministic row is violated.
double gaussian_polyhedron_log_bound(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

}  // namespace indeftheta
