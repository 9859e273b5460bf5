#pragma once

#include "indeftheta/quadspace.hpp"

#include <Eigen/Dense>

#include <complex>

namespace indeftheta {

/// exp(2 pi i x), with x reduced modulo 1 exactly first.
std::complex<double> unit_phase(const Rational& x);

/// The Weil representation of a lattice on C[L^dual / L], indexed by the
/// representatives of `disc`.
struct WeilRep {
  DiscriminantGroup disc;
  /// q(l) mod 1 per coset.
  RatVector q_mod1;
  Eigen::VectorXcd rho_t;  // diagonal
  Eigen::MatrixXcd rho_s;
  std::complex<double> sigma;

  std::size_t size() const noexcept { return disc.size(); }
};

WeilRep build_weil(const Lattice& lattice);

enum class Generator { T, S, TInv, SInv };

/// Throws DimensionMismatch when vec has the wrong length.
Eigen::VectorXcd apply(const WeilRep& rep, Generator gen, const Eigen::VectorXcd& vec);

}  // namespace indeftheta
