#include "indeftheta/weil.hpp"

#include "indeftheta/error.hpp"

#include <cmath>
#include <numbers>

namespace indeftheta {

std::complex<double> unit_phase(const Rational& x) {
  const Rational f = frac(x);
  // Exact quarter turns avoid rounding in the most common phases.
  if (f == 0) return {1, 0};
  if (f == Rational(1, 4)) return {0, 1};
  if (f == Rational(1, 2)) return {-1, 0};
  if (f == Rational(3, 4)) return {0, -1};
  return std::polar(1.0, 2 * std::numbers::pi * to_double(f));
}

WeilRep build_weil(const Lattice& lattice) {
  WeilRep rep;
  rep.disc = discriminant_group(lattice);
  const auto& space = lattice.space();
  const auto n = rep.disc.size();
  rep.q_mod1.resize(n);
  rep.rho_t.resize(n);
  std::complex<double> gauss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.q_mod1[i] = frac(space.quad(rep.disc.reps[i]));
    rep.rho_t(i) = unit_phase(rep.q_mod1[i]);
    gauss += unit_phase(-rep.q_mod1[i]);
  }
  const double root = std::sqrt(static_cast<double>(n));
  rep.sigma = gauss / root;
  rep.rho_s.resize(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const auto e = rep.sigma / root * unit_phase(-space.bilinear(rep.disc.reps[i], rep.disc.reps[j]));
      rep.rho_s(i, j) = e;
      rep.rho_s(j, i) = e;
    }
  return rep;
}

Eigen::VectorXcd apply(const WeilRep& rep, Generator gen, const Eigen::VectorXcd& vec) {
  if (static_cast<std::size_t>(vec.size()) != rep.size())
    throw Error(ErrorCode::DimensionMismatch, "vector length " + std::to_string(vec.size()) +
                                                  " for a representation of size " + std::to_string(rep.size()));
  switch (gen) {
    case Generator::T:
      return rep.rho_t.cwiseProduct(vec);
    case Generator::TInv:
      return rep.rho_t.conjugate().cwiseProduct(vec);
    case Generator::S:
      return rep.rho_s * vec;
    case Generator::SInv:
      return rep.rho_s.adjoint() * vec;
  }
  return vec;
}

}  // namespace indeftheta
