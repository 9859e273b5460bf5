#include "indeftheta/theta.hpp"

#include "indeftheta/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <thread>

namespace indeftheta {

namespace {

constexpr double kPi = std::numbers::pi;
// Terms below term_tol * e^-28 are not evaluated; their bounds go into the
// tail estimate.
constexpr double kCutMargin = 28;
constexpr double kOnSet = 1e-12;
constexpr double kNearSet = 0.01;
constexpr double kLogOverflow = 700;

using Int = long long;
using Wide = __int128;

Int to_int(const Rational& x) {
  if (denominator(x) != 1) throw Error(ErrorCode::NotIntegral, "expected an integer, got " + to_string(x));
  return static_cast<Int>(numerator(x));
}

Integer lcm_denominators(const std::vector<RatVector>& vs) {
  Integer l = 1;
  for (const auto& v : vs)
    for (const auto& x : v) l = boost::multiprecision::lcm(l, Integer(denominator(x)));
  return l;
}

struct Neumaier {
  double sum = 0;
  double comp = 0;
  void add(double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct ComplexSum {
  Neumaier re, im;
  void add(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
  }
  std::complex<double> value() const { return {re.value(), im.value()}; }
};

/// Weight of a term from its wall pairings <l + v/y, w_i>. The engine passes
/// log_growth = log |e(q(l) tau + <z, l>)| and the log cut-off; a weight
/// function may decline to evaluate (returning 0) after adding a bound for
/// the skipped term to `pruned`.
using WeightFn = std::function<double(const Eigen::VectorXd& pairings, double log_growth, double log_cut, double& pruned)>;

struct ChunkResult {
  ComplexSum sum;
  double outer_abs = 0;
  double pruned = 0;
  std::size_t terms = 0;
  bool overflow = false;
};

class Engine {
 public:
  Engine(const Lattice& lattice, const JacobiPoint& pt, const std::vector<RatVector>& walls, WeightFn weight)
      : pt_(pt), weight_(std::move(weight)) {
    const auto& space = lattice.space();
    n_ = lattice.dim();
    if (static_cast<std::size_t>(pt.z.size()) != n_)
      throw Error(ErrorCode::DimensionMismatch, "z has dimension " + std::to_string(pt.z.size()) + ", lattice " +
                                                    std::to_string(n_));
    disc_ = discriminant_group(lattice);
    den_ = static_cast<Int>(lcm_denominators(disc_.reps));
    gram_.resize(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) gram_(i, j) = to_int(space.gram()(i, j));
    y_ = pt.y();
    x_ = pt.tau.real();
    u_ = pt.u();
    v_ = pt.v();
    shift_ = v_ / y_;
    functionals_.resize(walls.size(), n_);
    for (std::size_t i = 0; i < walls.size(); ++i)
      functionals_.row(i) = to_eigen(space.functional(walls[i])).transpose();
    shift_pairings_ = functionals_ * shift_;
    for (const auto& rep : disc_.reps) {
      std::vector<Int> scaled(n_);
      for (std::size_t i = 0; i < n_; ++i) scaled[i] = to_int(rep[i] * Rational(den_));
      reps_scaled_.push_back(std::move(scaled));
      reps_.push_back(to_eigen(rep));
    }
  }

  ThetaValue run(const TruncationPolicy& policy) {
    if (!(policy.term_tol > 0) || policy.initial_radius <= 0 || policy.max_radius <= 0)
      throw Error(ErrorCode::OutOfRange, "truncation policy needs term_tol > 0 and positive radii");
    log_cut_ = std::log(policy.term_tol) - kCutMargin;
    ThetaValue out;
    const auto k = disc_.size();
    std::vector<ComplexSum> total(k);
    double pruned = 0;
    int inner = 0;
    int radius = std::min(policy.initial_radius, policy.max_radius);
    while (true) {
      std::vector<ChunkResult> shell_result;
      const auto chunks = shell(inner, radius, shell_result);
      Eigen::VectorXcd shell_sum = Eigen::VectorXcd::Zero(k);
      double outer_abs = 0;
      for (std::size_t c = 0; c < chunks.size(); ++c) {
        const auto& r = shell_result[c];
        if (r.overflow)
          throw Error(ErrorCode::TruncationNotConverged,
                      "term magnitude overflows at radius " + std::to_string(radius) + "; the series diverges here");
        total[chunks[c].coset].add(r.sum.value());
        shell_sum(chunks[c].coset) += r.sum.value();
        outer_abs += r.outer_abs;
        pruned += r.pruned;
        out.terms_used += r.terms;
      }
      out.components.resize(k);
      for (std::size_t i = 0; i < k; ++i) out.components(i) = total[i].value();
      out.radius = radius;
      if (!policy.doubling) {
        out.tail_estimate = outer_abs + pruned;
        return out;
      }
      if (inner > 0) {
        const double change = shell_sum.cwiseAbs().maxCoeff();
        const double scale = std::max(1.0, out.components.cwiseAbs().maxCoeff());
        if (change <= policy.term_tol * scale) {
          out.tail_estimate = change + pruned;
          return out;
        }
        if (radius >= policy.max_radius)
          throw Error(ErrorCode::TruncationNotConverged,
                      "radius " + std::to_string(radius) + " reached with last shell contributing " +
                          std::to_string(change));
      }
      inner = radius;
      radius = std::min(2 * radius, policy.max_radius);
      if (radius == inner)
        throw Error(ErrorCode::TruncationNotConverged, "max_radius leaves no room for a doubling step");
    }
  }

 private:
  struct Chunk {
    std::size_t coset;
    Int first;
  };

  // Integer range of n_i with |mu_i + n_i + shift_i| <= r.
  std::pair<Int, Int> range(std::size_t coset, std::size_t i, int r) const {
    const double c = reps_[coset](i) + shift_(i);
    return {static_cast<Int>(std::ceil(-r - c)), static_cast<Int>(std::floor(r - c))};
  }

  std::vector<Chunk> shell(int inner, int radius, std::vector<ChunkResult>& results) {
    std::vector<Chunk> chunks;
    for (std::size_t c = 0; c < disc_.size(); ++c) {
      const auto [lo, hi] = range(c, 0, radius);
      for (Int a = lo; a <= hi; ++a) chunks.push_back({c, a});
    }
    results.assign(chunks.size(), {});
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < chunks.size(); i = next++) results[i] = run_chunk(chunks[i], inner, radius);
    };
    const unsigned workers = std::min<std::size_t>(theta_threads(), chunks.size());
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    return chunks;
  }

  // Next point of the box in lexicographic order, coordinate 0 held fixed.
  static bool advance(std::vector<Int>& n, const std::vector<Int>& lo, const std::vector<Int>& hi) {
    for (std::size_t pos = n.size(); pos-- > 1;) {
      if (++n[pos] <= hi[pos]) return true;
      n[pos] = lo[pos];
    }
    return false;
  }

  ChunkResult run_chunk(const Chunk& chunk, int inner, int radius) const {
    ChunkResult res;
    const auto& mu = reps_scaled_[chunk.coset];
    std::vector<Int> lo(n_), hi(n_), n(n_);
    for (std::size_t i = 0; i < n_; ++i) std::tie(lo[i], hi[i]) = range(chunk.coset, i, radius);
    lo[0] = hi[0] = chunk.first;
    for (std::size_t i = 0; i < n_; ++i) {
      if (lo[i] > hi[i]) return res;
      n[i] = lo[i];
    }
    const Wide den2 = Wide(2) * den_ * den_;
    std::vector<Int> scaled(n_);
    Eigen::VectorXd gl(n_), x(n_), ls(n_);
    Eigen::VectorXd pairings(functionals_.rows());
    const double lower_outer = radius - 1;
    while (true) {
      double sup = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        scaled[i] = mu[i] + den_ * n[i];
        ls(i) = static_cast<double>(scaled[i]) / den_;
        x(i) = ls(i) + shift_(i);
        sup = std::max(sup, std::abs(x(i)));
      }
      if (sup > inner || inner == 0) {
        // den^2 <l, l> and den G l, exactly.
        Wide quad = 0;
        for (std::size_t i = 0; i < n_; ++i) {
          Wide row = 0;
          for (std::size_t j = 0; j < n_; ++j) row += Wide(gram_(i, j)) * scaled[j];
          gl(i) = static_cast<double>(row) / den_;
          quad += row * scaled[i];
        }
        // q(l) = quad / (2 den^2) = whole + part.
        Wide whole = quad / den2;
        Wide rest = quad - whole * den2;
        if (rest < 0) {
          rest += den2;
          whole -= 1;
        }
        const double q_whole = static_cast<double>(whole);
        const double q_part = static_cast<double>(rest) / static_cast<double>(den2);
        const double q = q_whole + q_part;
        double turn = q_whole * x_;
        turn -= std::floor(turn);
        turn += q_part * x_ + u_.dot(gl);
        const double log_growth = -2 * kPi * (y_ * q + v_.dot(gl));

        pairings = functionals_ * ls + shift_pairings_;
        double pruned = 0;
        const double w = weight_(pairings, log_growth, log_cut_, pruned);
        res.pruned += pruned;
        if (w != 0) {
          const double log_mag = std::log(std::abs(w)) + log_growth;
          if (log_mag > kLogOverflow) {
            res.overflow = true;
            return res;
          }
          if (log_mag < log_cut_) {
            res.pruned += std::exp(log_mag);
          } else {
            const double mag = std::copysign(std::exp(log_mag), w);
            turn -= std::floor(turn);
            const std::complex<double> term = mag * std::polar(1.0, 2 * kPi * turn);
            res.sum.add(term);
            ++res.terms;
            if (sup > lower_outer) res.outer_abs += std::abs(mag);
          }
        }
      }
      if (!advance(n, lo, hi)) break;
    }
    return res;
  }

  JacobiPoint pt_;
  WeightFn weight_;
  std::size_t n_ = 0;
  DiscriminantGroup disc_;
  Int den_ = 1;
  Eigen::Matrix<Int, Eigen::Dynamic, Eigen::Dynamic> gram_;
  double y_ = 1, x_ = 0;
  Eigen::VectorXd u_, v_, shift_;
  Eigen::MatrixXd functionals_;
  Eigen::VectorXd shift_pairings_;
  std::vector<std::vector<Int>> reps_scaled_;
  std::vector<Eigen::VectorXd> reps_;
  double log_cut_ = 0;
};

// Lattice basis of L^dual meet span(radical): with B = G R, the coefficient
// vectors a with B a integral.
std::vector<RatVector> dual_generators(const QuadSpace& space, const std::vector<RatVector>& radical) {
  const std::size_t r = radical.size();
  const std::size_t n = space.dim();
  RatMatrix b(n, r);
  for (std::size_t j = 0; j < r; ++j) {
    const RatVector f = space.functional(radical[j]);
    for (std::size_t i = 0; i < n; ++i) b(i, j) = f[i];
  }
  Integer s = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) s = boost::multiprecision::lcm(s, Integer(denominator(b(i, j))));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j) b(i, j) *= Rational(s);
  const SmithForm snf = smith_normal_form(b);
  std::vector<RatVector> out;
  for (std::size_t i = 0; i < r; ++i) {
    const Rational d = snf.d(i, i);
    if (d == 0) continue;
    const Rational c = Rational(s) / abs(d);
    RatVector g(n);
    for (std::size_t j = 0; j < r; ++j) g = g + Rational(c * snf.v(j, i)) * radical[j];
    out.push_back(std::move(g));
  }
  return out;
}

SingularConstraint constraint_for(const QuadSpace& space, const std::vector<RatVector>& radical,
                                  const JacobiPoint& pt) {
  SingularConstraint best;
  const Eigen::VectorXd shift = pt.v() / pt.y();
  for (const auto& g : dual_generators(space, radical)) {
    // <L^dual, g> = content(g) Z, so Z + <L^dual, g> = (1/q) Z for content p/q.
    Integer num = 0, den = 1;
    for (const auto& x : g) {
      num = boost::multiprecision::gcd(num, Integer(numerator(x)));
      den = boost::multiprecision::lcm(den, Integer(denominator(x)));
    }
    const double step = 1.0 / to_double(Rational(den / boost::multiprecision::gcd(num, den)));
    const double t = shift.dot(to_eigen(space.functional(g)));
    const double d = std::abs(t - step * std::round(t / step));
    if (d < best.distance) best = {d, g};
  }
  return best;
}

std::vector<RatVector> radical_of(const QuadSpace& space, const std::vector<RatVector>& family) {
  std::vector<RatVector> out;
  for (const auto& c : nullspace(space.gram_of(family))) {
    RatVector r(space.dim());
    for (std::size_t j = 0; j < family.size(); ++j) r = r + c[j] * family[j];
    if (is_zero(r)) continue;
    auto trial = out;
    trial.push_back(r);
    if (rank(RatMatrix::from_rows(trial)) == trial.size()) out = std::move(trial);
  }
  return out;
}

std::string vector_text(const RatVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + to_string(v[i]);
  return s + ")";
}

void check_point(const SingularConstraint& c, ThetaValue& out) {
  const double distance = c.distance;
  if (distance <= kOnSet)
    throw Error(ErrorCode::OnSingularSet, "the point lies on the singular set: <v/y, g> is in Z + <L^dual, g> for the edge generator g = " +
                                              vector_text(c.generator));
  if (distance < kNearSet) {
    out.near_singular = true;
    out.warnings.push_back("distance " + std::to_string(distance) +
                           " to the singular set; convergence may be slow");
  }
}

void check_space(const Lattice& lattice, const QuadSpace& space) {
  if (!(lattice.space().gram() == space.gram()))
    throw Error(ErrorCode::DimensionMismatch, "the sign data live in a different quadratic space");
}

std::vector<int> pattern_signs(std::size_t index, std::size_t k, int base) {
  std::vector<int> s(k);
  for (std::size_t i = 0; i < k; ++i) {
    const int digit = static_cast<int>(index % base);
    index /= base;
    s[i] = base == 3 ? digit - 1 : (digit == 0 ? 1 : -1);
  }
  return s;
}

std::size_t pattern_index(const Eigen::VectorXd& p, int base) {
  std::size_t idx = 0;
  for (Eigen::Index i = p.size() - 1; i >= 0; --i) {
    const int digit = base == 3 ? (p(i) > 0 ? 2 : (p(i) < 0 ? 0 : 1)) : (p(i) < 0 ? 1 : 0);
    idx = idx * base + digit;
  }
  return idx;
}

std::size_t power(int base, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < k; ++i) r *= base;
  return r;
}

}  // namespace

JacobiPoint::JacobiPoint(std::complex<double> t, Eigen::VectorXcd zz) : tau(t), z(std::move(zz)) {
  if (!(tau.imag() > 0)) throw Error(ErrorCode::OutOfRange, "Im tau must be positive");
}

unsigned theta_threads() {
  if (const char* env = std::getenv("INDEFTHETA_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

SingularConstraint cone_constraint(const Lattice& lattice, const Cone& cone, const JacobiPoint& pt) {
  check_space(lattice, cone.space());
  SingularConstraint best;
  for (const auto& e : cone.edges()) {
    if (!e.isotropic) continue;
    if (!e.rational) throw Error(ErrorCode::NonRationalEdge, "isotropic edge with wall mask " + std::to_string(e.walls));
    if (e.radical.empty()) continue;
    auto c = constraint_for(cone.space(), e.radical, pt);
    if (c.distance < best.distance) best = std::move(c);
  }
  return best;
}

}  // namespace

double singular_set_distance(const Lattice& lattice, const Cone& cone, const JacobiPoint& pt) {
  return cone_constraint(lattice, cone, pt).distance;
}

SingularConstraint nearest_singular_constraint(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt) {
  const auto& space = lattice.space();
  SingularConstraint best;
  for (const auto& [mask, coeff] : p.terms()) {
    if (mask == 0 || coeff == 0) continue;
    const auto radical = radical_of(space, p.subset(mask));
    if (radical.empty()) continue;
    auto c = constraint_for(space, radical, pt);
    if (c.distance < best.distance) best = std::move(c);
  }
  return best;
}

double singular_set_distance(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt) {
  return nearest_singular_constraint(lattice, p, pt).distance;
}

ThetaValue theta_cone(const Lattice& lattice, const Cone& cone, const JacobiPoint& pt, const TruncationPolicy& policy) {
  ThetaValue pre;
  check_point(cone_constraint(lattice, cone, pt), pre);
  const auto k = cone.walls().size();
  const double opposite = to_double(cone.face_indicator().evaluate(std::vector<int>(k, -1)));
  Engine engine(lattice, pt, cone.walls(), [opposite](const Eigen::VectorXd& p, double, double, double&) {
    if ((p.array() >= 0).all()) return 1.0;
    if ((p.array() <= 0).all()) return opposite;
    return 0.0;
  });
  auto out = engine.run(policy);
  out.near_singular = pre.near_singular;
  out.warnings = pre.warnings;
  return out;
}

ThetaValue theta_sign(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                      const TruncationPolicy& policy) {
  ThetaValue pre;
  check_point(nearest_singular_constraint(lattice, p, pt), pre);
  const auto k = p.walls().size();
  std::vector<double> table(power(3, k));
  for (std::size_t i = 0; i < table.size(); ++i) table[i] = to_double(p.evaluate(pattern_signs(i, k, 3)));
  Engine engine(lattice, pt, p.walls(), [&table](const Eigen::VectorXd& pr, double, double, double&) {
    return table[pattern_index(pr, 3)];
  });
  auto out = engine.run(policy);
  out.near_singular = pre.near_singular;
  out.warnings = pre.warnings;
  return out;
}

ThetaValue theta_hat(const Lattice& lattice, const SignPolynomial& p, const JacobiPoint& pt,
                     const TruncationPolicy& policy, const QuadratureConfig& cfg) {
  ThetaValue pre;
  check_point(nearest_singular_constraint(lattice, p, pt), pre);
  const SmoothedSign smoothed(lattice.space(), p, cfg);
  const auto k = p.walls().size();
  // The exact O(1) part depends only on the one-sided sign pattern.
  std::vector<double> base(power(2, k));
  for (std::size_t i = 0; i < base.size(); ++i) base[i] = to_double(p.evaluate(pattern_signs(i, k, 2)));
  const double root_y = std::sqrt(pt.y());
  const double log_norm = std::log(smoothed.coefficient_norm());
  Engine engine(lattice, pt, p.walls(),
                [&](const Eigen::VectorXd& pr, double log_growth, double log_cut, double& pruned) {
                  // |sgn_hat_C^+| <= sum |a_E| settles the decaying terms.
                  if (log_norm + log_growth < log_cut) {
                    pruned += std::exp(log_norm + log_growth);
                    return 0.0;
                  }
                  const Eigen::VectorXd scaled = root_y * pr;
                  const double b = std::abs(base[pattern_index(scaled, 2)]);
                  const double log_base = b > 0 ? std::log(b) : -INFINITY;
                  auto combine = [&](double log_tail) {
                    const double hi = std::max(log_base, log_tail);
                    const double lo = std::min(log_base, log_tail);
                    return std::isinf(lo) ? hi : hi + std::log1p(std::exp(lo - hi));
                  };
                  double log_bound = combine(smoothed.quick_log_tail_bound(scaled));
                  if (log_bound + log_growth >= log_cut) log_bound = combine(smoothed.log_tail_bound(scaled));
                  if (std::isinf(log_bound)) return 0.0;
                  if (log_bound + log_growth < log_cut) {
                    pruned += std::exp(log_bound + log_growth);
                    return 0.0;
                  }
                  return smoothed.evaluate_pairings(scaled).value();
                });
  auto out = engine.run(policy);
  out.near_singular = pre.near_singular;
  out.warnings = pre.warnings;
  return out;
}

}  // namespace indeftheta
