#include "indeftheta/gerf.hpp"

#include "indeftheta/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace indeftheta {

namespace {

constexpr double kPi = std::numbers::pi;

int sgn(double x) { return (x > 0) - (x < 0); }
int sgn(const Rational& x) { return x.sign(); }

RatMatrix sub_gram(const RatMatrix& g, WallMask mask) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < g.rows(); ++i)
    if (mask >> i & 1u) idx.push_back(i);
  RatMatrix out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = g(idx[i], idx[j]);
  return out;
}

WallMask full_mask(std::size_t k) { return k >= 32 ? ~WallMask{0} : (WallMask{1} << k) - 1; }

// Mean of the pairing vector under the configured semidefinite rule.
Eigen::VectorXd effective_mean(const SignFrame& frame, const Eigen::VectorXd& m, const QuadratureConfig& cfg) {
  if (frame.definite() || cfg.semidefinite == SemidefiniteRule::Limit) return m;
  const auto& f = frame.factor();
  if (f.cols() == 0) {
    Eigen::VectorXd out = m;
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (!(frame.isotropic_walls() >> i & 1u)) out(i) = 0;
    return out;
  }
  // Orthogonal projection onto range(f) = range(M); rows of isotropic walls
  // vanish in f and keep their own pairing.
  Eigen::VectorXd out = f * (f.transpose() * f).ldlt().solve(f.transpose() * m);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (frame.isotropic_walls() >> i & 1u) out(i) = m(i);
  return out;
}

// Probability that every pairing in `mask` lands on the side opposite to
// sigma (strictly).
double opposite_probability(const SignFrame& frame, WallMask mask, const Eigen::VectorXd& mean,
                            const std::vector<int>& sigma, const QuadratureConfig& cfg) {
  const auto& f = frame.factor();
  const int k = popcount(mask);
  if (k == 0) return 1;
  Eigen::MatrixXd a(k, f.cols());
  Eigen::VectorXd b(k);
  int row = 0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (!(mask >> i & 1u)) continue;
    a.row(row) = sigma[i] * f.row(i);
    b(row) = -sigma[i] * mean(i);
    ++row;
  }
  return gaussian_polyhedron_probability(a, b, cfg);
}

// log(1/2) - d^2/2 for the most violated single constraint of {a z < b}.
double half_space_log_bound(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  double d = 0;
  bool boundary = false;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double n = a.row(i).norm();
    if (n == 0) {
      if (!(0 < b(i))) return -std::numeric_limits<double>::infinity();
      continue;
    }
    if (b(i) <= 0) boundary = true;
    if (b(i) < 0) d = std::max(d, -b(i) / n * (1 - 1e-12));
  }
  if (!boundary) return 0;
  return -std::log(2.0) - 0.5 * d * d;
}

bool deterministic_zero(const SignFrame& frame, const Eigen::VectorXd& mean) {
  for (std::size_t i = 0; i < frame.size(); ++i)
    if (frame.factor().row(i).isZero(0) && mean(i) == 0) return true;
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// SignFrame

SignFrame::SignFrame(const QuadSpace& space, std::vector<RatVector> vectors) : vectors_(std::move(vectors)) {
  const std::size_t k = vectors_.size();
  if (k > 4) throw Error(ErrorCode::UnsupportedDimension, "smoothed signs are limited to at most 4 vectors");
  for (const auto& w : vectors_)
    if (w.size() != space.dim()) throw Error(ErrorCode::DimensionMismatch, "frame vector has the wrong dimension");
  gram_ = space.gram_of(vectors_);

  RatMatrix neg(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) neg(i, j) = -gram_(i, j);
  const auto fac = psd_factor(neg);
  if (!fac) throw Error(ErrorCode::SpanNotNegativeSemidefinite, "span of the frame is not negative semidefinite");
  definite_ = fac->rank == k;

  factor_ = Eigen::MatrixXd::Zero(k, fac->rank);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 0; c < fac->rank; ++c)
      factor_(fac->perm[i], c) = to_double(fac->l(i, c)) * std::sqrt(to_double(fac->d[c]) / (4 * kPi));
  for (std::size_t i = 0; i < k; ++i)
    if (gram_(i, i) == 0) {
      isotropic_ |= WallMask{1} << i;
      factor_.row(i).setZero();
    }

  functionals_.resize(k, space.dim());
  for (std::size_t i = 0; i < k; ++i) functionals_.row(i) = to_eigen(space.functional(vectors_[i])).transpose();

  ranks_.resize(std::size_t{1} << k);
  for (WallMask m = 0; m < ranks_.size(); ++m) ranks_[m] = m == 0 ? 0 : rank(sub_gram(gram_, m));
}

Eigen::VectorXd SignFrame::pairings(const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(v.size()) != static_cast<std::size_t>(functionals_.cols()) && size() > 0)
    throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  if (size() == 0) return Eigen::VectorXd(0);
  return functionals_ * v;
}

// ---------------------------------------------------------------------------
// Signs and smoothed signs

std::vector<int> effective_signs(const Eigen::VectorXd& m) {
  std::vector<int> out(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) out[i] = m(i) < 0 ? -1 : 1;
  return out;
}

int sgn_E(const QuadSpace& space, const std::vector<RatVector>& frame, const RatVector& v) {
  int s = 1;
  for (const auto& w : frame) s *= sgn(space.bilinear(v, w));
  return s;
}

int sgn_E(const QuadSpace& space, const std::vector<RatVector>& frame, const Eigen::VectorXd& v) {
  int s = 1;
  for (const auto& w : frame) s *= sgn(space.bilinear(v, to_eigen(w)));
  return s;
}

double vol_hat_pairings(const SignFrame& frame, WallMask mask, const Eigen::VectorXd& m, const QuadratureConfig& cfg) {
  const Eigen::VectorXd mean = effective_mean(frame, m, cfg);
  return opposite_probability(frame, mask, mean, effective_signs(mean), cfg);
}

double vol_hat(const SignFrame& frame, const Eigen::VectorXd& v, const QuadratureConfig& cfg) {
  return vol_hat_pairings(frame, full_mask(frame.size()), frame.pairings(v), cfg);
}

double sgn_hat(const SignFrame& frame, const Eigen::VectorXd& v, const QuadratureConfig& cfg) {
  const Eigen::VectorXd mean = effective_mean(frame, frame.pairings(v), cfg);
  if (deterministic_zero(frame, mean)) return 0;
  const auto sigma = effective_signs(mean);
  int sign = 1;
  for (int s : sigma) sign *= s;
  const WallMask full = full_mask(frame.size());
  double total = 1;
  for (WallMask sub = 1; sub <= full; ++sub) {
    const double p = opposite_probability(frame, sub, mean, sigma, cfg);
    total += std::ldexp(popcount(sub) % 2 ? -p : p, popcount(sub));
  }
  return sign * total;
}

Integer a_coeff(int n, int m) {
  if (n < 0 || m < 0) throw Error(ErrorCode::OutOfRange, "a_coeff needs n, m >= 0");
  auto binom = [](int top, int k) {
    Integer r = 1;
    for (int i = 0; i < k; ++i) r = r * (top - i) / (i + 1);
    return r;
  };
  if (n == 0) return m % 2 ? Integer(-1) : Integer(1);
  return a_coeff(n - 1, m) - binom(m, n - 1) * a_coeff(n - 1, n - 1);
}

// ---------------------------------------------------------------------------
// SmoothedSign

SmoothedSign::SmoothedSign(const QuadSpace& space, SignPolynomial polynomial, QuadratureConfig cfg)
    : space_(space), polynomial_(std::move(polynomial)), cfg_(cfg) {
  const auto& walls = polynomial_.walls();
  functionals_.resize(walls.size(), space_.dim());
  for (std::size_t i = 0; i < walls.size(); ++i) functionals_.row(i) = to_eigen(space_.functional(walls[i])).transpose();
  sigma_.resize(walls.size());
  for (std::size_t i = 0; i < walls.size(); ++i) {
    const Rational qw = space_.quad(walls[i]);
    sigma_[i] = qw < 0 ? std::sqrt(-to_double(qw) / (2 * kPi)) : 0.0;
  }

  std::set<WallMask> subsets;
  for (const auto& [e, coeff] : polynomial_.terms()) {
    term_frames_.emplace(e, SignFrame(space_, polynomial_.subset(e)));
    coeffs_.emplace_back(e, to_double(coeff));
    coeff_norm_ += std::abs(coeffs_.back().second);
    for (WallMask sub = e;; sub = (sub - 1) & e) {
      if (sub != 0) subsets.insert(sub);
      if (sub == 0) break;
    }
    for (std::size_t i = 0; i < walls.size(); ++i)
      if ((e >> i & 1u) && space_.quad(walls[i]) == 0) discontinuous_ |= WallMask{1} << i;
  }
  for (WallMask sub : subsets) {
    subsets_.push_back(sub);
    frames_.emplace_back(space_, polynomial_.subset(sub));
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < walls.size(); ++i)
      if (sub >> i & 1u) idx.push_back(i);
    frame_walls_.push_back(std::move(idx));
  }
  build_splits();
}

// The tail is sum over patterns (E, F) of r_{E,F} P_E[exactly F], where the
// coefficient k_{E'} of vol_{E'} may be split across the terms E containing
// E' (each has the same marginal on E'): r_{E,F} = sum_{E' <= F} lambda_{E',E}
// with sum_E lambda_{E',E} = k_{E'}. Minimising sum B_{E,F} |r_{E,F}| for
// probability bounds B is an l1 problem whose optimum sits at a vertex; the
// vertices depend only on the sign pattern and are listed here exactly.
void SmoothedSign::build_splits() {
  constexpr std::size_t kMaxSubsystems = 20000;
  const std::size_t nw = polynomial_.walls().size();
  if (nw > 12) return;
  std::vector<WallMask> live;
  for (const auto& [e, coeff] : polynomial_.terms())
    if (e != 0) live.push_back(e);

  std::vector<std::pair<WallMask, WallMask>> patterns;
  std::map<std::pair<WallMask, WallMask>, std::size_t> index;
  for (WallMask e : live)
    for (WallMask f = e; f != 0; f = (f - 1) & e) {
      index[{e, f}] = patterns.size();
      patterns.push_back({e, f});
    }

  // Free parameters: lambda_{E',h} for every home h of E' but the first.
  struct Param {
    WallMask sub, first, home;
  };
  std::vector<Param> params;
  for (WallMask sub : subsets_) {
    std::vector<WallMask> homes;
    for (WallMask e : live)
      if ((e & sub) == sub) homes.push_back(e);
    for (std::size_t h = 1; h < homes.size(); ++h) params.push_back({sub, homes[0], homes[h]});
  }
  const std::size_t rows = patterns.size();
  RatMatrix g(rows, params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    const auto& pr = params[j];
    for (WallMask f = pr.first; f != 0; f = (f - 1) & pr.first)
      if ((f & pr.sub) == pr.sub) g(index.at({pr.first, f}), j) -= 1;
    for (WallMask f = pr.home; f != 0; f = (f - 1) & pr.home)
      if ((f & pr.sub) == pr.sub) g(index.at({pr.home, f}), j) += 1;
  }
  // Keep an independent set of columns.
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < params.size(); ++j) {
    std::vector<RatVector> trial;
    for (std::size_t c : cols) trial.push_back(g.col(c));
    trial.push_back(g.col(j));
    if (rank(RatMatrix::from_columns(trial)) == trial.size()) cols.push_back(j);
  }
  const std::size_t np = cols.size();
  RatMatrix gr(rows, np);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < np; ++j) gr(i, j) = g(i, cols[j]);

  // Nonsingular p x p row subsystems, with their inverses.
  double combos = 1;
  for (std::size_t i = 0; i < np; ++i) combos = combos * static_cast<double>(rows - i) / static_cast<double>(i + 1);
  if (combos > kMaxSubsystems) return;
  std::vector<std::pair<std::vector<std::size_t>, RatMatrix>> systems;
  if (np == 0) {
    systems.push_back({{}, RatMatrix()});
  } else {
    std::vector<std::size_t> pick(np);
    for (std::size_t i = 0; i < np; ++i) pick[i] = i;
    while (true) {
      RatMatrix m(np, np);
      for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < np; ++j) m(i, j) = gr(pick[i], j);
      if (auto inv = inverse(m)) systems.push_back({pick, *inv});
      std::size_t pos = np;
      while (pos > 0 && pick[pos - 1] == rows - np + pos - 1) --pos;
      if (pos == 0) break;
      ++pick[pos - 1];
      for (std::size_t i = pos; i < np; ++i) pick[i] = pick[i - 1] + 1;
    }
  }

  splits_.assign(std::size_t{1} << nw, {});
  for (WallMask neg = 0; neg < (WallMask{1} << nw); ++neg) {
    // k_{E'} = (-2)^{|E'|} sum_{E >= E'} a_E sigma_E, exactly.
    auto sigma = [&](WallMask e) { return popcount(e & neg) % 2 ? -1 : 1; };
    RatVector c(rows);
    for (WallMask sub : subsets_) {
      Rational ksub = 0;
      WallMask first = 0;
      for (const auto& [e, coeff] : polynomial_.terms()) {
        if (e == 0 || (e & sub) != sub) continue;
        if (first == 0) first = e;
        ksub += sigma(e) * coeff;
      }
      ksub *= (popcount(sub) % 2 ? -1 : 1) * Rational(Integer(1) << popcount(sub));
      if (ksub == 0) continue;
      for (WallMask f = first; f != 0; f = (f - 1) & first)
        if ((f & sub) == sub) c[index.at({first, f})] += ksub;
    }
    std::set<RatVector> seen;
    Split& split = splits_[neg];
    split.patterns = patterns;
    for (const auto& [pick, inv] : systems) {
      RatVector r = c;
      if (np > 0) {
        RatVector cs(np);
        for (std::size_t i = 0; i < np; ++i) cs[i] = -c[pick[i]];
        const RatVector theta = inv * cs;
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < np; ++j) r[i] += gr(i, j) * theta[j];
      }
      if (!seen.insert(r).second) continue;
      std::vector<double> rd(rows);
      for (std::size_t i = 0; i < rows; ++i) rd[i] = to_double(r[i]);
      split.candidates.push_back(std::move(rd));
    }
  }
}

SmoothedSign::Value SmoothedSign::evaluate_pairings(const Eigen::VectorXd& p) const {
  const auto sig = effective_signs(p);
  WallMask zero = 0;
  for (std::size_t i = 0; i < sig.size(); ++i)
    if ((discontinuous_ >> i & 1u) && p(i) == 0) zero |= WallMask{1} << i;

  Value out;
  if (cfg_.semidefinite == SemidefiniteRule::Quotient) {
    double value = 0;
    for (const auto& [e, coeff] : polynomial_.terms()) {
      const double a = to_double(coeff);
      if (e & zero) continue;
      int s = 1;
      Eigen::VectorXd m(popcount(e));
      int r = 0;
      for (std::size_t i = 0; i < sig.size(); ++i)
        if (e >> i & 1u) {
          s *= sig[i];
          m(r++) = p(i);
        }
      out.base += a * s;
      const auto& frame = term_frames_.at(e);
      const Eigen::VectorXd mean = effective_mean(frame, m, cfg_);
      if (deterministic_zero(frame, mean)) continue;
      const auto sigma = effective_signs(mean);
      int sign = 1;
      for (int x : sigma) sign *= x;
      double total = 1;
      for (WallMask sub = 1; sub <= full_mask(frame.size()); ++sub)
        total += std::ldexp(popcount(sub) % 2 ? -1.0 : 1.0, popcount(sub)) *
                 opposite_probability(frame, sub, mean, sigma, cfg_);
      value += a * sign * total;
    }
    out.tail = value - out.base;
    return out;
  }

  out.base = coefficient_sum(0, sig, zero);
  for (const auto& pat : plan(p, sig, zero))
    if (pat.log_bound > -std::numeric_limits<double>::infinity())
      out.tail += pat.k * gaussian_polyhedron_probability(pat.a, pat.b, cfg_);
  return out;
}

WallMask SmoothedSign::zero_walls(const Eigen::VectorXd& p) const {
  WallMask zero = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if ((discontinuous_ >> i & 1u) && p(i) == 0) zero |= WallMask{1} << i;
  return zero;
}

double SmoothedSign::coefficient_sum(WallMask sub, const std::vector<int>& sig, WallMask zero) const {
  double c = 0;
  for (const auto& [e, coeff] : coeffs_) {
    if ((e & sub) != sub || (e & zero)) continue;
    int s = 1;
    for (std::size_t i = 0; i < sig.size(); ++i)
      if (e >> i & 1u) s *= sig[i];
    c += s * coeff;
  }
  return c;
}

// tail = sum_{E'} k_{E'} vol_{E'} with k_{E'} = (-2)^{|E'|} c_{E'}. Every
// frame containing E' has the same marginal on E', so vol_{E'} may be
// expanded in any such "home" term E as the sum of P_E[exactly F flips] over
// E' <= F <= E. Collecting coefficients per (E, F) turns nearly equal
// differences such as vol_{2} - vol_{23} into single small probabilities.
// Homes are chosen to minimise the bounded l1 mass of the terms.
std::vector<SmoothedSign::Pattern> SmoothedSign::plan(const Eigen::VectorXd& p, const std::vector<int>& sig,
                                                      WallMask zero, bool quick) const {
  struct Key {
    WallMask sub;
    double k;
    std::vector<WallMask> homes;
    std::size_t home = 0;
  };

  std::map<std::pair<WallMask, WallMask>, Pattern> patterns;
  auto pattern = [&](WallMask e, WallMask f) -> Pattern& {
    const auto [it, fresh] = patterns.try_emplace({e, f});
    if (!fresh) return it->second;
    Pattern& pat = it->second;
    pat.term = e;
    pat.flips = f;
    const auto& fac = term_frames_.at(e).factor();
    pat.a.resize(fac.rows(), fac.cols());
    pat.b.resize(fac.rows());
    std::size_t r = 0;
    for (std::size_t i = 0; i < sig.size(); ++i) {
      if (!(e >> i & 1u)) continue;
      const double s = (f >> i & 1u) ? sig[i] : -sig[i];
      pat.a.row(r) = s * fac.row(r);
      pat.b(r) = -s * p(i);
      ++r;
    }
    pat.log_bound = quick ? half_space_log_bound(pat.a, pat.b) : gaussian_polyhedron_log_bound(pat.a, pat.b);
    return pat;
  };

  if (zero == 0 && !splits_.empty()) {
    WallMask neg = 0;
    for (std::size_t i = 0; i < sig.size(); ++i)
      if (sig[i] < 0) neg |= WallMask{1} << i;
    const Split& split = splits_[neg];
    std::vector<double> logb(split.patterns.size(), 0.0);
    std::vector<bool> have(split.patterns.size(), false);
    const std::vector<double>* best = nullptr;
    double best_mass = std::numeric_limits<double>::infinity();
    for (const auto& cand : split.candidates) {
      double hi = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < cand.size(); ++j) {
        if (cand[j] == 0) continue;
        if (!have[j]) {
          logb[j] = pattern(split.patterns[j].first, split.patterns[j].second).log_bound;
          have[j] = true;
        }
        hi = std::max(hi, std::log(std::abs(cand[j])) + logb[j]);
      }
      double sum = 0;
      if (!std::isinf(hi))
        for (std::size_t j = 0; j < cand.size(); ++j)
          if (cand[j] != 0) sum += std::exp(std::log(std::abs(cand[j])) + logb[j] - hi);
      const double m = std::isinf(hi) ? hi : hi + std::log(sum);
      if (best == nullptr || m < best_mass) {
        best = &cand;
        best_mass = m;
      }
    }
    std::vector<Pattern> out;
    for (std::size_t j = 0; j < best->size(); ++j) {
      if ((*best)[j] == 0) continue;
      Pattern pat = pattern(split.patterns[j].first, split.patterns[j].second);
      pat.k = (*best)[j];
      out.push_back(std::move(pat));
    }
    return out;
  }

  std::vector<Key> keys;
  std::vector<WallMask> live;
  for (const auto& [e, coeff] : polynomial_.terms())
    if (e != 0 && !(e & zero)) live.push_back(e);
  for (WallMask sub : subsets_) {
    if (sub & zero) continue;
    const double c = coefficient_sum(sub, sig, zero);
    if (c == 0) continue;
    Key key{sub, std::ldexp(popcount(sub) % 2 ? -c : c, popcount(sub)), {}, 0};
    for (WallMask e : live)
      if ((e & sub) == sub) key.homes.push_back(e);
    keys.push_back(std::move(key));
  }
  if (keys.empty()) return {};

  std::map<std::pair<WallMask, WallMask>, double> acc;
  auto collect = [&] {
    acc.clear();
    for (const auto& key : keys) {
      const WallMask e = key.homes[key.home];
      const WallMask rest = e & ~key.sub;
      for (WallMask extra = rest;; extra = (extra - 1) & rest) {
        acc[{e, key.sub | extra}] += key.k;
        if (extra == 0) break;
      }
    }
  };
  // log sum |k| exp(log_bound)
  auto log_mass = [&] {
    collect();
    double hi = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    for (const auto& [ef, k] : acc) {
      if (k == 0) continue;
      const double l = std::log(std::abs(k)) + pattern(ef.first, ef.second).log_bound;
      logs.push_back(l);
      hi = std::max(hi, l);
    }
    if (std::isinf(hi)) return hi;
    double sum = 0;
    for (double l : logs) sum += std::exp(l - hi);
    return hi + std::log(sum);
  };

  double best = log_mass();
  for (int pass = 0; pass < 4; ++pass) {
    bool improved = false;
    for (auto& key : keys) {
      const std::size_t keep = key.home;
      for (std::size_t h = 0; h < key.homes.size(); ++h) {
        if (h == keep) continue;
        const std::size_t prev = key.home;
        key.home = h;
        const double m = log_mass();
        if (m < best - 1e-12) {
          best = m;
          improved = true;
        } else {
          key.home = prev;
        }
      }
    }
    if (!improved) break;
  }
  collect();
  std::vector<Pattern> out;
  for (const auto& [ef, k] : acc) {
    if (k == 0) continue;
    Pattern pat = pattern(ef.first, ef.second);
    pat.k = k;
    out.push_back(std::move(pat));
  }
  return out;
}

SmoothedSign::Value SmoothedSign::evaluate(const Eigen::VectorXd& v) const {
  if (static_cast<std::size_t>(v.size()) != space_.dim()) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  return evaluate_pairings(functionals_ * v);
}

double SmoothedSign::term(WallMask e, const Eigen::VectorXd& v) const {
  const auto it = term_frames_.find(e);
  if (it == term_frames_.end()) throw Error(ErrorCode::OutOfRange, "no such term in the sign polynomial");
  return sgn_hat(it->second, v, cfg_);
}

double SmoothedSign::sgn(const Eigen::VectorXd& v) const { return polynomial_.evaluate(space_, v); }

double SmoothedSign::log_tail_bound(const Eigen::VectorXd& p) const { return planned_log_bound(p, false); }

double SmoothedSign::quick_log_tail_bound(const Eigen::VectorXd& p) const {
  const WallMask zero = zero_walls(p);
  if (zero != 0 || splits_.empty() || cfg_.semidefinite == SemidefiniteRule::Quotient)
    return planned_log_bound(p, true);
  // A pattern's polyhedron needs every wall in F to change sign, so its
  // distance from the mean is at least max_{i in F} |m_i| / sd_i.
  WallMask neg = 0;
  std::vector<double> t(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) < 0) neg |= WallMask{1} << i;
    t[i] = sigma_[i] > 0 ? std::abs(p(i)) / sigma_[i] : std::numeric_limits<double>::infinity();
  }
  const Split& split = splits_[neg];
  std::vector<double> lb(split.patterns.size());
  for (std::size_t j = 0; j < lb.size(); ++j) {
    double d = 0;
    const WallMask f = split.patterns[j].second;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (f >> i & 1u) d = std::max(d, t[i]);
    lb[j] = std::isinf(d) ? -d : -std::log(2.0) - 0.5 * d * d * (1 - 1e-12);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& cand : split.candidates) {
    double hi = -std::numeric_limits<double>::infinity();
    int count = 0;
    for (std::size_t j = 0; j < cand.size(); ++j) {
      if (cand[j] == 0) continue;
      hi = std::max(hi, std::log(std::abs(cand[j])) + lb[j]);
      ++count;
    }
    if (count > 0) hi += std::log(static_cast<double>(count));
    best = std::min(best, hi);
  }
  return best;
}

double SmoothedSign::planned_log_bound(const Eigen::VectorXd& p, bool quick) const {
  if (cfg_.semidefinite == SemidefiniteRule::Quotient) return quotient_log_tail_bound(p);
  const auto sig = effective_signs(p);
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  for (const auto& pat : plan(p, sig, zero_walls(p), quick)) {
    const double l = std::log(std::abs(pat.k)) + pat.log_bound;
    logs.push_back(l);
    hi = std::max(hi, l);
  }
  if (std::isinf(hi)) return hi;
  double sum = 0;
  for (double l : logs) sum += std::exp(l - hi);
  return hi + std::log(sum);
}

double SmoothedSign::quotient_log_tail_bound(const Eigen::VectorXd& p) const {
  const auto sig = effective_signs(p);
  double best = -std::numeric_limits<double>::infinity();
  auto add = [&best](double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    const double hi = std::max(best, x);
    best = hi + std::log1p(std::exp(std::min(best, x) - hi));
  };
  for (std::size_t j = 0; j < subsets_.size(); ++j) {
    const WallMask sub = subsets_[j];
    double c = 0;
    for (const auto& [e, coeff] : coeffs_) {
      if ((e & sub) != sub) continue;
      int s = 1;
      for (std::size_t i = 0; i < sig.size(); ++i)
        if (e >> i & 1u) s *= sig[i];
      c += s * coeff;
    }
    if (c == 0) continue;
    // vol_{E'} <= min_i Phi(-|m_i| / sigma_i) <= exp(-t^2 / 2) / 2.
    double t = 0;
    bool vanishes = false;
    for (std::size_t i : frame_walls_[j]) {
      if (sigma_[i] == 0) {
        vanishes = true;
        break;
      }
      t = std::max(t, std::abs(p(i)) / sigma_[i]);
    }
    if (vanishes) continue;
    add(std::log(std::abs(c)) + popcount(sub) * std::log(2.0) - std::log(2.0) - 0.5 * t * t);
  }
  return best;
}

double sgn_hat_cone(const SignPolynomial& p, const QuadSpace& space, const Eigen::VectorXd& v,
                    const QuadratureConfig& cfg) {
  return SmoothedSign(space, p, cfg)(v);
}

// ---------------------------------------------------------------------------
// Vigneras operator

double vigneras_residual(const std::function<double(const Eigen::VectorXd&)>& f, const QuadSpace& space,
                         const Eigen::VectorXd& v, double h) {
  auto d1 = [&](const Eigen::VectorXd& u) {
    return (-f(v + 2 * h * u) + 8 * f(v + h * u) - 8 * f(v - h * u) + f(v - 2 * h * u)) / (12 * h);
  };
  const double f0 = f(v);
  auto d2 = [&](const Eigen::VectorXd& u) {
    return (-f(v + 2 * h * u) + 16 * f(v + h * u) - 30 * f0 + 16 * f(v - h * u) - f(v - 2 * h * u)) / (12 * h * h);
  };
  double euler = 0;
  const double norm = v.norm();
  if (norm > 0) euler = norm * d1(v / norm);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(space.gram_inverse_double());
  double laplace = 0;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k)
    laplace += eig.eigenvalues()(k) * d2(eig.eigenvectors().col(k));
  return 4 * kPi * euler - laplace;
}

double vigneras_residual(const SmoothedSign& f, const Eigen::VectorXd& v, double h) {
  const auto& fun = f.wall_functionals();
  for (Eigen::Index i = 0; i < fun.rows(); ++i)
    if ((f.discontinuous_walls() >> i & 1u) && std::abs(fun.row(i).dot(v)) <= 2.5 * h * fun.row(i).norm())
      throw Error(ErrorCode::TooCloseToWall, "difference stencil crosses an isotropic wall");
  return vigneras_residual([&f](const Eigen::VectorXd& x) { return f(x); }, f.space(), v, h);
}

// ---------------------------------------------------------------------------
// Degeneration

DegenerationReport degeneration_check(const QuadSpace& space, const std::vector<RatVector>& fixed,
                                      const RatVector& w0, const RatVector& w1, const std::vector<Rational>& t_grid,
                                      const Eigen::VectorXd& v, const QuadratureConfig& cfg) {
  DegenerationReport report;
  std::vector<Rational> grid = t_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  std::vector<std::vector<RatVector>> family;
  for (const auto& t : grid) {
    if (t <= 0) throw Error(ErrorCode::OutOfRange, "degeneration grid must be positive");
    std::vector<RatVector> et = fixed;
    et.push_back(w0 + scale(t, w1));
    if (span_kind(space, et) != SpanKind::NegativeDefinite ||
        rank(RatMatrix::from_columns(et)) != et.size())
      throw Error(ErrorCode::FamilyNotNegative, "E(t) is not an independent negative definite family");
    family.push_back(std::move(et));
  }
  std::vector<RatVector> e0 = fixed;
  e0.push_back(w0);
  if (span_kind(space, e0) == SpanKind::NotNegative)
    throw Error(ErrorCode::FamilyNotNegative, "E(0) does not span a negative semidefinite space");
  const SignFrame frame0(space, e0);
  const double sgn0 = sgn_hat(frame0, v, cfg);
  report.decay_expected = std::abs(space.bilinear(v, to_eigen(w0))) > 1e-12;

  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto& t = grid[j];
    const auto& et = family[j];
    const SignFrame frame(space, et);
    const Eigen::VectorXd wt = to_eigen(et.back());
    const double pair = space.bilinear(v, wt);
    const double qw = space.quad(wt);
    DegenerationRow row;
    row.t = to_double(t);
    row.vol = vol_hat(frame, v, cfg);
    row.vol_bound = std::exp(kPi * pair * pair / qw);
    row.sgn_difference = std::abs(sgn_hat(frame, v, cfg) - sgn0);
    row.sgn_bound = std::exp(kPi * pair * pair / (4 * qw));
    report.rows.push_back(row);
  }

  auto ratio = [](double x, double bound) {
    if (bound > 0) return x / bound;
    return x == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  if (!report.rows.empty()) {
    const double vol_ref = std::max(ratio(report.rows.front().vol, report.rows.front().vol_bound), 1e-300);
    const double sgn_ref = std::max(ratio(report.rows.front().sgn_difference, report.rows.front().sgn_bound), 1e-300);
    for (const auto& row : report.rows) {
      report.max_vol_ratio = std::max(report.max_vol_ratio, ratio(row.vol, row.vol_bound));
      report.max_sgn_ratio = std::max(report.max_sgn_ratio, ratio(row.sgn_difference, row.sgn_bound));
    }
    report.bounded = report.max_vol_ratio <= 100 * std::max(vol_ref, 1.0) &&
                     report.max_sgn_ratio <= 100 * std::max(sgn_ref, 1.0);
  }
  return report;
}

}  // namespace indeftheta
