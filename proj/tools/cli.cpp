#include "cli.hpp"

#include "indeftheta/error.hpp"
#include "indeftheta/examples.hpp"
#include "indeftheta/verify.hpp"
#include "indeftheta/weil.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace indeftheta::cli {

namespace {

using json = nlohmann::json;
using cd = std::complex<double>;

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, path + ": " + what);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) parse_fail(path + "." + key, "unknown field");
}

Rational parse_exact(const json& j, const std::string& path) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const Error&) {
      parse_fail(path, "not a rational \"" + j.get<std::string>() + "\"");
    }
  }
  parse_fail(path, "expected an integer or a \"p/q\" string");
}

double parse_real(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return to_double(parse_exact(j, path));
  parse_fail(path, "expected a number");
}

RatVector parse_vector(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array");
  RatVector v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(parse_exact(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

cd parse_complex(const json& j, const std::string& path) {
  if (j.is_array()) {
    if (j.size() != 2) parse_fail(path, "expected [re, im]");
    return {parse_real(j[0], path + "[0]"), parse_real(j[1], path + "[1]")};
  }
  return {parse_real(j, path), 0.0};
}

Eigen::VectorXi parse_int_vector(const json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array");
  Eigen::VectorXi v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) parse_fail(path + "[" + std::to_string(i) + "]", "expected an integer");
    v(static_cast<Eigen::Index>(i)) = j[i].get<int>();
  }
  return v;
}

void dump_value(const json& j, std::string& out, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(key).dump();
        out += indent < 0 ? ":" : ": ";
        dump_value(value, out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Short numeric arrays ([re, im] pairs) stay on one line.
      const bool flat = j.size() <= 2 && std::all_of(j.begin(), j.end(), [](const json& x) { return x.is_primitive(); });
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat ? ", " : ",";
        if (!flat) newline(depth + 1);
        dump_value(j[i], out, flat ? -1 : indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

Eigen::VectorXcd difference(const ThetaValue& a, const ThetaValue& b) { return a.components - b.components; }

json truncation_json(const ThetaValue& t) {
  return {{"radius", t.radius}, {"near_singular", t.near_singular}, {"warnings", t.warnings}};
}

json report_json(const CheckReport& r) {
  return {{"name", r.name},         {"max_abs_error", r.max_abs_error}, {"tolerance", r.tolerance},
          {"passed", r.passed},     {"errors", r.errors},               {"details", r.details}};
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::OnSingularSet:
      return 3;
    case ErrorCode::TruncationNotConverged:
    case ErrorCode::ToleranceNotMet:
    case ErrorCode::TooCloseToWall:
    case ErrorCode::CertificateUnavailable:
      return 4;
    default:
      return 2;
  }
}

struct Problem {
  ProblemSpec spec;
  std::optional<Lattice> lattice;
  std::optional<Cone> cone;
  std::optional<SignPolynomial> polynomial;
};

// Builds the lattice and, when `need_cone`, the validated cone.
Problem build(ProblemSpec spec, bool need_cone, bool need_point) {
  Problem p{std::move(spec), std::nullopt, std::nullopt, std::nullopt};
  p.lattice.emplace(p.spec.gram);
  if (need_cone) {
    if (!p.spec.cone) throw Error(ErrorCode::ParseError, "cone: missing");
    p.cone.emplace(p.lattice->space(), *p.spec.cone);
    const auto report = p.cone->validate(*p.lattice);
    if (!report.ok()) {
      std::string msg = "cone fails validation";
      for (const auto& f : report.failures) msg += "; " + f;
      throw Error(ErrorCode::ValidationFailed, msg);
    }
    p.polynomial.emplace(p.cone->face_indicator());
  }
  if (need_point) {
    if (!p.spec.point) throw Error(ErrorCode::ParseError, "point: missing");
    if (static_cast<std::size_t>(p.spec.point->z.size()) != p.lattice->dim())
      throw Error(ErrorCode::DimensionMismatch, "point.z: expected " + std::to_string(p.lattice->dim()) + " entries");
  }
  return p;
}

json cmd_eval(const Problem& p) {
  const auto& pt = *p.spec.point;
  const auto sign = theta_sign(*p.lattice, *p.polynomial, pt, p.spec.policy);
  const auto hat = theta_hat(*p.lattice, *p.polynomial, pt, p.spec.policy, p.spec.quadrature);
  const auto cone = theta_cone(*p.lattice, *p.cone, pt, p.spec.policy);
  json out;
  out["singular_set_distance"] = singular_set_distance(*p.lattice, *p.polynomial, pt);
  out["theta_sign"] = to_json(sign);
  out["theta_hat"] = to_json(hat);
  out["theta_cone"] = to_json(cone);
  out["differences"] = {{"cone_minus_sign", to_json(difference(cone, sign))},
                        {"hat_minus_sign", to_json(difference(hat, sign))},
                        {"hat_minus_cone", to_json(difference(hat, cone))}};
  out["truncation"] = {{"theta_sign", truncation_json(sign)},
                       {"theta_hat", truncation_json(hat)},
                       {"theta_cone", truncation_json(cone)}};
  return out;
}

struct Axis {
  double lo = 0, hi = 0;
  int count = 1;
};

std::vector<Axis> parse_grid(const std::string& text, std::size_t dim) {
  std::vector<Axis> axes;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    Axis a;
    std::vector<std::string> fields;
    std::stringstream ps(part);
    std::string f;
    while (std::getline(ps, f, ':')) fields.push_back(f);
    try {
      std::size_t used = 0;
      if (fields.size() == 1) {
        a.lo = a.hi = std::stod(fields[0], &used);
        if (used != fields[0].size()) throw std::invalid_argument("trailing");
      } else if (fields.size() == 3) {
        a.lo = std::stod(fields[0], &used);
        if (used != fields[0].size()) throw std::invalid_argument("trailing");
        a.hi = std::stod(fields[1], &used);
        if (used != fields[1].size()) throw std::invalid_argument("trailing");
        a.count = std::stoi(fields[2], &used);
        if (used != fields[2].size()) throw std::invalid_argument("trailing");
      } else {
        throw std::invalid_argument("shape");
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "axis \"" + part + "\" is neither a value nor lo:hi:count");
    }
    if (!std::isfinite(a.lo) || !std::isfinite(a.hi) || a.count < 1 || (a.count == 1 && a.lo != a.hi))
      throw Error(ErrorCode::ParseError, "axis \"" + part + "\" needs finite bounds and count >= 1");
    axes.push_back(a);
  }
  if (axes.size() != dim)
    throw Error(ErrorCode::ParseError, "expected " + std::to_string(dim) + " axes, got " + std::to_string(axes.size()));
  return axes;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void cmd_gerf(const Problem& p, const std::vector<Axis>& axes, std::ostream& out) {
  const QuadSpace& space = p.lattice->space();
  const SmoothedSign f(space, *p.polynomial, p.spec.quadrature);
  const std::size_t d = axes.size();
  for (std::size_t i = 0; i < d; ++i) out << 'v' << i + 1 << ',';
  out << "sgn,sgn_hat,diff\n";
  std::vector<int> idx(d, 0);
  for (;;) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      const Axis& a = axes[i];
      v(static_cast<Eigen::Index>(i)) = a.count == 1 ? a.lo : a.lo + (a.hi - a.lo) * idx[i] / (a.count - 1);
    }
    const double s = f.sgn(v);
    const double h = f(v);
    for (std::size_t i = 0; i < d; ++i) out << fmt(v(static_cast<Eigen::Index>(i))) << ',';
    out << fmt(s) << ',' << fmt(h) << ',' << fmt(h - s) << '\n';
    std::size_t pos = d;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < axes[pos].count) break;
      idx[pos] = 0;
      if (pos == 0) return;
    }
    if (d == 0) return;
  }
}

std::vector<std::string> split_checks(const std::string& text) {
  static const std::set<std::string> known{"T", "S", "elliptic", "vigneras", "example"};
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string c;
  while (std::getline(ss, c, ',')) {
    if (!known.count(c)) throw Error(ErrorCode::ParseError, "unknown check \"" + c + "\" (T, S, elliptic, vigneras, example)");
    out.push_back(c);
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty check list");
  return out;
}

std::vector<CheckReport> transformation_checks(const Problem& p, const std::vector<std::string>& checks,
                                               const std::string& prefix) {
  const auto& pt = *p.spec.point;
  const auto n = static_cast<Eigen::Index>(p.lattice->dim());
  std::vector<CheckReport> out;
  for (const auto& c : checks) {
    if (c == "T") {
      out.push_back(check_T(*p.lattice, *p.polynomial, pt, p.spec.policy, p.spec.quadrature));
      if (!p.lattice->is_even()) {
        auto t2 = check_T(*p.lattice, *p.polynomial, pt, p.spec.policy, p.spec.quadrature, {}, 2);
        t2.details += "; odd lattice, reported alongside T";
        out.push_back(std::move(t2));
      }
    } else if (c == "S") {
      out.push_back(check_S(*p.lattice, *p.polynomial, pt, p.spec.policy, p.spec.quadrature));
    } else if (c == "elliptic") {
      Eigen::VectorXi lambda = Eigen::VectorXi::Zero(n), mu = Eigen::VectorXi::Zero(n);
      if (n > 0) {
        lambda(0) = 1;
        mu(n - 1) = 1;
      }
      if (p.spec.lambda) lambda = *p.spec.lambda;
      if (p.spec.mu) mu = *p.spec.mu;
      out.push_back(check_elliptic(*p.lattice, *p.polynomial, pt, lambda, mu, p.spec.policy, p.spec.quadrature));
    } else {
      continue;
    }
    out.back().name = prefix + out.back().name;
    if (out.size() >= 2 && out[out.size() - 2].name.rfind("T^2", 0) == 0 && !prefix.empty())
      out[out.size() - 2].name = prefix + out[out.size() - 2].name;
  }
  return out;
}

json cmd_verify(const Problem& p, const std::vector<std::string>& checks, bool& all_passed) {
  std::vector<CheckReport> reports;
  const bool definite = p.lattice->space().signature().minus == 0;
  const bool wants_transform = std::any_of(checks.begin(), checks.end(), [](const std::string& c) {
    return c == "T" || c == "S" || c == "elliptic";
  });
  if (!definite && wants_transform) {
    // Harness self-validation on the positive definite control first.
    const Problem control = build(example_spec("control-posdef"), true, true);
    auto ctrl = transformation_checks(control, {"T", "S", "elliptic"}, "control:");
    const bool ok = std::all_of(ctrl.begin(), ctrl.end(), [](const CheckReport& r) { return r.passed; });
    reports.insert(reports.end(), ctrl.begin(), ctrl.end());
    if (!ok) {
      all_passed = false;
      json out;
      out["passed"] = false;
      out["reports"] = json::array();
      for (const auto& r : reports) out["reports"].push_back(report_json(r));
      out["aborted"] = "control lattice checks failed";
      return out;
    }
  }
  auto main = transformation_checks(p, checks, "");
  reports.insert(reports.end(), main.begin(), main.end());
  for (const auto& c : checks) {
    if (c == "vigneras")
      reports.push_back(check_vigneras_theta(*p.lattice, *p.polynomial, {*p.spec.point}, 1e-4, 1e-3, 10,
                                             p.spec.quadrature));
    if (c == "example") reports.push_back(check_running_example(50, 3, 1e-7, 1, p.spec.quadrature));
  }
  all_passed = std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.passed; });
  json out;
  out["passed"] = all_passed;
  out["reports"] = json::array();
  for (const auto& r : reports) out["reports"].push_back(report_json(r));
  return out;
}

json matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json cmd_dump_weil(const Lattice& lattice) {
  const WeilRep rep = build_weil(lattice);
  json reps = json::array();
  for (const auto& r : rep.disc.reps) {
    json v = json::array();
    for (const auto& x : r) v.push_back(to_string(x));
    reps.push_back(v);
  }
  json q = json::array();
  for (const auto& x : rep.q_mod1) q.push_back(to_string(x));
  json out;
  out["cosets"] = reps;
  out["q_mod_1"] = q;
  out["rho_T"] = matrix_json(Eigen::MatrixXcd(rep.rho_t.asDiagonal()));
  out["rho_S"] = matrix_json(rep.rho_s);
  out["sigma"] = to_json(rep.sigma);
  return out;
}

}  // namespace

json to_json(const std::complex<double>& c) { return json::array({c.real(), c.imag()}); }

json to_json(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

json to_json(const ThetaValue& t) {
  return {{"components", to_json(t.components)}, {"terms_used", t.terms_used}, {"tail_estimate", t.tail_estimate}};
}

std::string dump(const json& j, int indent) {
  std::string out;
  dump_value(j, out, indent, 0);
  return out;
}

ProblemSpec parse_spec(const json& j) {
  check_keys(j, "spec", {"gram", "cone", "point", "policy", "quadrature", "elliptic"});
  ProblemSpec s;
  if (!j.contains("gram")) parse_fail("gram", "missing");
  const json& g = j["gram"];
  if (!g.is_array() || g.empty()) parse_fail("gram", "expected a non-empty square matrix");
  std::vector<RatVector> rows;
  for (std::size_t i = 0; i < g.size(); ++i) {
    rows.push_back(parse_vector(g[i], "gram[" + std::to_string(i) + "]"));
    if (rows.back().size() != g.size()) parse_fail("gram[" + std::to_string(i) + "]", "row length differs from the row count");
  }
  s.gram = RatMatrix::from_rows(rows);
  const std::size_t n = rows.size();

  if (j.contains("cone")) {
    const json& c = j["cone"];
    check_keys(c, "cone", {"kind", "walls", "pairs"});
    WallSet w;
    if (!c.contains("kind") || !c["kind"].is_string()) parse_fail("cone.kind", "expected \"tetrahedral\" or \"cubical\"");
    const auto kind = c["kind"].get<std::string>();
    if (kind == "tetrahedral") {
      w.kind = ConeKind::Tetrahedral;
    } else if (kind == "cubical") {
      w.kind = ConeKind::Cubical;
    } else {
      parse_fail("cone.kind", "expected \"tetrahedral\" or \"cubical\", got \"" + kind + "\"");
    }
    if (!c.contains("walls") || !c["walls"].is_array()) parse_fail("cone.walls", "expected an array of vectors");
    for (std::size_t i = 0; i < c["walls"].size(); ++i) {
      const std::string path = "cone.walls[" + std::to_string(i) + "]";
      w.walls.push_back(parse_vector(c["walls"][i], path));
      if (w.walls.back().size() != n) parse_fail(path, "expected " + std::to_string(n) + " entries");
    }
    if (c.contains("pairs")) {
      if (!c["pairs"].is_array()) parse_fail("cone.pairs", "expected an array of index pairs");
      for (std::size_t i = 0; i < c["pairs"].size(); ++i) {
        const auto v = parse_int_vector(c["pairs"][i], "cone.pairs[" + std::to_string(i) + "]");
        if (v.size() != 2 || v.minCoeff() < 0)
          parse_fail("cone.pairs[" + std::to_string(i) + "]", "expected two non-negative wall indices");
        w.pairs.push_back({static_cast<std::size_t>(v(0)), static_cast<std::size_t>(v(1))});
      }
    }
    s.cone = std::move(w);
  }

  if (j.contains("point")) {
    const json& pt = j["point"];
    check_keys(pt, "point", {"tau", "z"});
    if (!pt.contains("tau")) parse_fail("point.tau", "missing");
    const cd tau = parse_complex(pt["tau"], "point.tau");
    if (!(tau.imag() > 0)) parse_fail("point.tau", "Im tau must be positive");
    Eigen::VectorXcd z = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
    if (pt.contains("z")) {
      if (!pt["z"].is_array()) parse_fail("point.z", "expected an array of [re, im]");
      z.resize(static_cast<Eigen::Index>(pt["z"].size()));
      for (std::size_t i = 0; i < pt["z"].size(); ++i)
        z(static_cast<Eigen::Index>(i)) = parse_complex(pt["z"][i], "point.z[" + std::to_string(i) + "]");
    }
    s.point.emplace(tau, z);
  }

  if (j.contains("policy")) {
    const json& p = j["policy"];
    check_keys(p, "policy", {"term_tol", "initial_radius", "max_radius", "doubling"});
    if (p.contains("term_tol")) s.policy.term_tol = parse_real(p["term_tol"], "policy.term_tol");
    if (p.contains("initial_radius")) {
      if (!p["initial_radius"].is_number_integer()) parse_fail("policy.initial_radius", "expected an integer");
      s.policy.initial_radius = p["initial_radius"].get<int>();
    }
    if (p.contains("max_radius")) {
      if (!p["max_radius"].is_number_integer()) parse_fail("policy.max_radius", "expected an integer");
      s.policy.max_radius = p["max_radius"].get<int>();
    }
    if (p.contains("doubling")) {
      if (!p["doubling"].is_boolean()) parse_fail("policy.doubling", "expected true or false");
      s.policy.doubling = p["doubling"].get<bool>();
    }
    if (!(s.policy.term_tol > 0)) parse_fail("policy.term_tol", "must be positive");
    if (s.policy.initial_radius < 1 || s.policy.max_radius < s.policy.initial_radius)
      parse_fail("policy", "need 1 <= initial_radius <= max_radius");
  }

  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    check_keys(q, "quadrature", {"abs_tol", "max_depth", "semidefinite"});
    if (q.contains("abs_tol")) s.quadrature.abs_tol = parse_real(q["abs_tol"], "quadrature.abs_tol");
    if (q.contains("max_depth")) {
      if (!q["max_depth"].is_number_integer()) parse_fail("quadrature.max_depth", "expected an integer");
      s.quadrature.max_depth = q["max_depth"].get<int>();
    }
    if (q.contains("semidefinite")) {
      const std::string rule = q["semidefinite"].is_string() ? q["semidefinite"].get<std::string>() : "";
      if (rule == "limit") {
        s.quadrature.semidefinite = SemidefiniteRule::Limit;
      } else if (rule == "quotient") {
        s.quadrature.semidefinite = SemidefiniteRule::Quotient;
      } else {
        parse_fail("quadrature.semidefinite", "expected \"limit\" or \"quotient\"");
      }
    }
    if (!(s.quadrature.abs_tol > 0)) parse_fail("quadrature.abs_tol", "must be positive");
  }

  if (j.contains("elliptic")) {
    const json& e = j["elliptic"];
    check_keys(e, "elliptic", {"lambda", "mu"});
    if (e.contains("lambda")) s.lambda = parse_int_vector(e["lambda"], "elliptic.lambda");
    if (e.contains("mu")) s.mu = parse_int_vector(e["mu"], "elliptic.mu");
  }
  return s;
}

ProblemSpec example_spec(const std::string& name) {
  const Example ex = builtin_example(name);
  ProblemSpec s;
  s.gram = ex.gram;
  s.cone = ex.walls;
  const auto n = static_cast<Eigen::Index>(ex.gram.rows());
  Eigen::VectorXcd z = Eigen::VectorXcd::Zero(n);
  if (name == "running") {
    z << cd(0.05, 0.35), cd(-0.2, 0.1), cd(0.13, 0.2);
  } else if (name == "appell-lerch") {
    z << cd(0.1, 0.25), cd(0.2, 0.45);
  }
  s.point.emplace(cd(0, 1), z);
  return s;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Indefinite theta series on polyhedral cones", "indeftheta"};
  app.require_subcommand(1);
  std::string spec_file, example, checks = "T,S,elliptic,vigneras", grid, out_file;
  int radius = 0;
  double tol = 0;

  auto add_common = [&](CLI::App* sub, bool with_policy) {
    auto* s = sub->add_option("--spec", spec_file, "problem spec (JSON)");
    auto* e = sub->add_option("--example", example, "built-in spec: running, appell-lerch, control-posdef");
    s->excludes(e);
    e->excludes(s);
    sub->add_option("--out", out_file, "write the output here instead of stdout");
    if (with_policy) {
      sub->add_option("--radius", radius, "initial truncation radius")->check(CLI::PositiveNumber);
      sub->add_option("--tol", tol, "term tolerance of the truncation")->check(CLI::PositiveNumber);
    }
  };
  auto* eval = app.add_subcommand("eval", "theta_sign, theta_hat and theta_cone at the problem's point (JSON)");
  add_common(eval, true);
  auto* gerf = app.add_subcommand("gerf", "sgn and sgn_hat of the cone on a grid (CSV)");
  add_common(gerf, false);
  gerf->add_option("--grid", grid, "per axis a value or lo:hi:count, comma separated")->required();
  auto* verify = app.add_subcommand("verify", "transformation and kernel checks (JSON); exit 0 iff all pass");
  add_common(verify, true);
  verify->add_option("--checks", checks, "comma separated: T, S, elliptic, vigneras, example");
  auto* weil = app.add_subcommand("dump-weil", "rho_T, rho_S and the Gauss sum (JSON)");
  add_common(weil, false);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  std::string flag = "--spec";
  try {
    ProblemSpec spec;
    if (!spec_file.empty()) {
      std::ifstream in(spec_file);
      if (!in) throw Error(ErrorCode::ParseError, "cannot open \"" + spec_file + "\"");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what());
      }
      spec = parse_spec(j);
    } else if (!example.empty()) {
      flag = "--example";
      spec = example_spec(example);
    } else {
      flag = "--spec/--example";
      throw Error(ErrorCode::ParseError, "one of --spec FILE or --example NAME is required");
    }
    if (radius != 0) {
      spec.policy.initial_radius = radius;
      spec.policy.max_radius = std::max(spec.policy.max_radius, radius);
    }
    if (tol != 0) {
      spec.policy.term_tol = tol;
    }
    flag = spec_file.empty() ? "--example" : "--spec";

    std::ofstream file;
    if (!out_file.empty()) {
      file.open(out_file, std::ios::binary);
      if (!file) {
        flag = "--out";
        throw Error(ErrorCode::ParseError, "cannot open \"" + out_file + "\" for writing");
      }
    }
    std::ostream& sink = out_file.empty() ? out : file;

    if (*eval) {
      const Problem p = build(std::move(spec), true, true);
      sink << dump(cmd_eval(p)) << '\n';
      return 0;
    }
    if (*gerf) {
      const Problem p = build(std::move(spec), true, false);
      flag = "--grid";
      const auto axes = parse_grid(grid, p.lattice->dim());
      flag = spec_file.empty() ? "--example" : "--spec";
      cmd_gerf(p, axes, sink);
      return 0;
    }
    if (*verify) {
      flag = "--checks";
      const auto list = split_checks(checks);
      flag = spec_file.empty() ? "--example" : "--spec";
      const Problem p = build(std::move(spec), true, true);
      bool passed = false;
      sink << dump(cmd_verify(p, list, passed)) << '\n';
      return passed ? 0 : 1;
    }
    if (*weil) {
      const Problem p = build(std::move(spec), false, false);
      sink << dump(cmd_dump_weil(*p.lattice)) << '\n';
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << flag << ": " << e.what() << '\n';
    return exit_code(e.code());
  }
  return 2;
}

}  // namespace indeftheta::cli
