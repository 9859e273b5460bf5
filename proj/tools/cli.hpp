#pragma once

// Command-line front end: problem specs in, JSON / CSV out.

#include "indeftheta/gerf.hpp"
#include "indeftheta/theta.hpp"

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace indeftheta::cli {

struct ProblemSpec {
  RatMatrix gram;
  std::optional<WallSet> cone;
  std::optional<JacobiPoint> point;
  TruncationPolicy policy;
  QuadratureConfig quadrature;
  /// Elliptic check shifts; default e_1 and e_d.
  std::optional<Eigen::VectorXi> lambda;
  std::optional<Eigen::VectorXi> mu;
};

/// Throws Error(ParseError) with the field path on malformed input.
ProblemSpec parse_spec(const nlohmann::json& j);
/// Built-in specs "running", "appell-lerch", "control-posdef".
ProblemSpec example_spec(const std::string& name);

/// Serialises with doubles in %.17g, non-finite doubles as null.
std::string dump(const nlohmann::json& j, int indent = 2);

nlohmann::json to_json(const std::complex<double>& c);
nlohmann::json to_json(const Eigen::VectorXcd& v);
nlohmann::json to_json(const ThetaValue& t);

/// Exit codes: 0 success, 1 failed checks, 2 invalid input, 3 point on the
/// singular set, 4 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace indeftheta::cli
