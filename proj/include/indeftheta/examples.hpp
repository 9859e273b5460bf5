#pragma once

// Built-in fixtures: the signature (1,2) running example, the Appell-Lerch
// lattice of signature (1,1), and a positive definite control.

#include "indeftheta/cone.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace indeftheta {

struct Example {
  std::string name;
  RatMatrix gram;
  WallSet walls;
};

/// "running", "appell-lerch" or "control-posdef"; throws ParseError otherwise.
Example builtin_example(std::string_view name);
std::vector<std::string> builtin_example_names();

}  // namespace indeftheta
