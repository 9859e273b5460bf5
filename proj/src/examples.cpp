#include "indeftheta/examples.hpp"

#include "indeftheta/error.hpp"

namespace indeftheta {

namespace {

RatVector ints(std::initializer_list<int> xs) {
  RatVector v;
  for (int x : xs) v.emplace_back(x);
  return v;
}

}  // namespace

std::vector<std::string> builtin_example_names() { return {"running", "appell-lerch", "control-posdef"}; }

Example builtin_example(std::string_view name) {
  if (name == "running") {
    // l3 >= 0, l1 - l2 - 2 l3 >= 0, 2 l2 + 2 l3 - l1 >= 0 (or all <= 0) under
    // q(l) = (l1^2 - l2^2 - l3^2) / 2.
    return {"running", RatMatrix::from_rows({ints({1, 0, 0}), ints({0, -1, 0}), ints({0, 0, -1})}),
            WallSet{ConeKind::Tetrahedral, {ints({0, 0, -1}), ints({1, 1, 2}), ints({-1, -2, -2})}, {}}};
  }
  if (name == "appell-lerch") {
    // l1 >= 0, l2 >= 0 (or both <= 0); the walls are the dual basis.
    return {"appell-lerch", RatMatrix::from_rows({ints({1, 1}), ints({1, 0})}),
            WallSet{ConeKind::Cubical, {ints({0, 1}), ints({1, -1})}, {{0, 1}}}};
  }
  if (name == "control-posdef") {
    return {"control-posdef", RatMatrix::from_rows({ints({2})}), WallSet{ConeKind::Tetrahedral, {ints({1})}, {}}};
  }
  throw Error(ErrorCode::ParseError, "unknown example '" + std::string(name) + "'");
}

}  // namespace indeftheta
