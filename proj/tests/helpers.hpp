#pragma once

#include "indeftheta/rational.hpp"

#include <initializer_list>

namespace testing_helpers {

using indeftheta::RatMatrix;
using indeftheta::RatVector;

inline RatMatrix diag(std::initializer_list<int> entries) {
  RatMatrix m(entries.size(), entries.size());
  std::size_t i = 0;
  for (int e : entries) {
    m(i, i) = e;
    ++i;
  }
  return m;
}

inline RatMatrix mat(std::initializer_list<std::initializer_list<int>> rows) {
  std::vector<RatVector> r;
  for (auto row : rows) {
    RatVector v;
    for (int x : row) v.emplace_back(x);
    r.push_back(v);
  }
  return RatMatrix::from_rows(r);
}

inline RatVector vec(std::initializer_list<int> xs) {
  RatVector v;
  for (int x : xs) v.emplace_back(x);
  return v;
}

}  // namespace testing_helpers
