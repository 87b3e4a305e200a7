#pragma once

// Named towers and spaces used by the tests, the harness and the CLI.

#include <string>
#include <vector>

#include "qmlab/commutative.hpp"
#include "qmlab/tower.hpp"

namespace qmlab::fixtures {

/// CAR truncation [1] -> [2] -> [4] -> ... with multiplicity 2 at each step.
inline TowerSpec car(int levels = 4) {
  TowerSpec t;
  int d = 1;
  for (int n = 0; n < levels; ++n) {
    t.levels.push_back({d});
    if (n + 1 < levels) t.mults.push_back({{2}});
    d *= 2;
  }
  t.top_trace = {1.0 / (d / 2)};
  return t;
}

/// T2: [1] -> [1,1] -> [2,1], mults [[1],[1]] then [[1,1],[0,1]].
inline TowerSpec t2() {
  return {{{1}, {1, 1}, {2, 1}}, {{{1}, {1}}, {{1, 1}, {0, 1}}}, {1.0 / 3.0, 1.0 / 3.0}};
}

/// T2 continued one more level with the same pattern: top [3,1].
inline TowerSpec t2_extended() {
  return {{{1}, {1, 1}, {2, 1}, {3, 1}}, {{{1}, {1}}, {{1, 1}, {0, 1}}, {{1, 1}, {0, 1}}}, {0.25, 0.25}};
}

/// Five levels. Block 0 at level n >= 1 is M_{2^n} (fed twice by the previous
/// block 0); block k >= 1 is a private line born at level k from block 0 of
/// level k-1 and carried up unchanged. Ideals generated by line k first
/// differ from the zero ideal at level k.
inline TowerSpec lineage() {
  TowerSpec t;
  t.levels = {{1}, {2, 1}, {4, 1, 2}, {8, 1, 2, 4}, {16, 1, 2, 4, 8}};
  for (int n = 0; n < 4; ++n) {
    const int cols = static_cast<int>(t.levels[static_cast<std::size_t>(n)].size());
    const int rows = static_cast<int>(t.levels[static_cast<std::size_t>(n) + 1].size());
    std::vector<std::vector<int>> m(static_cast<std::size_t>(rows), std::vector<int>(static_cast<std::size_t>(cols), 0));
    m[0][0] = 2;
    for (int k = 1; k < cols; ++k) m[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = 1;
    m[static_cast<std::size_t>(rows) - 1][0] = 1;
    t.mults.push_back(std::move(m));
  }
  t.top_trace.assign(5, 1.0 / 31.0);
  return t;
}

/// Sequence of ideals on lineage() converging to the limit {1}: agreement
/// levels are none, 1, 2, 3, 3, then full agreement from index 5 on.
inline std::vector<std::vector<int>> lineage_sequence() {
  return {{0, 1, 2, 3, 4}, {1, 2}, {1, 3}, {1, 4}, {0, 1}, {1}, {1}, {1}};
}
inline std::vector<int> lineage_limit() { return {1}; }

inline TowerSpec by_name(const std::string& name) {
  if (name == "car") return car();
  if (name == "t2") return t2();
  if (name == "t2_extended") return t2_extended();
  if (name == "lineage") return lineage();
  throw InputError("unknown tower fixture '" + name + "'");
}

/// Two points at distance 1.
inline FiniteMetricSpace two_point() { return FiniteMetricSpace::on_line({0.0, 1.0}); }

/// {0, 0.1, 1} on the line.
inline FiniteMetricSpace line3() { return FiniteMetricSpace::on_line({0.0, 0.1, 1.0}); }

}  // namespace qmlab::fixtures
