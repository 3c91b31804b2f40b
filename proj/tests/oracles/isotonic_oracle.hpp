#pragma once

// Brute-force weighted isotonic regression under the componentwise order via
// the max-min formula over upper and lower sets:
//
//   f(x) = max over upper sets U containing x of
//          min over lower sets L containing x of  Av(U intersect L)
//
// where Av is the weighted mean. Exponential in the number of cells; meant
// for small test posets only.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "boincx/core.hpp"

namespace oracle {

inline std::vector<double> isotonic_minmax(std::span<const boincx::Cell> cells, std::span<const double> values,
                                           std::span<const double> weights) {
  const std::size_t m = cells.size();
  std::vector<std::uint32_t> upper, lower;
  for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
    bool up = true, down = true;
    for (std::size_t a = 0; a < m && (up || down); ++a) {
      if (!(mask >> a & 1u)) continue;
      for (std::size_t b = 0; b < m; ++b) {
        if (mask >> b & 1u) continue;
        if (boincx::precedes(cells[a], cells[b])) up = false;
        if (boincx::precedes(cells[b], cells[a])) down = false;
      }
    }
    if (up) upper.push_back(mask);
    if (down) lower.push_back(mask);
  }
  auto average = [&](std::uint32_t set) {
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      if (set >> a & 1u) {
        num += weights[a] * values[a];
        den += weights[a];
      }
    return num / den;
  };
  std::vector<double> out(m);
  for (std::size_t x = 0; x < m; ++x) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint32_t u : upper) {
      if (!(u >> x & 1u)) continue;
      double worst = std::numeric_limits<double>::infinity();
      for (std::uint32_t l : lower)
        if (l >> x & 1u) worst = std::min(worst, average(u & l));
      best = std::max(best, worst);
    }
    out[x] = best;
  }
  return out;
}

}  // namespace oracle
