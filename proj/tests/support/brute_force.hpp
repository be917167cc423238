#pragma once

#include "fracvar/bvops.hpp"
#include "fracvar/grid.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace fracvar::test_support {

struct BruteForceResult {
  double energy = std::numeric_limits<double>::infinity();
  std::vector<int> index;  // minimizing labeling (full grid)
  std::uint64_t visited = 0;
};

// Exhaustive minimization of sum_e attribution * weight * |c_p - c_q| over every labeling of
// the free cells. Two labels walk the binary Gray code (one flip per step); more labels use an
// odometer. Energies are updated incrementally from the edges incident to the changed cell.
inline BruteForceResult brute_force_labeling(const LabelField& init, const EdgeSet& edges, const DomainMask& mask,
                                             const std::vector<std::uint8_t>& free) {
  const std::size_t n = init.grid.size();
  std::vector<std::size_t> vars;
  std::vector<int> slot(n, -1);
  for (std::size_t k = 0; k < n; ++k)
    if (free[k]) {
      slot[k] = static_cast<int>(vars.size());
      vars.push_back(k);
    }
  const int L = static_cast<int>(init.labels.size());
  if (vars.size() > 40) throw std::invalid_argument("too many free cells for exhaustive search");

  struct Incident {
    std::size_t other;
    double coef;
  };
  std::vector<std::vector<Incident>> adj(vars.size());
  std::vector<int> cur(init.index);
  for (std::size_t v : vars) cur[v] = 0;
  double energy = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::size_t p = edges.p[e], q = edges.q[e];
    const double coef = attribution(mask, p, q) * edges.weight[e];
    if (coef == 0.0) continue;
    energy += coef * std::abs(init.labels[static_cast<std::size_t>(cur[p])] - init.labels[static_cast<std::size_t>(cur[q])]);
    if (slot[p] >= 0) adj[static_cast<std::size_t>(slot[p])].push_back({q, coef});
    if (slot[q] >= 0) adj[static_cast<std::size_t>(slot[q])].push_back({p, coef});
  }
  auto set = [&](std::size_t var, int label) {
    const std::size_t p = vars[var];
    const double a = init.labels[static_cast<std::size_t>(cur[p])], b = init.labels[static_cast<std::size_t>(label)];
    for (const auto& inc : adj[var]) {
      const double c = init.labels[static_cast<std::size_t>(cur[inc.other])];
      energy += inc.coef * (std::abs(b - c) - std::abs(a - c));
    }
    cur[p] = label;
  };

  BruteForceResult best;
  auto record = [&] {
    ++best.visited;
    if (energy < best.energy) {
      best.energy = energy;
      best.index = cur;
    }
  };
  record();
  if (L == 2) {
    const std::uint64_t total = std::uint64_t{1} << vars.size();
    for (std::uint64_t i = 1; i < total; ++i) {
      const std::size_t bit = static_cast<std::size_t>(__builtin_ctzll(i));
      set(bit, 1 - cur[vars[bit]]);
      record();
    }
  } else {
    std::vector<int> digit(vars.size(), 0);
    for (;;) {
      std::size_t d = 0;
      while (d < vars.size() && digit[d] == L - 1) {
        digit[d] = 0;
        set(d, 0);
        ++d;
      }
      if (d == vars.size()) break;
      set(d, ++digit[d]);
      record();
    }
  }
  return best;
}

}  // namespace fracvar::test_support
