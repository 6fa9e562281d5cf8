#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "fairdiv/core.hpp"
#include "fairdiv/pf.hpp"

namespace fairdiv {

/// The `limit` highest-valued items, ties to the lowest index.
inline std::vector<std::size_t> best_bundle(const RatRow& values, std::size_t limit) {
  if (limit > values.size()) throw DimensionMismatch("best_bundle: limit exceeds item count");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Deterministic swap-dictatorial game for two bidders: every item is split
/// in half; on one half-copy A dictates her best bundle of at most floor(m/2)
/// items and B takes the rest, on the other half-copy the roles swap.
/// Guarantees each bidder a utility of at least 1/2.
inline MechanismResult swap_dictatorial(const Instance& inst) {
  if (inst.n != 2) throw DimensionMismatch("swap_dictatorial: requires n = 2");
  const std::size_t m = inst.m;
  const std::size_t limit = m / 2;
  const auto pick_a = best_bundle(inst.v[0], limit);
  const auto pick_b = best_bundle(inst.v[1], limit);

  Allocation x = Allocation::zeros(2, m);
  const Rat half(1, 2);
  std::vector<char> in_a(m, 0), in_b(m, 0);
  for (auto j : pick_a) in_a[j] = 1;
  for (auto j : pick_b) in_b[j] = 1;
  for (std::size_t j = 0; j < m; ++j) {
    x.x[0][j] = (in_a[j] ? half : Rat(0)) + (in_b[j] ? Rat(0) : half);
    x.x[1][j] = (in_a[j] ? Rat(0) : half) + (in_b[j] ? half : Rat(0));
  }
  return make_result(inst, std::move(x));
}

/// Partial Allocation: each bidder keeps a fraction of her exact PF bundle
/// equal to the other bidder's PF utility; the rest is discarded. Truthful,
/// with rho_A = v_B and rho_B = v_A exactly.
inline MechanismResult partial_allocation(const Instance& inst) {
  if (inst.n != 2) throw DimensionMismatch("partial_allocation: requires n = 2");
  const PFSolution pf = solve_pf_two_bidder(inst);
  const Rat& u_a = pf.utilities[0];
  const Rat& u_b = pf.utilities[1];

  Allocation x = Allocation::zeros(2, inst.m);
  for (std::size_t j = 0; j < inst.m; ++j) {
    x.x[0][j] = pf.allocation[0][j] * u_b;
    x.x[1][j] = pf.allocation[1][j] * u_a;
  }
  MechanismResult r = make_result(inst, std::move(x));
  attach_pf_fractions(r, inst, pf.utilities);
  return r;
}

/// Hybrid of the two: the swap-dictatorial game runs on one half-copy of
/// every item and Partial Allocation on the other, so the output is the
/// average of the two allocations. SW(x) / SW(x_PF) >= 2/3 on every instance.
inline MechanismResult hybrid(const Instance& inst) {
  if (inst.n != 2) throw DimensionMismatch("hybrid: requires n = 2");
  const MechanismResult swap = swap_dictatorial(inst);
  const MechanismResult pa = partial_allocation(inst);

  Allocation x = Allocation::zeros(2, inst.m);
  const Rat half(1, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < inst.m; ++j)
      x.x[i][j] = half * (swap.allocation.x[i][j] + pa.allocation.x[i][j]);
  MechanismResult r = make_result(inst, std::move(x));
  const PFSolution pf = solve_pf_two_bidder(inst);
  attach_pf_fractions(r, inst, pf.utilities);
  return r;
}

}  // namespace fairdiv
