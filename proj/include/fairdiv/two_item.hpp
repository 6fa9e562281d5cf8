#pragma once

#include <cstddef>
#include <optional>
#include <utility>

#include "fairdiv/core.hpp"
#include "fairdiv/pf.hpp"

namespace fairdiv {

// ---------------------------------------------------------------------------
// Single Item mechanism: n bidders, two items.
// ---------------------------------------------------------------------------

/// Every bidder ends up holding a fraction of exactly one item. When the PF
/// allocation has a ratio-defining bidder she is forced to share either the
/// top item with the Top bidders (1/k each) or the bottom item with the
/// Bottom bidders (1/(n-k+1) each), whichever she values more (ties go to
/// the top item). Everyone else is scaled down so all bidders receive the
/// same fraction rho of their PF utility; rho >= n/(n+1) always.
inline MechanismResult si_mechanism(const Instance& inst) {
  if (inst.m != 2) throw DimensionMismatch("si_mechanism: requires m = 2");
  const auto [structure, pf] = solve_pf_two_item(inst);
  if (!structure.rb_pos) {
    MechanismResult r = make_result(inst, to_allocation(pf));
    attach_pf_fractions(r, inst, pf.utilities);
    return r;
  }

  const std::size_t n = inst.n;
  const std::size_t k = *structure.rb_pos + 1;  // 1-based position of R_b
  const std::size_t rb = structure.rb_bidder();
  const Rat& a = inst.v[rb][0];
  const Rat& b = inst.v[rb][1];
  const Rat n_rat(static_cast<long>(n));
  // R_b's PF utility is exactly 1/n, so the two options give these fractions.
  const Rat rho_top = n_rat * a / Rat(static_cast<long>(k));
  const Rat rho_bottom = n_rat * b / Rat(static_cast<long>(n - k + 1));
  const bool go_top = rho_top >= rho_bottom;
  const Rat rho = go_top ? rho_top : rho_bottom;

  Allocation x = Allocation::zeros(n, 2);
  if (go_top)
    x.x[rb][0] = Rat(1, static_cast<long>(k));
  else
    x.x[rb][1] = Rat(1, static_cast<long>(n - k + 1));
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (pos == *structure.rb_pos) continue;
    const std::size_t i = structure.order[pos];
    if (pos < structure.top_count)
      x.x[i][0] = rho / structure.p_t;
    else
      x.x[i][1] = rho / structure.p_b;
  }
  MechanismResult r = make_result(inst, std::move(x));
  attach_pf_fractions(r, inst, pf.utilities);
  return r;
}

// ---------------------------------------------------------------------------
// Improved schedules for two items and very few bidders.
// ---------------------------------------------------------------------------

/// Allocation schedule for a ratio-defining bidder as a function of her
/// scaled top value: she receives t(v) = alpha - beta/v^2 of the top item
/// and b(v) = gamma/v - delta of the bottom item. gamma = 2*beta is the
/// first-order truthfulness condition; the validity window keeps both
/// fractions inside [0,1] (v_max_square bounds v^2 when present, which lets
/// irrational endpoints like sqrt(12) stay exact).
struct TwoItemSchedule {
  Rat alpha, beta, gamma, delta;
  Rat v_min;
  std::optional<Rat> v_max_square;

  Rat top_fraction(const Rat& v) const { return alpha - beta / (v * v); }
  Rat bottom_fraction(const Rat& v) const { return gamma / v - delta; }
  bool first_order_truthful() const { return gamma == Rat(2) * beta; }
  bool contains(const Rat& v) const {
    return v >= v_min && (!v_max_square || v * v <= *v_max_square);
  }
};

inline TwoItemSchedule two_bidder_schedule() {
  return {Rat(1, 2), Rat(1, 2), Rat(1), Rat(0), Rat(1), std::nullopt};
}
inline TwoItemSchedule three_bidder_middle_schedule() {
  return {Rat(3, 5), Rat(2, 5), Rat(4, 5), Rat(2, 5), Rat(1), Rat(4)};
}
inline TwoItemSchedule three_bidder_bottom_schedule() {
  return {Rat(1, 4), Rat(1), Rat(2), Rat(0), Rat(2), Rat(12)};
}

namespace detail {

inline Instance swap_items(const Instance& inst) {
  Instance out = inst;
  for (auto& row : out.v) std::swap(row[0], row[1]);
  return out;
}

inline Allocation swap_items(Allocation x) {
  for (auto& row : x.x) std::swap(row[0], row[1]);
  return x;
}

// Orientation for the 2-bidder mechanism: items flipped so somebody's scaled
// value is >= 1, bidder `a` the one with the larger scaled value. Depth-one
// recursion at most.
inline Allocation two_bidder_two_item_alloc(const Instance& inst) {
  const Rat& a0 = inst.v[0][0];
  const Rat& b0 = inst.v[0][1];
  const Rat& a1 = inst.v[1][0];
  const Rat& b1 = inst.v[1][1];

  if (b0.is_zero() && b1.is_zero()) {  // both want only the top item
    Allocation x = Allocation::zeros(2, 2);
    x.x[0][0] = x.x[1][0] = Rat(1, 2);
    return x;
  }
  if (a0 < b0 && a1 < b1)  // nobody's scaled value reaches 1: flip the items
    return swap_items(two_bidder_two_item_alloc(swap_items(inst)));

  // label A = larger scaled top value (projectively), ties keep bidder 0
  const std::size_t bidder_a = a0 * b1 >= a1 * b0 ? 0 : 1;
  const std::size_t bidder_b = 1 - bidder_a;
  const Rat& vb_top = inst.v[bidder_b][0];
  const Rat& vb_bot = inst.v[bidder_b][1];

  Allocation x = Allocation::zeros(2, 2);
  if (vb_bot.is_zero() || vb_top <= vb_bot) {
    // no ratio-defining bidder (v <= 1, or B wants only the top but then
    // both-only-top was handled above): the PF split is whole items
    x.x[bidder_a][0] = Rat(1);
    x.x[bidder_b][1] = Rat(1);
    return x;
  }
  const Rat v = vb_top / vb_bot;  // > 1: B is the ratio-defining bidder
  const TwoItemSchedule sched = two_bidder_schedule();
  x.x[bidder_b][0] = sched.top_fraction(v);
  x.x[bidder_b][1] = sched.bottom_fraction(v);
  x.x[bidder_a][0] = Rat(1) - x.x[bidder_b][0];
  return x;
}

inline Allocation three_bidder_two_item_alloc(const Instance& inst) {
  const auto [st, pf] = solve_pf_two_item(inst);
  if (!st.rb_pos) return to_allocation(pf);

  const std::size_t pos = *st.rb_pos;
  const Rat& v = st.v;
  if (pos == 0 || (pos == 1 && v < Rat(1)))  // orient so the proof cases apply
    return swap_items(three_bidder_two_item_alloc(swap_items(inst)));

  const std::size_t rb = st.rb_bidder();
  Allocation x = Allocation::zeros(3, 2);
  if (pos == 1) {
    // middle bidder defines the ratio, v in [1,2)
    const TwoItemSchedule sched = three_bidder_middle_schedule();
    const Rat t = sched.top_fraction(v);
    const Rat b = sched.bottom_fraction(v);
    const Rat rho = Rat(3) * (inst.v[rb][0] * t + inst.v[rb][1] * b);
    x.x[rb][0] = t;
    x.x[rb][1] = b;
    x.x[st.order[0]][0] = rho / st.p_t;
    x.x[st.order[2]][1] = rho / st.p_b;
    return x;
  }
  // pos == 2: the bottom bidder defines the ratio, v > 2
  if (v * v <= Rat(12)) {
    const TwoItemSchedule sched = three_bidder_bottom_schedule();
    x.x[rb][0] = sched.top_fraction(v);
    x.x[rb][1] = sched.bottom_fraction(v);
    const Rat top_share = Rat(1, 4) + Rat(1) / (v * v);
    x.x[st.order[0]][0] = top_share;
    x.x[st.order[1]][0] = top_share;
  } else {
    // beyond sqrt(12) the bottom item is no longer worth allocating
    for (std::size_t i = 0; i < 3; ++i) x.x[i][0] = Rat(1, 3);
  }
  return x;
}

}  // namespace detail

/// Truthful 2-bidder, 2-item mechanism with rho >= 2(sqrt(2)-1) ~ 0.828:
/// when one bidder's scaled value v exceeds 1 she trades bottom for top
/// along t(v) = 1/2 - 1/(2v^2), b(v) = 1/v; otherwise the PF split stands.
inline MechanismResult two_bidder_two_item(const Instance& inst) {
  if (inst.n != 2 || inst.m != 2)
    throw DimensionMismatch("two_bidder_two_item: requires n = 2, m = 2");
  MechanismResult r = make_result(inst, detail::two_bidder_two_item_alloc(inst));
  attach_pf_fractions(r, inst, solve_pf_two_item(inst).second.utilities);
  return r;
}

/// 3-bidder, 2-item mechanism with rho >= (12 - sqrt(12))/11 ~ 0.776, using
/// the middle-bidder schedule t(v) = 3/5 - 2/(5v^2), b(v) = 4/(5v) - 2/5 on
/// [1,2) and the piecewise bottom-bidder schedule beyond. Truthful within an
/// item orientation; because t(1) != b(1), a middle ratio-defining bidder can
/// gain up to (3 - 2 sqrt(2))/5 of her scaled PF utility by reporting across
/// the v = 1 seam, a gap inherent to these schedule constants.
inline MechanismResult three_bidder_two_item(const Instance& inst) {
  if (inst.n != 3 || inst.m != 2)
    throw DimensionMismatch("three_bidder_two_item: requires n = 3, m = 2");
  MechanismResult r = make_result(inst, detail::three_bidder_two_item_alloc(inst));
  attach_pf_fractions(r, inst, solve_pf_two_item(inst).second.utilities);
  return r;
}

}  // namespace fairdiv
