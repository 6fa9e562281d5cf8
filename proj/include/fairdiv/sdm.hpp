#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fairdiv/core.hpp"

namespace fairdiv {

// ---------------------------------------------------------------------------
// Demand graph.
// ---------------------------------------------------------------------------

/// Bipartite bidder-item graph with an edge wherever the item maximizes the
/// bidder's bang per buck v_ij / p_j. Exact rational comparisons, so ties
/// contribute all maximizing edges.
struct DemandGraph {
  std::vector<std::vector<std::size_t>> items_of;  // per bidder, ascending item ids
};

namespace detail {

// sign of v1/p1 - v2/p2 for nonnegative values and positive prices, by
// cross-multiplication of the underlying integers (no gcd reductions)
inline int cmp_rate(const Rat& v1, const Rat& p1, const Rat& v2, const Rat& p2) {
  const mpz_class lhs = v1.num() * p1.den() * (v2.den() * p2.num());
  const mpz_class rhs = v2.num() * p2.den() * (v1.den() * p1.num());
  return cmp(lhs, rhs);
}

}  // namespace detail

namespace detail {

inline void recompute_demand_row(const Instance& inst, const std::vector<Rat>& prices,
                                 std::vector<std::size_t>& row, std::size_t i) {
  row.clear();
  std::size_t best = 0;
  for (std::size_t j = 1; j < inst.m; ++j)
    if (cmp_rate(inst.v[i][j], prices[j], inst.v[i][best], prices[best]) > 0) best = j;
  if (inst.v[i][best].is_zero()) return;  // all-zero row; excluded by Instance invariants
  for (std::size_t j = 0; j < inst.m; ++j)
    if (cmp_rate(inst.v[i][j], prices[j], inst.v[i][best], prices[best]) == 0) row.push_back(j);
}

}  // namespace detail

inline DemandGraph demand_graph(const Instance& inst, const std::vector<Rat>& prices) {
  if (prices.size() != inst.m) throw DimensionMismatch("demand_graph: price vector size");
  DemandGraph g;
  g.items_of.assign(inst.n, {});
  for (std::size_t i = 0; i < inst.n; ++i)
    detail::recompute_demand_row(inst, prices, g.items_of[i], i);
  return g;
}

// ---------------------------------------------------------------------------
// Capacitated matching.
// ---------------------------------------------------------------------------

namespace detail {

struct Matching {
  std::vector<int> assigned;                       // per bidder, item id or -1
  std::vector<long> load;                          // per item
  std::vector<std::vector<std::size_t>> holders;   // per item, matched bidders

  void init(std::size_t n, std::size_t m) {
    assigned.assign(n, -1);
    load.assign(m, 0);
    holders.assign(m, {});
  }

  void assign_bidder(std::size_t i, std::size_t j) {
    const int old_item = assigned[i];
    if (old_item >= 0) {
      auto& h = holders[static_cast<std::size_t>(old_item)];
      h.erase(std::find(h.begin(), h.end(), i));
      load[static_cast<std::size_t>(old_item)] -= 1;
    }
    assigned[i] = static_cast<int>(j);
    holders[j].push_back(i);
    load[j] += 1;
  }
};

// One multi-source augmenting search: BFS over alternating paths from every
// unmatched active bidder (in index order) until an item with spare capacity
// turns up. Returns false when no augmenting path exists.
inline bool augment_once(const DemandGraph& g, const std::vector<long>& capacity,
                         const std::vector<char>& active, Matching& match) {
  const std::size_t n = g.items_of.size();
  const std::size_t m = capacity.size();
  std::vector<int> item_from(m, -1);    // bidder that first reached the item
  std::vector<char> bidder_seen(n, 0);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i)
    if (active[i] && match.assigned[i] < 0 && !g.items_of[i].empty()) {
      bidder_seen[i] = 1;
      queue.push_back(i);
    }

  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (std::size_t j : g.items_of[i]) {
      if (item_from[j] >= 0) continue;
      item_from[j] = static_cast<int>(i);
      if (match.load[j] < capacity[j]) {
        // flip the alternating path ending in this spare slot
        std::size_t item = j;
        while (true) {
          const std::size_t bidder = static_cast<std::size_t>(item_from[item]);
          const int previous = match.assigned[bidder];
          match.assign_bidder(bidder, item);
          if (previous < 0) break;
          item = static_cast<std::size_t>(previous);
        }
        return true;
      }
      for (std::size_t holder : match.holders[j]) {
        if (bidder_seen[holder]) continue;
        bidder_seen[holder] = 1;
        queue.push_back(holder);
      }
    }
  }
  return false;
}

}  // namespace detail

/// Maximum-cardinality assignment of bidders to items under per-item
/// capacities, by augmenting paths scanned in index order. Entry -1 marks an
/// unmatched bidder.
inline std::vector<int> max_valid_assignment(const DemandGraph& g,
                                             const std::vector<long>& capacity) {
  detail::Matching match;
  match.init(g.items_of.size(), capacity.size());
  const std::vector<char> active(g.items_of.size(), 1);
  while (detail::augment_once(g, capacity, active, match)) {
  }
  return match.assigned;
}

// ---------------------------------------------------------------------------
// SDM state and events.
// ---------------------------------------------------------------------------

/// Ascending-price state: exact rational prices (never below 1), capacities
/// floor(p_j), a valid assignment, the unmatched set U and the set R of items
/// reachable from U by alternating paths.
struct SdmState {
  const Instance* inst = nullptr;
  std::vector<char> active;        // participating bidders
  std::vector<Rat> prices;
  std::vector<long> capacity;      // floor(prices)
  DemandGraph graph;
  detail::Matching match;
  std::vector<std::size_t> unmatched;   // U, ascending
  std::vector<char> in_r;               // items in R
  std::vector<char> reached;            // bidders on alternating paths: exactly d(R)

  std::size_t n() const { return inst->n; }
  std::size_t m() const { return inst->m; }
};

enum class SdmEventKind { IntegralPrice, MbbGrowth };

inline void refresh_unmatched(SdmState& s);
inline void refresh_reachable(SdmState& s);

/// Consistent state snapshot from prices and an assignment (-1 = unmatched):
/// rebuilds the demand graph, capacities, U and R. Rejects assignments that
/// use non-demand edges or exceed capacities.
inline SdmState make_sdm_state(const Instance& inst, std::vector<Rat> prices,
                               const std::vector<int>& assignment) {
  if (assignment.size() != inst.n) throw DimensionMismatch("make_sdm_state: assignment size");
  SdmState s;
  s.inst = &inst;
  s.active.assign(inst.n, 1);
  s.prices = std::move(prices);
  s.capacity.resize(inst.m);
  for (std::size_t j = 0; j < inst.m; ++j)
    s.capacity[j] = static_cast<long>(floor_int(s.prices[j]).get_si());
  s.graph = demand_graph(inst, s.prices);
  s.match.init(inst.n, inst.m);
  for (std::size_t i = 0; i < inst.n; ++i) {
    if (assignment[i] < 0) continue;
    const auto j = static_cast<std::size_t>(assignment[i]);
    const auto& edges = s.graph.items_of[i];
    if (std::find(edges.begin(), edges.end(), j) == edges.end())
      throw std::invalid_argument("make_sdm_state: assignment uses a non-demand edge");
    s.match.assign_bidder(i, j);
    if (s.match.load[j] > s.capacity[j])
      throw std::invalid_argument("make_sdm_state: capacity exceeded");
  }
  refresh_unmatched(s);
  refresh_reachable(s);
  return s;
}

struct SdmEvent {
  Rat x;  // multiplicative raise factor, > 1
  SdmEventKind kind = SdmEventKind::IntegralPrice;
};

inline void refresh_unmatched(SdmState& s) {
  s.unmatched.clear();
  for (std::size_t i = 0; i < s.n(); ++i)
    if (s.active[i] && s.match.assigned[i] < 0) s.unmatched.push_back(i);
}

/// Alternating-path reachability from U: bidder -> any demand edge,
/// item -> only bidders matched to it. Fills in_r/reached; the reached
/// bidders are exactly d(R), the bidders with every demanded item in R.
inline void refresh_reachable(SdmState& s) {
  s.in_r.assign(s.m(), 0);
  s.reached.assign(s.n(), 0);
  std::deque<std::size_t> queue;
  for (std::size_t i : s.unmatched) {
    s.reached[i] = 1;
    queue.push_back(i);
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    for (std::size_t j : s.graph.items_of[i]) {
      if (s.in_r[j]) continue;
      s.in_r[j] = 1;
      for (std::size_t holder : s.match.holders[j])
        if (!s.reached[holder]) {
          s.reached[holder] = 1;
          queue.push_back(holder);
        }
    }
  }
}

inline std::vector<std::size_t> reachable_items(const SdmState& s) {
  std::vector<std::size_t> r;
  for (std::size_t j = 0; j < s.m(); ++j)
    if (s.in_r[j]) r.push_back(j);
  return r;
}

/// Smallest raise factor x >= 1 at which (a) a price in R hits an integer, or
/// (b) a bidder in d(R) becomes indifferent to an item outside R. Ties pick
/// the integral event.
inline SdmEvent next_event(const SdmState& s) {
  std::optional<Rat> best_a, best_b;
  for (std::size_t j = 0; j < s.m(); ++j) {
    if (!s.in_r[j]) continue;
    const Rat& p = s.prices[j];
    const Rat target = p.is_integer() ? Rat(mpz_class(p.num() + 1)) : ceil_rat(p);
    const Rat factor = target / p;
    if (!best_a || factor < *best_a) best_a = factor;
  }
  if (!best_a) throw std::logic_error("next_event: empty reachable set");

  const Instance& inst = *s.inst;
  for (std::size_t i = 0; i < s.n(); ++i) {
    if (!s.reached[i]) continue;
    const std::size_t anchor = s.graph.items_of[i].front();
    const Rat in_rate = inst.v[i][anchor] / s.prices[anchor];
    std::optional<std::size_t> out_best;
    for (std::size_t j = 0; j < s.m(); ++j) {
      if (s.in_r[j] || inst.v[i][j].is_zero()) continue;
      if (!out_best ||
          detail::cmp_rate(inst.v[i][j], s.prices[j], inst.v[i][*out_best], s.prices[*out_best]) > 0)
        out_best = j;
    }
    if (!out_best) continue;
    const Rat out_rate = inst.v[i][*out_best] / s.prices[*out_best];
    const Rat factor = in_rate / out_rate;
    if (!best_b || factor < *best_b) best_b = factor;
  }

  if (best_b && *best_b < *best_a) return {*best_b, SdmEventKind::MbbGrowth};
  return {*best_a, SdmEventKind::IntegralPrice};
}

// ---------------------------------------------------------------------------
// The full mechanism.
// ---------------------------------------------------------------------------

struct SdmCounters {
  long step1_calls = 0;
  long integral_events = 0;     // event (a)
  long growth_continue = 0;     // event (b)-i: R grew, every new item full
  long growth_rematch = 0;      // event (b)-ii: a new item had spare capacity
  long max_growth_streak = 0;   // longest run of (b)-i between capacity changes
};

struct SdmResult {
  std::vector<Rat> prices;      // final q
  std::vector<int> assignment;  // per bidder, item id (or -1 for absent bidders)
  MechanismResult result;       // fractions 1/q_j for matched bidders
  SdmCounters counters;
};

namespace detail {

inline void trace_event(std::ostream* trace, long step, const Rat& x, SdmEventKind kind,
                        const SdmState& s) {
  if (!trace) return;
  *trace << "step=" << step << " x=" << x
         << " event=" << (kind == SdmEventKind::IntegralPrice ? "integral" : "growth") << " R={";
  bool first = true;
  for (std::size_t j = 0; j < s.m(); ++j) {
    if (!s.in_r[j]) continue;
    if (!first) *trace << ",";
    *trace << j;
    first = false;
  }
  *trace << "} prices=[";
  for (std::size_t j = 0; j < s.m(); ++j) *trace << (j ? "," : "") << s.prices[j];
  *trace << "]\n";
}

inline SdmResult run_sdm_impl(const Instance& inst, std::vector<char> active,
                              std::vector<Rat> start_prices, std::ostream* trace) {
  const std::size_t n = inst.n, m = inst.m;
  SdmState s;
  s.inst = &inst;
  s.active = std::move(active);
  s.prices = std::move(start_prices);
  s.capacity.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (s.prices[j] < Rat(1)) throw std::invalid_argument("run_sdm: prices must start at >= 1");
    s.capacity[j] = static_cast<long>(floor_int(s.prices[j]).get_si());
  }
  s.match.init(n, m);
  s.graph = demand_graph(inst, s.prices);

  SdmCounters counters;
  long step = 0;
  long growth_streak = 0;
  // Each integral or rematch event raises total capacity or the matched
  // count; the accounting bound makes 8 * n * (min(n,m) + 2) generous.
  const long budget = 8 * static_cast<long>(n + 2) * static_cast<long>(std::min(n, m) + 2);

  bool need_step1 = true;
  while (true) {
    if (need_step1) {
      counters.step1_calls += 1;
      while (augment_once(s.graph, s.capacity, s.active, s.match)) {
      }
      need_step1 = false;
    }
    refresh_unmatched(s);
    if (s.unmatched.empty()) break;

    refresh_reachable(s);
    const SdmEvent ev = next_event(s);
    if (++step > budget)
      throw std::logic_error("run_sdm: event budget exceeded; this is a bug, not an input error");

    const std::vector<char> old_r = s.in_r;
    // only bidders with a pre-raise edge into R can change demand sets:
    // R prices rise, everything else stands still
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j : s.graph.items_of[i])
        if (s.in_r[j]) {
          touched.push_back(i);
          break;
        }
    for (std::size_t j = 0; j < m; ++j) {
      if (!s.in_r[j]) continue;
      s.prices[j] *= ev.x;
      s.capacity[j] = static_cast<long>(floor_int(s.prices[j]).get_si());
    }
    trace_event(trace, step, ev.x, ev.kind, s);
    for (std::size_t i : touched)
      detail::recompute_demand_row(inst, s.prices, s.graph.items_of[i], i);

    if (ev.kind == SdmEventKind::IntegralPrice) {
      counters.integral_events += 1;
      growth_streak = 0;
      need_step1 = true;
      continue;
    }

    // event (b): some demand set grew; see whether any item that joined R
    // has spare capacity
    refresh_reachable(s);
    bool spare = false;
    for (std::size_t j = 0; j < m; ++j)
      if (s.in_r[j] && !old_r[j] && s.match.load[j] < s.capacity[j]) spare = true;
    if (spare) {
      counters.growth_rematch += 1;
      growth_streak = 0;
      need_step1 = true;
    } else {
      counters.growth_continue += 1;
      growth_streak += 1;
      counters.max_growth_streak = std::max(counters.max_growth_streak, growth_streak);
    }
  }

  SdmResult out;
  out.prices = s.prices;
  out.assignment = s.match.assigned;
  out.counters = counters;
  Allocation x = Allocation::zeros(n, m);
  for (std::size_t i = 0; i < n; ++i)
    if (s.match.assigned[i] >= 0) {
      const auto j = static_cast<std::size_t>(s.match.assigned[i]);
      x.x[i][j] = Rat(1) / s.prices[j];
    }
  out.result = make_result(inst, std::move(x));
  return out;
}

}  // namespace detail

/// Strong Demand Matching: prices start at 1, capacities are floor(p_j), and
/// prices of items reachable from unmatched bidders rise until everyone is
/// matched; a matched bidder receives exactly 1/q_j of her item.
inline SdmResult run_sdm(const Instance& inst, std::ostream* trace = nullptr) {
  return detail::run_sdm_impl(inst, std::vector<char>(inst.n, 1),
                              std::vector<Rat>(inst.m, Rat(1)), trace);
}

/// Two-phase variant: a first run with bidder `absent` removed yields prices
/// p', then the full population runs from p'. Produces the same prices and
/// utilities as run_sdm for every choice of absent bidder.
inline SdmResult run_sdm_two_phase(const Instance& inst, std::size_t absent,
                                   std::ostream* trace = nullptr) {
  if (absent >= inst.n) throw DimensionMismatch("run_sdm_two_phase: bidder out of range");
  std::vector<char> without(inst.n, 1);
  without[absent] = 0;
  const SdmResult first =
      detail::run_sdm_impl(inst, std::move(without), std::vector<Rat>(inst.m, Rat(1)), nullptr);
  return detail::run_sdm_impl(inst, std::vector<char>(inst.n, 1), first.prices, trace);
}

}  // namespace fairdiv
