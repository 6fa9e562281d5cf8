#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fairdiv/core.hpp"

namespace fairdiv {

class SolverFailure : public std::runtime_error {
public:
  SolverFailure(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

/// A proportionally fair outcome: allocation, market-clearing item prices
/// under unit budgets, and the (unique) per-bidder utilities.
template <typename T>
struct BasicPFSolution {
  std::vector<std::vector<T>> allocation;
  std::vector<T> prices;
  std::vector<T> utilities;
};

using PFSolution = BasicPFSolution<Rat>;
using PFSolutionF = BasicPFSolution<double>;

inline Allocation to_allocation(const PFSolution& pf) {
  Allocation a;
  a.n = pf.allocation.size();
  a.m = a.n ? pf.allocation.front().size() : 0;
  a.x = pf.allocation;
  return a;
}

// ---------------------------------------------------------------------------
// General iterative solver (proportional response on the EG objective).
// ---------------------------------------------------------------------------

struct SolveOptions {
  double tol = 1e-9;
  long max_iter = 400000;
  // Alternative starting bids; equilibrium utilities must agree regardless.
  enum class Init { Values, Squares } init = Init::Values;
};

/// Maximizes sum_i log v_i(x) by proportional-response bid updates: each
/// bidder re-spends her unit budget across items in proportion to the
/// utility they yielded. Stops when every bidder's achieved utility is
/// within tol (relatively) of her best bang-per-buck at current prices.
inline PFSolutionF solve_pf(const Instance& inst, const SolveOptions& opts = {}) {
  const std::size_t n = inst.n, m = inst.m;
  std::vector<std::vector<double>> v(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) v[i][j] = inst.v[i][j].to_double();

  std::vector<std::vector<double>> bids(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < m; ++j) {
      bids[i][j] = opts.init == SolveOptions::Init::Values ? v[i][j] : v[i][j] * v[i][j];
      s += bids[i][j];
    }
    for (std::size_t j = 0; j < m; ++j) bids[i][j] /= s;
  }

  std::vector<double> prices(m), utility(n);
  double residual = 1.0;
  for (long it = 0; it < opts.max_iter; ++it) {
    for (std::size_t j = 0; j < m; ++j) {
      prices[j] = 0;
      for (std::size_t i = 0; i < n; ++i) prices[j] += bids[i][j];
    }
    residual = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double u = 0, best_rate = 0;
      for (std::size_t j = 0; j < m; ++j) {
        if (prices[j] > 0) {
          u += v[i][j] * bids[i][j] / prices[j];
          best_rate = std::max(best_rate, v[i][j] / prices[j]);
        }
      }
      utility[i] = u;
      residual = std::max(residual, (best_rate - u) / best_rate);
    }
    if (residual <= opts.tol) {
      PFSolutionF sol;
      sol.prices = prices;
      sol.utilities = utility;
      sol.allocation.assign(n, std::vector<double>(m, 0.0));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
          if (prices[j] > 0) sol.allocation[i][j] = bids[i][j] / prices[j];
      return sol;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        bids[i][j] = prices[j] > 0 ? v[i][j] * bids[i][j] / prices[j] / utility[i] : 0.0;
  }
  throw SolverFailure("solve_pf: iteration budget exhausted", residual);
}

// ---------------------------------------------------------------------------
// Exact two-bidder solver: frontier scan over the ratio ordering.
// ---------------------------------------------------------------------------

/// Exact PF for n = 2. Items are sorted by v_A/v_B descending (ties keep
/// index order and fall to B); the utility product is maximized over every
/// frontier position with the boundary split solved in closed form.
inline PFSolution solve_pf_two_bidder(const Instance& inst) {
  if (inst.n != 2) throw DimensionMismatch("solve_pf_two_bidder: requires n = 2");
  const std::size_t m = inst.m;
  const RatRow& va = inst.v[0];
  const RatRow& vb = inst.v[1];

  std::vector<std::size_t> order;  // items valued by at least one bidder
  for (std::size_t j = 0; j < m; ++j)
    if (va[j].sign() > 0 || vb[j].sign() > 0) order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    // v_A[x]/v_B[x] > v_A[y]/v_B[y], compared projectively
    return va[x] * vb[y] > va[y] * vb[x];
  });

  const std::size_t f = order.size();
  std::vector<Rat> pref_a(f + 1), suf_b(f + 1);
  for (std::size_t t = 0; t < f; ++t) pref_a[t + 1] = pref_a[t] + va[order[t]];
  for (std::size_t t = f; t-- > 0;) suf_b[t] = suf_b[t + 1] + vb[order[t]];

  struct Best {
    Rat product, split, u_a, u_b;
    std::size_t boundary = 0;
    bool set = false;
  } best;
  for (std::size_t e = 0; e < f; ++e) {
    const Rat& p = va[order[e]];
    const Rat& q = vb[order[e]];
    const Rat a = pref_a[e];
    const Rat b = suf_b[e + 1];
    Rat split;  // fraction of the boundary item that goes to A
    if (q.is_zero())
      split = Rat(1);
    else if (p.is_zero())
      split = Rat(0);
    else {
      split = (p * b + p * q - q * a) / (Rat(2) * p * q);
      split = max(Rat(0), min(Rat(1), split));
    }
    const Rat u_a = a + split * p;
    const Rat u_b = b + (Rat(1) - split) * q;
    const Rat product = u_a * u_b;
    if (!best.set || product > best.product) {
      best = Best{product, split, u_a, u_b, e, true};
    }
  }
  if (!best.set) throw DimensionMismatch("solve_pf_two_bidder: no valued items");

  PFSolution sol;
  sol.allocation.assign(2, RatRow(m));
  sol.prices.assign(m, Rat(0));
  sol.utilities = {best.u_a, best.u_b};
  for (std::size_t t = 0; t < f; ++t) {
    const std::size_t j = order[t];
    if (t < best.boundary) {
      sol.allocation[0][j] = Rat(1);
      sol.prices[j] = va[j] / best.u_a;
    } else if (t > best.boundary) {
      sol.allocation[1][j] = Rat(1);
      sol.prices[j] = vb[j] / best.u_b;
    } else {
      sol.allocation[0][j] = best.split;
      sol.allocation[1][j] = Rat(1) - best.split;
      sol.prices[j] = best.split == Rat(1)   ? va[j] / best.u_a
                      : best.split == Rat(0) ? vb[j] / best.u_b
                                             : va[j] / best.u_a;
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Exact two-item solver: sorted scaled values and the ratio-defining bidder.
// ---------------------------------------------------------------------------

/// Structure of a two-item PF allocation. Bidders are sorted by their
/// scaled top-item value (bottom scaled to 1, compared projectively so a
/// zero bottom value acts as infinity). At most one bidder, the ratio
/// defining bidder, holds parts of both items; `rb_pos` is her position in
/// `order` when she exists, and prices follow p_t = k-1+x, p_b = n-k+1-x.
struct TwoItemPF {
  std::vector<std::size_t> order;   // bidder ids, scaled top value descending
  std::optional<std::size_t> rb_pos;  // 0-based position in `order`
  std::size_t top_count = 0;        // bidders fully on top (k-1 with an R_b)
  Rat v;                            // R_b's scaled top value, when she exists
  Rat x;                            // R_b's spend on the top item
  Rat p_t, p_b;                     // item prices, p_t + p_b = n

  std::size_t rb_bidder() const { return order[*rb_pos]; }
};

namespace detail {

// x(k) = ((n-k+1)a - (k-1)b) / (a+b) for the k-th sorted bidder (1-based),
// her spend on the top item if she were the ratio-defining bidder.
inline Rat rb_spend(std::size_t n, std::size_t k, const Rat& a, const Rat& b) {
  return (Rat(static_cast<long>(n - k + 1)) * a - Rat(static_cast<long>(k - 1)) * b) / (a + b);
}

}  // namespace detail

inline std::pair<TwoItemPF, PFSolution> solve_pf_two_item(const Instance& inst) {
  if (inst.m != 2) throw DimensionMismatch("solve_pf_two_item: requires m = 2");
  const std::size_t n = inst.n;

  TwoItemPF out;
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t x, std::size_t y) {
    // a_x/b_x > a_y/b_y projectively; zero bottom value sorts first
    return inst.v[x][0] * inst.v[y][1] > inst.v[y][0] * inst.v[x][1];
  });

  // Binary search for the first sorted position whose spend x(k) < 1; the
  // predicate is monotone since scaled values fall and the intervals rise.
  std::size_t lo = 1, hi = n + 1;  // 1-based k; hi means "no position found"
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto& row = inst.v[out.order[mid - 1]];
    if (detail::rb_spend(n, mid, row[0], row[1]) < Rat(1))
      hi = mid;
    else
      lo = mid + 1;
  }

  if (lo == n + 1) {
    // Everyone fully on top (all bottom values are zero).
    out.top_count = n;
    out.p_t = Rat(static_cast<long>(n));
    out.p_b = Rat(0);
  } else {
    const auto& row = inst.v[out.order[lo - 1]];
    const Rat spend = detail::rb_spend(n, lo, row[0], row[1]);
    if (spend.sign() > 0) {
      out.rb_pos = lo - 1;
      out.top_count = lo - 1;
      out.v = row[0] / row[1];
      out.x = spend;
      out.p_t = Rat(static_cast<long>(n)) * row[0];
      out.p_b = Rat(static_cast<long>(n)) * row[1];
    } else {
      // Integral prices; bidder lo sits whole on the bottom item.
      out.top_count = lo - 1;
      out.p_t = Rat(static_cast<long>(lo - 1));
      out.p_b = Rat(static_cast<long>(n - lo + 1));
    }
  }

  PFSolution sol;
  sol.allocation.assign(n, RatRow(2));
  sol.prices = {out.p_t, out.p_b};
  sol.utilities.assign(n, Rat(0));
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = out.order[pos];
    const Rat& a = inst.v[i][0];
    const Rat& b = inst.v[i][1];
    if (out.rb_pos && pos == *out.rb_pos) {
      sol.allocation[i][0] = out.x / out.p_t;
      sol.allocation[i][1] = (Rat(1) - out.x) / out.p_b;
      sol.utilities[i] = Rat(1, static_cast<long>(n));
    } else if (pos < out.top_count) {
      sol.allocation[i][0] = Rat(1) / out.p_t;
      sol.utilities[i] = a / out.p_t;
    } else {
      sol.allocation[i][1] = Rat(1) / out.p_b;
      sol.utilities[i] = b / out.p_b;
    }
  }
  return {out, sol};
}

// ---------------------------------------------------------------------------
// Equilibrium verification.
// ---------------------------------------------------------------------------

struct EquilibriumReport {
  bool ok = true;
  double price_sum_gap = 0;  // |sum p_j - n|
  double budget_gap = 0;     // max_i |spend_i - 1|
  double clearing_gap = 0;   // max over priced items of |column sum - 1|
  double mbb_gap = 0;        // max relative bang-per-buck shortfall on held items
  std::vector<std::string> violations;
};

namespace detail {

template <typename T>
double as_double(const T& x) {
  if constexpr (std::is_same_v<T, Rat>)
    return x.to_double();
  else
    return x;
}

template <typename T>
T scalar_from_double(double x) {
  if constexpr (std::is_same_v<T, Rat>)
    return Rat(mpq_class(x));  // exact binary expansion; exact paths pass tol = 0
  else
    return x;
}

template <typename T>
T abs_scalar(const T& x) {
  if constexpr (std::is_same_v<T, Rat>)
    return abs(x);
  else
    return std::abs(x);
}

template <typename T>
T to_scalar(const Rat& x) {
  if constexpr (std::is_same_v<T, Rat>)
    return x;
  else
    return x.to_double();
}

}  // namespace detail

/// Checks the four PF-solution invariants: prices sum to n, each bidder
/// spends her whole unit budget, priced items clear, and positive holdings
/// are maximum-bang-per-buck. Violations beyond tol are reported with their
/// magnitude; comparisons run in the solution's own scalar type, so exact
/// solutions are judged exactly at tol = 0.
template <typename T>
EquilibriumReport verify_equilibrium(const Instance& inst, const BasicPFSolution<T>& sol,
                                     double tol = 0.0) {
  const std::size_t n = inst.n, m = inst.m;
  const T limit = detail::scalar_from_double<T>(tol);
  EquilibriumReport rep;
  auto note = [&](const T& gap, double& slot, const std::string& what) {
    slot = std::max(slot, detail::as_double(gap));
    if (gap > limit) {
      rep.ok = false;
      rep.violations.push_back(what + " (magnitude " + std::to_string(detail::as_double(gap)) + ")");
    }
  };

  T price_sum{};
  for (const auto& p : sol.prices) price_sum = price_sum + p;
  note(detail::abs_scalar<T>(price_sum - detail::scalar_from_double<T>(static_cast<double>(n))),
       rep.price_sum_gap, "prices do not sum to n");

  for (std::size_t i = 0; i < n; ++i) {
    T spend{};
    for (std::size_t j = 0; j < m; ++j) spend = spend + sol.prices[j] * sol.allocation[i][j];
    note(detail::abs_scalar<T>(spend - detail::scalar_from_double<T>(1.0)), rep.budget_gap,
         "bidder " + std::to_string(i) + " does not spend exactly 1");
  }

  for (std::size_t j = 0; j < m; ++j) {
    if (!(sol.prices[j] > limit)) continue;
    T col{};
    for (std::size_t i = 0; i < n; ++i) col = col + sol.allocation[i][j];
    note(detail::abs_scalar<T>(col - detail::scalar_from_double<T>(1.0)), rep.clearing_gap,
         "priced item " + std::to_string(j) + " is not fully allocated");
  }

  for (std::size_t i = 0; i < n; ++i) {
    // best bang per buck across priced items, in the solution's scalar type
    T best{};
    bool have_best = false, infinite_rate = false;
    for (std::size_t j = 0; j < m; ++j) {
      const T value = detail::to_scalar<T>(inst.v[i][j]);
      if (sol.prices[j] > T{}) {
        const T rate = value / sol.prices[j];
        if (!have_best || rate > best) best = rate;
        have_best = true;
      } else if (value > limit) {
        infinite_rate = true;
      }
    }
    if (infinite_rate) {
      rep.ok = false;
      rep.mbb_gap = 1.0;
      rep.violations.push_back("bidder " + std::to_string(i) + " values a zero-priced item");
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (!(sol.allocation[i][j] > limit) || !(sol.prices[j] > T{})) continue;
      const T rate = detail::to_scalar<T>(inst.v[i][j]) / sol.prices[j];
      const T gap = have_best && best > T{} ? (best - rate) / best : T{};
      note(gap, rep.mbb_gap, "bidder " + std::to_string(i) + " holds non-MBB item " + std::to_string(j));
    }
  }
  return rep;
}

}  // namespace fairdiv
