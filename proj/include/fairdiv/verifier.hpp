#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "fairdiv/core.hpp"
#include "fairdiv/pf.hpp"
#include "fairdiv/random.hpp"

namespace fairdiv {

using Mechanism = std::function<MechanismResult(const Instance&)>;
using Generator = std::function<Instance(Rng&)>;

// ---------------------------------------------------------------------------
// Brute-force PF oracle.
// ---------------------------------------------------------------------------

namespace detail {

// all ways to split `grid` units among n bidders
inline void compositions(long grid, std::size_t n, std::vector<long>& current,
                         const std::function<void(const std::vector<long>&)>& emit) {
  if (current.size() + 1 == n) {
    current.push_back(grid - std::accumulate(current.begin(), current.end(), 0L));
    emit(current);
    current.pop_back();
    return;
  }
  const long used = std::accumulate(current.begin(), current.end(), 0L);
  for (long t = 0; t <= grid - used; ++t) {
    current.push_back(t);
    compositions(grid, n, current, emit);
    current.pop_back();
  }
}

}  // namespace detail

/// Test oracle: maximizes sum_i log v_i(x) over column allocations quantized
/// to multiples of 1/grid, by coordinate ascent over items. Per-column moves
/// enumerate whole compositions for n <= 3 and pairwise transfers above.
/// Utilities land within O(1/grid) of the true PF utilities. Refuses
/// instances beyond desk scale (n > 6 or n*m > 36).
inline PFSolutionF brute_force_pf(const Instance& inst, long grid) {
  const std::size_t n = inst.n, m = inst.m;
  if (n > 6 || n * m > 36)
    throw std::invalid_argument("brute_force_pf: refuses instances beyond desk scale");
  if (grid < 2) throw std::invalid_argument("brute_force_pf: grid too coarse");

  std::vector<std::vector<double>> v(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) v[i][j] = inst.v[i][j].to_double();

  // start from the uniform split so every utility is positive
  std::vector<std::vector<long>> cols(m, std::vector<long>(n, grid / static_cast<long>(n)));
  for (std::size_t j = 0; j < m; ++j) cols[j][0] += grid - grid / static_cast<long>(n) * static_cast<long>(n);
  std::vector<double> utility(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) utility[i] += v[i][j] * static_cast<double>(cols[j][i]) / static_cast<double>(grid);

  auto objective = [&](const std::vector<double>& u) {
    double f = 0;
    for (double x : u) f += std::log(x);
    return f;
  };

  const int max_sweeps = 400;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t j = 0; j < m; ++j) {
      // utilities with column j removed
      std::vector<double> base = utility;
      for (std::size_t i = 0; i < n; ++i)
        base[i] -= v[i][j] * static_cast<double>(cols[j][i]) / static_cast<double>(grid);

      std::vector<long> best_col = cols[j];
      double best_f = objective(utility);
      auto consider = [&](const std::vector<long>& cand) {
        double f = 0;
        for (std::size_t i = 0; i < n; ++i) {
          const double u = base[i] + v[i][j] * static_cast<double>(cand[i]) / static_cast<double>(grid);
          if (u <= 0) return;
          f += std::log(u);
        }
        if (f > best_f + 1e-13) {
          best_f = f;
          best_col = cand;
        }
      };

      if (n <= 3) {
        std::vector<long> current;
        detail::compositions(grid, n, current, consider);
      } else {
        // pairwise transfers within the column
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            for (long t = 1; t <= cols[j][a]; ++t) {
              std::vector<long> cand = cols[j];
              cand[a] -= t;
              cand[b] += t;
              consider(cand);
            }
          }
      }
      if (best_col != cols[j]) {
        changed = true;
        cols[j] = best_col;
        utility = base;
        for (std::size_t i = 0; i < n; ++i)
          utility[i] += v[i][j] * static_cast<double>(cols[j][i]) / static_cast<double>(grid);
      }
    }
    if (!changed) break;
  }

  PFSolutionF sol;
  sol.allocation.assign(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      sol.allocation[i][j] = static_cast<double>(cols[j][i]) / static_cast<double>(grid);
  sol.utilities = utility;
  // shadow prices from the envelope: p_j = max_i v_ij / u_i over holders
  sol.prices.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (cols[j][i] > 0) sol.prices[j] = std::max(sol.prices[j], v[i][j] / utility[i]);
  return sol;
}

// ---------------------------------------------------------------------------
// Markets with certified equilibria.
// ---------------------------------------------------------------------------

struct CertifiedMarket {
  Instance instance;
  PFSolution equilibrium;
};

/// Strong-demand market with an exactly known equilibrium: item j carries a
/// block of single-minded bidders and consecutive items are glued by one
/// indifferent link bidder, so PF prices land on chosen fractional targets
/// p*_j = c_j + (2j+1)/(2m). The returned equilibrium is exact; certify it
/// with verify_equilibrium at tolerance 0. Requires even m and n >= 3m.
inline CertifiedMarket chain_market(std::size_t n, std::size_t m) {
  if (m < 2 || m % 2 != 0) throw DimensionMismatch("chain_market: m must be even and >= 2");
  if (n < 3 * m + m) throw DimensionMismatch("chain_market: needs n >= 4m");
  const long mm = static_cast<long>(m);

  // fractional targets and link spends; alpha_j = sum of r up to j, mod 1
  std::vector<Rat> r(m), alpha(m - 1);
  for (std::size_t j = 0; j < m; ++j) r[j] = Rat(2 * static_cast<long>(j) + 1, 2 * mm);
  Rat run;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    run += r[j];
    alpha[j] = run - floor_rat(run);
    if (alpha[j].is_zero())
      throw std::logic_error("chain_market: degenerate link spend; pick a different m");
  }

  // single-minded block sizes, then absorb the remainder into item 0
  const long want = static_cast<long>(n) - (mm - 1);
  const long base = want / mm;
  std::vector<long> s(m, base);
  for (std::size_t j = 1; j < m; ++j) {
    // block + inflow from link j-1 + own-link spend must hit base + r_j
    const Rat inflow = Rat(1) - alpha[j - 1];
    const Rat own_link = j + 1 < m ? alpha[j] : Rat(0);
    const Rat exact = Rat(base) + r[j] - inflow - own_link;
    if (!exact.is_integer()) throw std::logic_error("chain_market: block size not integral");
    s[j] = static_cast<long>(exact.num().get_si());
  }
  long total = 0;
  for (std::size_t j = 0; j < m; ++j) total += s[j];
  s[0] += want - total;
  if (s[0] <= 0) throw DimensionMismatch("chain_market: n too small for this m");

  std::vector<Rat> target(m);
  target[0] = Rat(s[0]) + alpha[0];
  for (std::size_t j = 1; j + 1 < m; ++j)
    target[j] = Rat(s[j]) + Rat(1) - alpha[j - 1] + alpha[j];
  target[m - 1] = Rat(s[m - 1]) + Rat(1) - alpha[m - 2];

  CertifiedMarket out;
  RatMat raw;
  raw.reserve(n);
  out.equilibrium.allocation.reserve(n);
  out.equilibrium.utilities.reserve(n);
  auto push_bidder = [&](RatRow row, RatRow shares, Rat utility) {
    raw.push_back(std::move(row));
    out.equilibrium.allocation.push_back(std::move(shares));
    out.equilibrium.utilities.push_back(std::move(utility));
  };
  for (std::size_t j = 0; j < m; ++j) {
    RatRow value(m, Rat(0));
    value[j] = Rat(1);
    RatRow share(m, Rat(0));
    share[j] = Rat(1) / target[j];
    for (long t = 0; t < s[j]; ++t) push_bidder(value, share, Rat(1) / target[j]);
    if (j + 1 < m) {
      const Rat scale = target[j] + target[j + 1];
      RatRow link_value(m, Rat(0));
      link_value[j] = target[j] / scale;
      link_value[j + 1] = target[j + 1] / scale;
      RatRow link_share(m, Rat(0));
      link_share[j] = alpha[j] / target[j];
      link_share[j + 1] = (Rat(1) - alpha[j]) / target[j + 1];
      push_bidder(std::move(link_value), std::move(link_share), Rat(1) / scale);
    }
  }
  out.equilibrium.prices = std::move(target);
  out.instance = normalize(raw);
  return out;
}

// ---------------------------------------------------------------------------
// Truthfulness by deviation search.
// ---------------------------------------------------------------------------

/// The deviation grid: multiplicative bumps of each coordinate, the reversed
/// row, and full concentration on each single item. Rows are later
/// re-normalized, so scaling the whole row is pointless and not included.
inline std::vector<RatRow> deviation_bids(const RatRow& row) {
  static const Rat factors[] = {Rat(1, 4), Rat(1, 2), Rat(3, 4), Rat(4, 3), Rat(2), Rat(4)};
  std::vector<RatRow> out;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j].is_zero()) continue;
    for (const Rat& f : factors) {
      RatRow bid = row;
      bid[j] *= f;
      out.push_back(std::move(bid));
    }
  }
  out.emplace_back(row.rbegin(), row.rend());
  for (std::size_t j = 0; j < row.size(); ++j) {
    RatRow bid(row.size(), Rat(0));
    bid[j] = Rat(1);
    out.push_back(std::move(bid));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct TruthfulnessReport {
  Rat max_gain;           // best improvement in true utility over bidding truthfully
  std::size_t bidder = 0;  // who gains it
  RatRow bid;              // with which reported row
  long deviations_tried = 0;
};

/// Replays the mechanism against every deviation bid (others truthful) and
/// scores the deviator by her true valuations. A positive max_gain disproves
/// truthfulness; zero only certifies the tested grid.
inline TruthfulnessReport check_truthfulness(const Mechanism& mech, const Instance& inst,
                                             const std::vector<std::vector<RatRow>>& deviations) {
  if (deviations.size() != inst.n) throw DimensionMismatch("check_truthfulness: deviation list size");
  const MechanismResult honest = mech(inst);
  TruthfulnessReport rep;
  rep.max_gain = Rat(0);
  for (std::size_t i = 0; i < inst.n; ++i) {
    for (const RatRow& bid : deviations[i]) {
      if (bid.size() != inst.m) throw DimensionMismatch("check_truthfulness: bid length");
      bool all_zero = true;
      for (const Rat& e : bid) all_zero = all_zero && e.is_zero();
      if (all_zero) continue;
      RatMat raw = inst.v;
      raw[i] = bid;
      const MechanismResult out = mech(normalize(raw));
      Rat true_utility;
      for (std::size_t j = 0; j < inst.m; ++j) true_utility += inst.v[i][j] * out.allocation.x[i][j];
      rep.deviations_tried += 1;
      const Rat gain = true_utility - honest.utility[i];
      if (gain > rep.max_gain) {
        rep.max_gain = gain;
        rep.bidder = i;
        rep.bid = bid;
      }
    }
  }
  return rep;
}

inline TruthfulnessReport check_truthfulness(const Mechanism& mech, const Instance& inst) {
  std::vector<std::vector<RatRow>> deviations;
  deviations.reserve(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) deviations.push_back(deviation_bids(inst.v[i]));
  return check_truthfulness(mech, inst, deviations);
}

// ---------------------------------------------------------------------------
// Approximation measurement and worst-case campaigns.
// ---------------------------------------------------------------------------

/// (rho, sw_ratio) of a mechanism output against PF utilities and a social
/// welfare yardstick (usually sw_optimum, or the PF welfare).
template <typename T>
std::pair<T, T> measure_approximation(const MechanismResult& out, const Instance& inst,
                                      const BasicPFSolution<T>& pf, const T& sw_opt) {
  const auto frac = pf_fractions(inst, out.allocation, pf.utilities);
  T sw = detail::to_scalar<T>(out.sw);
  return {frac.min, sw / sw_opt};
}

struct WorstCase {
  // doubles for reporting; exact minima kept alongside for exact-path bounds
  double min_rho = std::numeric_limits<double>::infinity();
  double min_sw_vs_opt = std::numeric_limits<double>::infinity();
  double min_sw_vs_pf = std::numeric_limits<double>::infinity();
  std::optional<Rat> min_rho_exact;
  std::optional<Rat> min_sw_vs_opt_exact;
  std::optional<Rat> min_sw_vs_pf_exact;
  Instance rho_witness, sw_witness;
  std::uint64_t rho_trial = 0, sw_trial = 0;
  std::uint64_t trials = 0, seed = 0;
};

/// Seeded random campaign; trial t uses its own generator stream so results
/// are a deterministic fold over trial index regardless of evaluation order.
/// rho comes from the mechanism's own exact PF fractions; the welfare ratio
/// is measured against sw_optimum, and against exact PF welfare when the
/// instance shape has an exact solver (n = 2 or m = 2).
inline WorstCase worst_case_search(const Mechanism& mech, const Generator& gen,
                                   std::uint64_t trials, std::uint64_t seed,
                                   std::ostream* records = nullptr,
                                   const std::string& label = "mechanism") {
  WorstCase wc;
  wc.trials = trials;
  wc.seed = seed;
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng = Rng::for_trial(seed, t);
    const Instance inst = gen(rng);
    const MechanismResult out = mech(inst);

    std::optional<Rat> rho = out.rho;
    std::optional<Rat> pf_sw;
    if (inst.n == 2) {
      const auto pf = solve_pf_two_bidder(inst);
      pf_sw = pf.utilities[0] + pf.utilities[1];
      if (!rho) rho = pf_fractions(inst, out.allocation, pf.utilities).min;
    } else if (inst.m == 2) {
      const auto pf = solve_pf_two_item(inst).second;
      Rat s;
      for (const auto& u : pf.utilities) s += u;
      pf_sw = s;
      if (!rho) rho = pf_fractions(inst, out.allocation, pf.utilities).min;
    }

    const Rat sw_vs_opt = out.sw / sw_optimum(inst);
    if (!wc.min_sw_vs_opt_exact || sw_vs_opt < *wc.min_sw_vs_opt_exact) {
      wc.min_sw_vs_opt_exact = sw_vs_opt;
      wc.min_sw_vs_opt = sw_vs_opt.to_double();
      wc.sw_witness = inst;
      wc.sw_trial = t;
    }
    if (pf_sw) {
      const Rat ratio = out.sw / *pf_sw;
      if (!wc.min_sw_vs_pf_exact || ratio < *wc.min_sw_vs_pf_exact) {
        wc.min_sw_vs_pf_exact = ratio;
        wc.min_sw_vs_pf = ratio.to_double();
      }
    }
    if (rho && (!wc.min_rho_exact || *rho < *wc.min_rho_exact)) {
      wc.min_rho_exact = rho;
      wc.min_rho = rho->to_double();
      wc.rho_witness = inst;
      wc.rho_trial = t;
    }
    if (records)
      *records << "mechanism=" << label << " seed=" << seed << " trial=" << t
               << " rho=" << (rho ? rho->to_double() : std::nan("")) << " sw_ratio="
               << sw_vs_opt.to_double() << "\n";
  }
  return wc;
}

}  // namespace fairdiv
