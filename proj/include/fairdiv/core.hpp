#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairdiv/rational.hpp"

namespace fairdiv {

using RatRow = std::vector<Rat>;
using RatMat = std::vector<RatRow>;

class DegenerateBidder : public std::runtime_error {
public:
  explicit DegenerateBidder(std::size_t bidder)
      : std::runtime_error("bidder " + std::to_string(bidder) + " has an all-zero valuation row"),
        bidder_(bidder) {}
  std::size_t bidder() const { return bidder_; }

private:
  std::size_t bidder_;
};

class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A market of n bidders and m divisible items. Valuations are exact
/// rationals and every row sums to exactly 1; construct via normalize().
struct Instance {
  std::size_t n = 0;
  std::size_t m = 0;
  RatMat v;

  const Rat& value(std::size_t i, std::size_t j) const { return v[i][j]; }

  bool is_normalized() const {
    for (const auto& row : v) {
      Rat sum;
      bool any_negative = false;
      for (const auto& e : row) {
        sum += e;
        any_negative = any_negative || e.sign() < 0;
      }
      if (any_negative || sum != Rat(1)) return false;
    }
    return true;
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    return a.n == b.n && a.m == b.m && a.v == b.v;
  }
};

/// Fractions x[i][j] of item j handed to bidder i. Column sums may be
/// below 1: leftovers are simply discarded, never given to a phantom bidder.
struct Allocation {
  std::size_t n = 0;
  std::size_t m = 0;
  RatMat x;

  static Allocation zeros(std::size_t n, std::size_t m) {
    return Allocation{n, m, RatMat(n, RatRow(m))};
  }

  bool feasible() const {
    for (const auto& row : x)
      for (const auto& e : row)
        if (e.sign() < 0 || e > Rat(1)) return false;
    for (std::size_t j = 0; j < m; ++j) {
      Rat col;
      for (std::size_t i = 0; i < n; ++i) col += x[i][j];
      if (col > Rat(1)) return false;
    }
    return true;
  }

  friend bool operator==(const Allocation& a, const Allocation& b) {
    return a.n == b.n && a.m == b.m && a.x == b.x;
  }
};

struct MechanismResult {
  Allocation allocation;
  std::vector<Rat> utility;      // v_i(x), exact
  Rat sw;                        // sum of utilities
  std::vector<Rat> pf_fraction;  // rho_i; empty when the mechanism has no exact PF reference
  std::optional<Rat> rho;        // min_i pf_fraction[i]
};

/// Scales every row to sum exactly 1. Throws DegenerateBidder on all-zero
/// rows, DimensionMismatch on ragged/empty input or negative entries.
inline Instance normalize(const RatMat& raw) {
  if (raw.empty() || raw.front().empty()) throw DimensionMismatch("normalize: empty matrix");
  const std::size_t n = raw.size();
  const std::size_t m = raw.front().size();
  Instance inst{n, m, RatMat(n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i].size() != m) throw DimensionMismatch("normalize: ragged row " + std::to_string(i));
    Rat sum;
    for (const auto& e : raw[i]) {
      if (e.sign() < 0) throw DimensionMismatch("normalize: negative valuation in row " + std::to_string(i));
      sum += e;
    }
    if (sum.is_zero()) throw DegenerateBidder(i);
    inst.v[i].reserve(m);
    for (const auto& e : raw[i]) inst.v[i].push_back(e / sum);
  }
  return inst;
}

inline void require_shape(const Instance& inst, const Allocation& x) {
  if (inst.n != x.n || inst.m != x.m) throw DimensionMismatch("instance/allocation shape mismatch");
}

inline std::vector<Rat> bidder_utilities(const Instance& inst, const Allocation& x) {
  require_shape(inst, x);
  std::vector<Rat> u(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i)
    for (std::size_t j = 0; j < inst.m; ++j) u[i] += inst.v[i][j] * x.x[i][j];
  return u;
}

inline Rat social_welfare(const Instance& inst, const Allocation& x) {
  Rat sw;
  for (const auto& u : bidder_utilities(inst, x)) sw += u;
  return sw;
}

template <typename T>
struct PfFractionReport {
  std::vector<T> per_bidder;
  T min;
};

/// rho_i = v_i(x) / v_i(x_PF), plus the minimum over bidders. The PF
/// utilities must all be positive (guaranteed for non-degenerate rows).
inline PfFractionReport<Rat> pf_fractions(const Instance& inst, const Allocation& x,
                                          const std::vector<Rat>& pf_utilities) {
  require_shape(inst, x);
  if (pf_utilities.size() != inst.n) throw DimensionMismatch("pf_fractions: utility vector size");
  const auto u = bidder_utilities(inst, x);
  PfFractionReport<Rat> out;
  out.per_bidder.reserve(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) {
    if (pf_utilities[i].sign() <= 0)
      throw std::invalid_argument("pf_fractions: non-positive PF utility for bidder " + std::to_string(i));
    out.per_bidder.push_back(u[i] / pf_utilities[i]);
  }
  out.min = out.per_bidder.front();
  for (const auto& r : out.per_bidder) out.min = min(out.min, r);
  return out;
}

inline PfFractionReport<double> pf_fractions(const Instance& inst, const Allocation& x,
                                             const std::vector<double>& pf_utilities) {
  require_shape(inst, x);
  if (pf_utilities.size() != inst.n) throw DimensionMismatch("pf_fractions: utility vector size");
  const auto u = bidder_utilities(inst, x);
  PfFractionReport<double> out;
  out.per_bidder.reserve(inst.n);
  for (std::size_t i = 0; i < inst.n; ++i) {
    if (!(pf_utilities[i] > 0.0))
      throw std::invalid_argument("pf_fractions: non-positive PF utility for bidder " + std::to_string(i));
    out.per_bidder.push_back(u[i].to_double() / pf_utilities[i]);
  }
  out.min = out.per_bidder.front();
  for (double r : out.per_bidder) out.min = std::min(out.min, r);
  return out;
}

inline MechanismResult make_result(const Instance& inst, Allocation x) {
  MechanismResult r;
  r.utility = bidder_utilities(inst, x);
  r.allocation = std::move(x);
  for (const auto& u : r.utility) r.sw += u;
  return r;
}

inline void attach_pf_fractions(MechanismResult& r, const Instance& inst,
                                const std::vector<Rat>& pf_utilities) {
  auto rep = pf_fractions(inst, r.allocation, pf_utilities);
  r.pf_fraction = std::move(rep.per_bidder);
  r.rho = rep.min;
}

/// Optimal social welfare: each item goes whole to the bidder valuing it most.
inline Rat sw_optimum(const Instance& inst) {
  Rat sw;
  for (std::size_t j = 0; j < inst.m; ++j) {
    Rat best = inst.v[0][j];
    for (std::size_t i = 1; i < inst.n; ++i) best = max(best, inst.v[i][j]);
    sw += best;
  }
  return sw;
}

}  // namespace fairdiv
