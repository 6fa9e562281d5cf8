#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "fairdiv/core.hpp"

namespace fairdiv {

/// splitmix64; self-contained so streams are identical across platforms
/// and trials can be seeded independently of evaluation order.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng for_trial(std::uint64_t seed, std::uint64_t trial) {
    Rng r(seed);
    r.state_ += 0x9e3779b97f4a7c15ULL * (trial + 1);
    r.next();
    return r;
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, n)
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  long range(long lo, long hi) {  // inclusive
    return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

private:
  std::uint64_t state_;
};

/// Uniform sample from the lattice simplex {k/denom : sum = 1}: sorted
/// uniform cut points, row = the gaps. Exact rationals throughout.
inline RatRow random_simplex_row(Rng& rng, std::size_t m, long denom = 1000) {
  std::vector<long> cuts(m + 1);
  cuts[0] = 0;
  cuts[m] = denom;
  for (std::size_t t = 1; t < m; ++t) cuts[t] = rng.range(0, denom);
  std::sort(cuts.begin() + 1, cuts.begin() + static_cast<long>(m));
  RatRow row(m);
  for (std::size_t j = 0; j < m; ++j) row[j] = Rat(cuts[j + 1] - cuts[j], denom);
  return row;
}

inline Instance random_instance(Rng& rng, std::size_t n, std::size_t m, long denom = 1000) {
  RatMat raw(n);
  for (auto& row : raw) row = random_simplex_row(rng, m, denom);
  return normalize(raw);
}

/// Rows agree up to +-1/denom jitter on a shared base row.
inline Instance near_tie_instance(Rng& rng, std::size_t n, std::size_t m, long denom = 1000) {
  const RatRow base = random_simplex_row(rng, m, denom);
  RatMat raw(n, base);
  for (auto& row : raw) {
    const std::size_t j = rng.below(m);
    row[j] += Rat(rng.range(0, 2), denom);
  }
  return normalize(raw);
}

/// Bidder i concentrates her value on a dedicated block of items.
inline Instance disjoint_instance(std::size_t n, std::size_t m) {
  if (m < n) throw DimensionMismatch("disjoint_instance: needs m >= n");
  RatMat raw(n, RatRow(m));
  for (std::size_t j = 0; j < m; ++j) raw[j % n][j] = Rat(1);
  return normalize(raw);
}

/// The tight 4-item family for the deterministic dictator game:
/// A = (1-2e, e, e/2, e/2), B = (e, 1-2e, e/2, e/2).
inline Instance epsilon_instance(const Rat& eps) {
  const Rat half = eps / Rat(2);
  RatMat raw{{Rat(1) - Rat(2) * eps, eps, half, half},
             {eps, Rat(1) - Rat(2) * eps, half, half}};
  return normalize(raw);
}

/// Two-item rows (t, 1-t) with t drawn on a fine lattice; `focus` pins one
/// bidder's scaled value near a chosen ratio to probe threshold regions.
inline Instance two_item_instance(Rng& rng, std::size_t n, long denom = 10000) {
  RatMat raw(n);
  for (auto& row : raw) {
    const long t = rng.range(0, denom);
    row = {Rat(t, denom), Rat(denom - t, denom)};
  }
  return normalize(raw);
}

inline Instance two_item_instance_near(Rng& rng, std::size_t n, const Rat& scaled_v,
                                       long denom = 100000, long width = 400) {
  RatMat raw(n);
  for (auto& row : raw) {
    const long t = rng.range(0, denom);
    row = {Rat(t, denom), Rat(denom - t, denom)};
  }
  // one bidder lands near the target scaled value t/(1-t) = v
  const Rat t_star = scaled_v / (scaled_v + Rat(1));
  const long center = static_cast<long>(t_star.to_double() * static_cast<double>(denom));
  const long jitter = rng.range(-width, width);
  long t = std::clamp(center + jitter, 1L, denom - 1);
  raw[rng.below(n)] = {Rat(t, denom), Rat(denom - t, denom)};
  return normalize(raw);
}

/// Strong demand: many bidders per item so PF prices land well above 1.
inline Instance strong_demand_instance(Rng& rng, std::size_t n, std::size_t m, long denom = 1000) {
  if (n < 3 * m) throw DimensionMismatch("strong_demand_instance: needs n >= 3m");
  return random_instance(rng, n, m, denom);
}

/// Two bidders, three items, pinned near the worst case of the PF social
/// welfare ratio (2 + sqrt(3))/4; `digits` sets how closely the irrational
/// knife-edge is approximated. Rows sum to 1 exactly for any approximation.
inline Instance two_bidder_sw_extremal_instance(int digits = 24) {
  const Rat k = (Rat(1) + sqrt_approx(3, digits)) / Rat(2);
  RatMat raw{{k / Rat(2), (Rat(2) - k) / Rat(2), Rat(0)},
             {Rat(1, 2), (Rat(2) - k) / (Rat(2) * k), (k - Rat(1)) / k}};
  return normalize(raw);
}

/// m = 2 instance whose PF allocation has its ratio-defining bidder at
/// sorted position k (1-based) with scaled top value exactly v. Positions
/// before her are firmly Top (scaled value n), later ones firmly Bottom.
inline Instance two_item_rb_instance(std::size_t n, std::size_t k, const Rat& v) {
  if (k < 1 || k > n) throw DimensionMismatch("two_item_rb_instance: k out of range");
  auto scaled_row = [](const Rat& s) { return RatRow{s / (s + Rat(1)), Rat(1) / (s + Rat(1))}; };
  const Rat top_value = Rat(static_cast<long>(n)) + ceil_rat(v);  // above both v and every hi_i
  RatMat raw;
  for (std::size_t i = 1; i < k; ++i) raw.push_back(scaled_row(top_value));
  raw.push_back(scaled_row(v));
  for (std::size_t i = k; i < n; ++i) raw.push_back(scaled_row(v / Rat(2)));
  return normalize(raw);
}

enum class Family { Simplex, NearTie, Disjoint, Epsilon, TwoItem, StrongDemand };

inline Instance generate(Family family, Rng& rng, std::size_t n, std::size_t m) {
  switch (family) {
    case Family::Simplex: return random_instance(rng, n, m);
    case Family::NearTie: return near_tie_instance(rng, n, m);
    case Family::Disjoint: return disjoint_instance(n, std::max(n, m));
    case Family::Epsilon: return epsilon_instance(Rat(1, 1000));
    case Family::TwoItem: return two_item_instance(rng, n);
    case Family::StrongDemand: return strong_demand_instance(rng, n, m);
  }
  throw std::invalid_argument("generate: unknown family");
}

inline const char* family_name(Family f) {
  switch (f) {
    case Family::Simplex: return "simplex";
    case Family::NearTie: return "near-tie";
    case Family::Disjoint: return "disjoint";
    case Family::Epsilon: return "epsilon";
    case Family::TwoItem: return "two-item";
    case Family::StrongDemand: return "strong-demand";
  }
  return "?";
}

}  // namespace fairdiv
