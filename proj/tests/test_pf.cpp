#include <catch2/catch.hpp>

#include "fairdiv/pf.hpp"
#include "fairdiv/random.hpp"

using namespace fairdiv;

namespace {

Instance make(std::initializer_list<std::initializer_list<long>> rows, long denom) {
  RatMat raw;
  for (const auto& r : rows) {
    RatRow row;
    for (long e : r) row.push_back(Rat(e, denom));
    raw.push_back(row);
  }
  return normalize(raw);
}

// random feasible allocation on the rational lattice
Allocation random_feasible(Rng& rng, std::size_t n, std::size_t m, long denom = 16) {
  Allocation x = Allocation::zeros(n, m);
  for (std::size_t j = 0; j < m; ++j) {
    long left = denom;
    for (std::size_t i = 0; i < n && left > 0; ++i) {
      const long take = rng.range(0, left);
      x.x[i][j] = Rat(take, denom);
      left -= take;
    }
  }
  return x;
}

}  // namespace

TEST_CASE("iterative solver on the symmetric 2x2 market") {
  const Instance inst = make({{1, 1}, {1, 1}}, 2);
  const PFSolutionF sol = solve_pf(inst);
  REQUIRE(sol.prices[0] == Approx(1.0).margin(1e-7));
  REQUIRE(sol.prices[1] == Approx(1.0).margin(1e-7));
  REQUIRE(sol.utilities[0] == Approx(0.5).margin(1e-7));
  REQUIRE(sol.utilities[1] == Approx(0.5).margin(1e-7));
}

TEST_CASE("iterative solver with one item prices at n") {
  RatMat raw(5, RatRow{Rat(1)});
  const Instance inst = normalize(raw);
  const PFSolutionF sol = solve_pf(inst);
  REQUIRE(sol.prices[0] == Approx(5.0).margin(1e-7));
  for (double u : sol.utilities) REQUIRE(u == Approx(0.2).margin(1e-8));
}

TEST_CASE("iterative solver matches the hand-solved 2x3 market") {
  const Instance inst = make({{6, 3, 1}, {2, 3, 5}}, 10);
  const PFSolutionF sol = solve_pf(inst);
  REQUIRE(sol.utilities[0] == Approx(0.7).margin(1e-7));
  REQUIRE(sol.utilities[1] == Approx(0.7).margin(1e-7));
}

TEST_CASE("iterative solver output verifies on random instances") {
  Rng rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = random_instance(rng, 4, 4);
    const PFSolutionF sol = solve_pf(inst);
    const EquilibriumReport rep = verify_equilibrium(inst, sol, 1e-6);
    CAPTURE(trial, rep.violations);
    REQUIRE(rep.ok);
  }
}

TEST_CASE("equilibrium utilities are unique across solver starts") {
  Rng rng(7);
  for (int trial = 0; trial < 8; ++trial) {
    const Instance inst = random_instance(rng, 3, 5);
    SolveOptions a, b;
    b.init = SolveOptions::Init::Squares;
    const auto ua = solve_pf(inst, a).utilities;
    const auto ub = solve_pf(inst, b).utilities;
    for (std::size_t i = 0; i < inst.n; ++i) REQUIRE(ua[i] == Approx(ub[i]).margin(1e-6));
  }
}

TEST_CASE("equilibrium utilities survive item permutations") {
  Rng rng(8);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t m = 2 + rng.below(4);
    const Instance inst = random_instance(rng, 3, m);
    RatMat rotated(inst.n, RatRow(m));
    for (std::size_t i = 0; i < inst.n; ++i)
      for (std::size_t j = 0; j < m; ++j) rotated[i][(j + 1) % m] = inst.v[i][j];
    const auto ua = solve_pf(inst).utilities;
    const auto ub = solve_pf(normalize(rotated)).utilities;
    for (std::size_t i = 0; i < inst.n; ++i) REQUIRE(ua[i] == Approx(ub[i]).margin(1e-6));
  }
}

TEST_CASE("two-bidder exact solver on disjoint supports") {
  const Instance inst = make({{1, 0}, {0, 1}}, 1);
  const PFSolution sol = solve_pf_two_bidder(inst);
  REQUIRE(sol.utilities == std::vector<Rat>{Rat(1), Rat(1)});
  REQUIRE(sol.allocation[0][0] == Rat(1));
  REQUIRE(sol.allocation[1][1] == Rat(1));
  REQUIRE(sol.prices == std::vector<Rat>{Rat(1), Rat(1)});
  REQUIRE(verify_equilibrium(inst, sol).ok);
}

TEST_CASE("two-bidder exact solver reproduces the 2x3 split") {
  const Instance inst = make({{6, 3, 1}, {2, 3, 5}}, 10);
  const PFSolution sol = solve_pf_two_bidder(inst);
  REQUIRE(sol.utilities == std::vector<Rat>{Rat(7, 10), Rat(7, 10)});
  REQUIRE(sol.allocation[0][0] == Rat(1));
  REQUIRE(sol.allocation[0][1] == Rat(1, 3));
  REQUIRE(sol.allocation[1][1] == Rat(2, 3));
  REQUIRE(sol.allocation[1][2] == Rat(1));
  REQUIRE(verify_equilibrium(inst, sol).ok);
}

TEST_CASE("two-bidder exact solver verifies on random instances") {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const Instance inst = random_instance(rng, 2, 1 + rng.below(6));
    const PFSolution sol = solve_pf_two_bidder(inst);
    const EquilibriumReport rep = verify_equilibrium(inst, sol);
    CAPTURE(trial, rep.violations);
    REQUIRE(rep.ok);
    REQUIRE(to_allocation(sol).feasible());
  }
}

TEST_CASE("iterative PF nearly dominates every sampled feasible allocation") {
  Rng rng(22);
  for (int trial = 0; trial < 6; ++trial) {
    const Instance inst = random_instance(rng, 3, 4);
    const PFSolutionF sol = solve_pf(inst);
    for (int probe = 0; probe < 15; ++probe) {
      const Allocation other = random_feasible(rng, inst.n, inst.m);
      const auto u_other = bidder_utilities(inst, other);
      double change = 0;
      for (std::size_t i = 0; i < inst.n; ++i)
        change += (u_other[i].to_double() - sol.utilities[i]) / sol.utilities[i];
      REQUIRE(change <= 1e-5);
    }
  }
}

TEST_CASE("exact PF dominates every sampled feasible allocation") {
  // the defining inequality: aggregate proportional change is never positive
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance inst = random_instance(rng, 2, 1 + rng.below(5));
    const PFSolution sol = solve_pf_two_bidder(inst);
    for (int probe = 0; probe < 20; ++probe) {
      const Allocation other = random_feasible(rng, inst.n, inst.m);
      const auto u_other = bidder_utilities(inst, other);
      Rat change;
      for (std::size_t i = 0; i < inst.n; ++i)
        change += (u_other[i] - sol.utilities[i]) / sol.utilities[i];
      REQUIRE(change <= Rat(0));
    }
  }
}

TEST_CASE("scaling one bidder's raw values leaves the solution unchanged") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng, 2, 3);
    RatMat scaled = inst.v;
    const Rat c(rng.range(1, 20), rng.range(1, 7));
    for (auto& e : scaled[rng.below(2)]) e *= c;
    REQUIRE(normalize(scaled) == inst);
    REQUIRE(solve_pf_two_bidder(normalize(scaled)).utilities == solve_pf_two_bidder(inst).utilities);
  }
}

TEST_CASE("two-bidder PF social welfare stays above the (2+sqrt(3))/4 bound") {
  Rng rng(67);
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = random_instance(rng, 2, 1 + rng.below(6));
    const PFSolution sol = solve_pf_two_bidder(inst);
    const Rat ratio = (sol.utilities[0] + sol.utilities[1]) / sw_optimum(inst);
    // ratio >= (2+sqrt(3))/4  <=>  4*ratio - 2 >= sqrt(3)
    REQUIRE(cmp_sqrt(Rat(4) * ratio - Rat(2), Rat(3)) >= 0);
  }
}

TEST_CASE("the extremal two-bidder instance pins the ratio at ~0.9330127") {
  const Instance inst = two_bidder_sw_extremal_instance();
  const PFSolution sol = solve_pf_two_bidder(inst);
  const Rat ratio = (sol.utilities[0] + sol.utilities[1]) / sw_optimum(inst);
  REQUIRE(ratio.to_double() == Approx(0.9330127018922193).epsilon(1e-9));
}

TEST_CASE("two-item exact solver trivial cases") {
  SECTION("disjoint interests") {
    const Instance inst = make({{1, 0}, {0, 1}}, 1);
    const auto [st, sol] = solve_pf_two_item(inst);
    REQUIRE_FALSE(st.rb_pos.has_value());
    REQUIRE(st.p_t == Rat(1));
    REQUIRE(st.p_b == Rat(1));
    REQUIRE(sol.utilities == std::vector<Rat>{Rat(1), Rat(1)});
  }
  SECTION("symmetric bidders split the items whole") {
    const Instance inst = make({{1, 1}, {1, 1}}, 2);
    const auto [st, sol] = solve_pf_two_item(inst);
    REQUIRE_FALSE(st.rb_pos.has_value());
    REQUIRE(st.p_t == Rat(1));
    REQUIRE(st.p_b == Rat(1));
    REQUIRE(sol.allocation[0][0] == Rat(1));
    REQUIRE(sol.allocation[1][1] == Rat(1));
  }
}

TEST_CASE("two-item exact solver finds the ratio-defining bidder") {
  // scaled top values (3, 1, 1/3)
  const Instance inst = make({{3, 1}, {2, 2}, {1, 3}}, 4);
  const auto [st, sol] = solve_pf_two_item(inst);
  REQUIRE(st.rb_pos.has_value());
  REQUIRE(*st.rb_pos == 1);
  REQUIRE(st.rb_bidder() == 1);
  REQUIRE(st.v == Rat(1));
  REQUIRE(st.x == Rat(1, 2));
  REQUIRE(st.p_t == Rat(3, 2));
  REQUIRE(st.p_b == Rat(3, 2));
  REQUIRE(st.p_t + st.p_b == Rat(3));
  // scaled utility (v+1)/n = 2/3 corresponds to true utility 1/n
  REQUIRE(sol.utilities[1] == Rat(1, 3));
  REQUIRE(sol.utilities[1] / inst.v[1][1] == Rat(2, 3));
  REQUIRE(verify_equilibrium(inst, sol).ok);
}

TEST_CASE("two-item solver satisfies the price identity with an R_b") {
  Rng rng(101);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng.below(6);
    const Instance inst = two_item_instance(rng, n);
    const auto [st, sol] = solve_pf_two_item(inst);
    REQUIRE(st.p_t + st.p_b == Rat(static_cast<long>(n)));
    const EquilibriumReport rep = verify_equilibrium(inst, sol);
    CAPTURE(trial, n, rep.violations);
    REQUIRE(rep.ok);
    if (st.rb_pos) {
      // x = ((n-k+1)v - (k-1)) / (v+1) with k the 1-based position
      const Rat k(static_cast<long>(*st.rb_pos + 1));
      const Rat nn(static_cast<long>(n));
      REQUIRE((k - Rat(1) + st.x) / (nn - k + Rat(1) - st.x) == st.v);
      REQUIRE(st.x > Rat(0));
      REQUIRE(st.x < Rat(1));
      // at most one bidder holds parts of both items
      std::size_t both = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (sol.allocation[i][0].sign() > 0 && sol.allocation[i][1].sign() > 0) ++both;
      REQUIRE(both == 1);
    }
  }
}

TEST_CASE("two-item solver agrees with the two-bidder solver when n = 2") {
  Rng rng(55);
  for (int trial = 0; trial < 80; ++trial) {
    const Instance inst = two_item_instance(rng, 2);
    const auto two_item = solve_pf_two_item(inst).second;
    const auto two_bidder = solve_pf_two_bidder(inst);
    REQUIRE(two_item.utilities == two_bidder.utilities);
  }
}

TEST_CASE("two-item solver agrees with the iterative solver") {
  Rng rng(56);
  for (int trial = 0; trial < 12; ++trial) {
    const Instance inst = two_item_instance(rng, 2 + rng.below(4));
    const auto exact = solve_pf_two_item(inst).second;
    const auto iterative = solve_pf(inst);
    for (std::size_t i = 0; i < inst.n; ++i)
      REQUIRE(exact.utilities[i].to_double() == Approx(iterative.utilities[i]).margin(1e-6));
  }
}

TEST_CASE("two-bidder solver agrees with the iterative solver on wide markets") {
  Rng rng(57);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = random_instance(rng, 2, 3 + rng.below(4));
    const auto exact = solve_pf_two_bidder(inst);
    const auto iterative = solve_pf(inst);
    for (std::size_t i = 0; i < 2; ++i)
      REQUIRE(exact.utilities[i].to_double() == Approx(iterative.utilities[i]).margin(1e-6));
  }
}

TEST_CASE("an R_b placed by construction lands where requested") {
  const Instance inst = two_item_rb_instance(5, 3, Rat(6, 7));
  const auto [st, sol] = solve_pf_two_item(inst);
  REQUIRE(st.rb_pos.has_value());
  REQUIRE(*st.rb_pos == 2);
  REQUIRE(st.v == Rat(6, 7));
  REQUIRE(verify_equilibrium(inst, sol).ok);
}

TEST_CASE("verify_equilibrium flags hand-built violations") {
  const Instance inst = make({{3, 1}, {1, 3}}, 4);
  PFSolution sol;
  sol.prices = {Rat(1), Rat(1)};
  // bidder 0 holds her worst item: MBB violation
  sol.allocation = {{Rat(0), Rat(1)}, {Rat(1), Rat(0)}};
  sol.utilities = {Rat(1, 4), Rat(1, 4)};
  const EquilibriumReport rep = verify_equilibrium(inst, sol);
  REQUIRE_FALSE(rep.ok);
  REQUIRE(rep.mbb_gap > 0);

  PFSolution bad_budget;
  bad_budget.prices = {Rat(1), Rat(1)};
  bad_budget.allocation = {{Rat(1, 2), Rat(0)}, {Rat(1, 2), Rat(1)}};
  bad_budget.utilities = {Rat(3, 8), Rat(7, 8)};
  const EquilibriumReport rep2 = verify_equilibrium(inst, bad_budget);
  REQUIRE_FALSE(rep2.ok);
  REQUIRE(rep2.budget_gap > 0);
}

TEST_CASE("solver failure carries the residual") {
  const Instance inst = make({{6, 3, 1}, {2, 3, 5}}, 10);
  SolveOptions opts;
  opts.max_iter = 1;
  opts.tol = 1e-15;
  REQUIRE_THROWS_AS(solve_pf(inst, opts), SolverFailure);
}
