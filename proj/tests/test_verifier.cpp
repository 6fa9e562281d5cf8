#include <catch2/catch.hpp>

#include <sstream>

#include "fairdiv/sw_mechanisms.hpp"
#include "fairdiv/two_item.hpp"
#include "fairdiv/verifier.hpp"

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

// dictatorship for whoever reports the highest value on item 0: blatantly
// manipulable, used to prove the harness can find profitable lies
MechanismResult broken_dictator(const Instance& inst) {
  std::size_t winner = 0;
  for (std::size_t i = 1; i < inst.n; ++i)
    if (inst.v[i][0] > inst.v[winner][0]) winner = i;
  Allocation x = Allocation::zeros(inst.n, inst.m);
  for (std::size_t j = 0; j < inst.m; ++j) x.x[winner][j] = Rat(1);
  return make_result(inst, std::move(x));
}

}  // namespace

TEST_CASE("brute force PF oracle on tiny markets") {
  SECTION("symmetric 2x2") {
    const Instance inst = make({{1, 1}, {1, 1}}, 2);
    const PFSolutionF oracle = brute_force_pf(inst, 100);
    REQUIRE(oracle.utilities[0] == Approx(0.5).margin(0.02));
    REQUIRE(oracle.utilities[1] == Approx(0.5).margin(0.02));
  }
  SECTION("the 2x3 market lands on (0.7, 0.7)") {
    const Instance inst = make({{6, 3, 1}, {2, 3, 5}}, 10);
    const PFSolutionF oracle = brute_force_pf(inst, 200);
    REQUIRE(oracle.utilities[0] == Approx(0.7).margin(0.011));
    REQUIRE(oracle.utilities[1] == Approx(0.7).margin(0.011));
  }
  SECTION("single bidder takes everything") {
    const Instance inst = make({{2, 5, 3}}, 10);
    const PFSolutionF oracle = brute_force_pf(inst, 50);
    REQUIRE(oracle.utilities[0] == Approx(1.0).margin(1e-12));
  }
  SECTION("desk-scale limit is enforced") {
    RatMat raw(7, RatRow(6, Rat(1, 6)));
    REQUIRE_THROWS_AS(brute_force_pf(normalize(raw), 50), std::invalid_argument);
  }
}

TEST_CASE("brute force oracle agrees with the exact solvers") {
  Rng rng(900);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 2 + rng.below(2), m = 2 + rng.below(2);
    const Instance inst = random_instance(rng, n, m);
    const PFSolutionF oracle = brute_force_pf(inst, 200);
    std::vector<double> exact;
    if (n == 2) {
      for (const auto& u : solve_pf_two_bidder(inst).utilities) exact.push_back(u.to_double());
    } else if (m == 2) {
      for (const auto& u : solve_pf_two_item(inst).second.utilities) exact.push_back(u.to_double());
    } else {
      exact = solve_pf(inst).utilities;
    }
    for (std::size_t i = 0; i < n; ++i) {
      CAPTURE(trial, n, m, i);
      REQUIRE(oracle.utilities[i] == Approx(exact[i]).margin(2.0 / 200 + 1e-6));
    }
  }
}

TEST_CASE("the deviation grid covers scalings, swaps and concentrations") {
  const RatRow row{Rat(1, 2), Rat(1, 3), Rat(1, 6)};
  const auto bids = deviation_bids(row);
  REQUIRE(bids.size() >= 3 * 6);  // six factors per positive coordinate, deduplicated
  const RatRow reversed{Rat(1, 6), Rat(1, 3), Rat(1, 2)};
  REQUIRE(std::find(bids.begin(), bids.end(), reversed) != bids.end());
  const RatRow concentrated{Rat(0), Rat(0), Rat(1)};
  REQUIRE(std::find(bids.begin(), bids.end(), concentrated) != bids.end());
}

TEST_CASE("the harness flags a broken mechanism") {
  const Instance inst = make({{2, 3, 5}, {5, 3, 2}}, 10);
  const auto rep = check_truthfulness(broken_dictator, inst);
  REQUIRE(rep.max_gain > Rat(0));
  REQUIRE(rep.bidder == 0);  // loser can win everything by overbidding item 0
}

TEST_CASE("measure_approximation against exact PF references") {
  SECTION("hybrid on equal values against PF welfare") {
    const Instance inst = make({{1, 1}, {1, 1}}, 2);
    const PFSolution pf = solve_pf_two_bidder(inst);
    const Rat pf_sw = pf.utilities[0] + pf.utilities[1];
    const auto [rho, ratio] = measure_approximation(hybrid(inst), inst, pf, pf_sw);
    REQUIRE(ratio == Rat(3, 4));
    REQUIRE(rho == Rat(3, 4));
  }
  SECTION("SI at its worst case for three bidders") {
    const Instance inst = make({{3, 1}, {2, 2}, {1, 3}}, 4);
    const auto pf = solve_pf_two_item(inst).second;
    const auto [rho, ratio] = measure_approximation(si_mechanism(inst), inst, pf, sw_optimum(inst));
    REQUIRE(rho == Rat(3, 4));
    REQUIRE(ratio <= Rat(1));
  }
  SECTION("partial allocation on disjoint supports is lossless") {
    const Instance inst = make({{1, 0}, {0, 1}}, 1);
    const PFSolution pf = solve_pf_two_bidder(inst);
    const auto [rho, ratio] = measure_approximation(partial_allocation(inst), inst, pf, sw_optimum(inst));
    REQUIRE(rho == Rat(1));
    REQUIRE(ratio == Rat(1));
  }
}

TEST_CASE("worst case search is reproducible and keeps exact minima") {
  const Generator gen = [](Rng& rng) { return random_instance(rng, 2, 3); };
  std::ostringstream rec_a, rec_b;
  const WorstCase a = worst_case_search(partial_allocation, gen, 200, 42, &rec_a, "pa");
  const WorstCase b = worst_case_search(partial_allocation, gen, 200, 42, &rec_b, "pa");
  REQUIRE(rec_a.str() == rec_b.str());
  REQUIRE(a.min_rho == b.min_rho);
  REQUIRE(a.rho_trial == b.rho_trial);
  REQUIRE(a.min_rho_exact.has_value());
  // PA's rho equals the rival's PF utility, which is at least 1/2
  REQUIRE(*a.min_rho_exact >= Rat(1, 2));
  REQUIRE(a.min_sw_vs_pf_exact.has_value());
  const WorstCase c = worst_case_search(partial_allocation, gen, 200, 43);
  REQUIRE(c.rho_trial != a.rho_trial);
}

TEST_CASE("worst case search witnesses reproduce their minima") {
  const Generator gen = [](Rng& rng) { return two_item_instance(rng, 2); };
  const WorstCase wc = worst_case_search(two_bidder_two_item, gen, 500, 7, nullptr, "two2");
  const MechanismResult replay = two_bidder_two_item(wc.rho_witness);
  REQUIRE(*replay.rho == *wc.min_rho_exact);
}
