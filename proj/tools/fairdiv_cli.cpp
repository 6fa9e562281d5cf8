#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fairdiv/fairdiv.hpp"

using namespace fairdiv;
using nlohmann::json;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("FAIRDIV_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw CLI::ValidationError("FAIRDIV_SEED", "not an unsigned integer");
    }
  }
  return 0;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << "\n";
}

struct MechanismEntry {
  Mechanism run;
  std::string requires_shape;  // human-readable constraint
  bool (*shape_ok)(const Instance&);
};

const std::map<std::string, MechanismEntry>& mechanisms() {
  static const std::map<std::string, MechanismEntry> table{
      {"pa", {partial_allocation, "requires n=2", [](const Instance& i) { return i.n == 2; }}},
      {"swap", {swap_dictatorial, "requires n=2", [](const Instance& i) { return i.n == 2; }}},
      {"hybrid", {hybrid, "requires n=2", [](const Instance& i) { return i.n == 2; }}},
      {"si", {si_mechanism, "requires m=2", [](const Instance& i) { return i.m == 2; }}},
      {"two2",
       {two_bidder_two_item, "requires n=2 and m=2",
        [](const Instance& i) { return i.n == 2 && i.m == 2; }}},
      {"three2",
       {three_bidder_two_item, "requires n=3 and m=2",
        [](const Instance& i) { return i.n == 3 && i.m == 2; }}},
      {"sdm",
       {[](const Instance& i) { return run_sdm(i).result; }, "any shape",
        [](const Instance&) { return true; }}},
  };
  return table;
}

// exact PF utilities when the shape has an exact solver, floats otherwise
json pf_reference(const Instance& inst, std::vector<double>& utilities_out) {
  json prices = json::array();
  if (inst.n == 2) {
    const auto pf = solve_pf_two_bidder(inst);
    for (const auto& p : pf.prices) prices.push_back(p.str());
    for (const auto& u : pf.utilities) utilities_out.push_back(u.to_double());
  } else if (inst.m == 2) {
    const auto pf = solve_pf_two_item(inst).second;
    for (const auto& p : pf.prices) prices.push_back(p.str());
    for (const auto& u : pf.utilities) utilities_out.push_back(u.to_double());
  } else {
    const auto pf = solve_pf(inst);
    for (double p : pf.prices) prices.push_back(p);
    utilities_out = pf.utilities;
  }
  return prices;
}

int cmd_pf(const std::string& path, double tol, std::optional<int> decimals,
           const std::string& out_path) {
  const Instance inst = parse_instance(path);
  json doc;
  doc["instance"] = instance_to_json(inst);
  EquilibriumReport rep;
  if (inst.n == 2) {
    const auto sol = solve_pf_two_bidder(inst);
    rep = verify_equilibrium(inst, sol);
    doc["solver"] = "exact-two-bidder";
    doc["prices"] = vector_to_json(sol.prices, decimals);
    doc["utilities"] = vector_to_json(sol.utilities, decimals);
    doc["allocation"] = allocation_to_json(to_allocation(sol), decimals);
  } else if (inst.m == 2) {
    const auto [st, sol] = solve_pf_two_item(inst);
    rep = verify_equilibrium(inst, sol);
    doc["solver"] = "exact-two-item";
    doc["prices"] = vector_to_json(sol.prices, decimals);
    doc["utilities"] = vector_to_json(sol.utilities, decimals);
    doc["allocation"] = allocation_to_json(to_allocation(sol), decimals);
    if (st.rb_pos) {
      doc["ratio_defining_bidder"] = st.rb_bidder();
      doc["scaled_value"] = st.v.str();
    }
  } else {
    SolveOptions opts;
    opts.tol = tol;
    const auto sol = solve_pf(inst, opts);
    rep = verify_equilibrium(inst, sol, std::max(tol * 100, 1e-7));
    doc["solver"] = "iterative";
    doc["prices"] = vector_to_json(sol.prices);
    doc["utilities"] = vector_to_json(sol.utilities);
    json rows = json::array();
    for (const auto& row : sol.allocation) rows.push_back(row);
    doc["allocation"] = std::move(rows);
  }
  doc["checks"] = equilibrium_report_to_json(rep);
  emit(doc.dump(2), out_path);
  return rep.ok ? 0 : 1;
}

int cmd_run(const std::string& name, const std::string& path, std::optional<int> decimals,
            const std::string& out_path) {
  const auto it = mechanisms().find(name);
  if (it == mechanisms().end()) throw CLI::ValidationError("--mechanism", "unknown mechanism " + name);
  const Instance inst = parse_instance(path);
  if (!it->second.shape_ok(inst))
    throw CLI::ValidationError("--mechanism", name + " " + it->second.requires_shape + "; instance is " +
                                                  std::to_string(inst.n) + "x" + std::to_string(inst.m));
  const MechanismResult result = it->second.run(inst);

  json doc;
  doc["mechanism"] = name;
  doc["instance"] = instance_to_json(inst);
  doc["allocation"] = allocation_to_json(result.allocation, decimals);
  doc["utilities"] = vector_to_json(result.utility, decimals);
  doc["sw"] = render_rat(result.sw, decimals);
  if (name == "sdm") {
    const SdmResult sdm = run_sdm(inst);
    doc["prices"] = vector_to_json(sdm.prices, decimals);
  } else {
    std::vector<double> unused;
    doc["prices"] = pf_reference(inst, unused);
  }
  if (result.rho) {
    doc["rho"] = render_rat(*result.rho, decimals);
    doc["pf_fractions"] = vector_to_json(result.pf_fraction, decimals);
  } else {
    std::vector<double> pf_utils;
    pf_reference(inst, pf_utils);
    doc["rho"] = pf_fractions(inst, result.allocation, pf_utils).min;
  }
  const bool feasible = result.allocation.feasible();
  doc["checks"] = json{{"feasible", feasible}};
  emit(doc.dump(2), out_path);
  return feasible ? 0 : 1;
}

Generator generator_for(const std::string& mech, std::size_t n, std::size_t m) {
  if (mech == "si") return [n](Rng& rng) { return two_item_instance(rng, n); };
  if (mech == "two2") return [](Rng& rng) { return two_item_instance(rng, 2); };
  if (mech == "three2") return [](Rng& rng) { return two_item_instance(rng, 3); };
  if (mech == "sdm") return [n, m](Rng& rng) { return strong_demand_instance(rng, n, m); };
  return [m](Rng& rng) { return random_instance(rng, 2, m); };
}

// mechanism-specific floor on the exact minimum rho; instance-dependent
// floors (sdm) and non-rho guarantees (swap) are not re-checked here
bool floor_holds(const std::string& mech, const WorstCase& wc, std::size_t n) {
  if (mech == "pa" && wc.min_rho_exact) return *wc.min_rho_exact >= Rat(1, 2);
  if (mech == "hybrid" && wc.min_sw_vs_pf_exact) return *wc.min_sw_vs_pf_exact >= Rat(2, 3);
  if (mech == "si" && wc.min_rho_exact)
    return *wc.min_rho_exact >= Rat(static_cast<long>(n), static_cast<long>(n + 1));
  if (mech == "two2" && wc.min_rho_exact)
    return cmp_sqrt(*wc.min_rho_exact + Rat(2), Rat(8)) >= 0;  // rho >= 2(sqrt 2 - 1)
  if (mech == "three2" && wc.min_rho_exact) {
    const Rat rhs = Rat(12) - Rat(11) * *wc.min_rho_exact;  // rho >= (12 - sqrt 12)/11
    return rhs.sign() <= 0 || cmp_sqrt(rhs, Rat(12)) <= 0;
  }
  return true;
}

int cmd_verify(const std::string& mech, std::uint64_t trials, std::uint64_t seed, std::size_t n,
               std::size_t m, const std::string& witness_dir, const std::string& out_path) {
  if (mechanisms().find(mech) == mechanisms().end())
    throw CLI::ValidationError("--mechanism", "unknown mechanism " + mech);
  std::ostringstream records;
  const WorstCase wc =
      worst_case_search(mechanisms().at(mech).run, generator_for(mech, n, m), trials, seed, &records, mech);

  std::string rho_witness_path = "-";
  if (!witness_dir.empty() && wc.rho_witness.n > 0) {
    rho_witness_path = witness_dir + "/" + mech + "_seed" + std::to_string(seed) + "_rho_witness.json";
    save_instance(wc.rho_witness, rho_witness_path);
  }
  std::ostringstream summary;
  summary << records.str();
  summary << "summary mechanism=" << mech << " seed=" << seed << " trials=" << trials
          << " min_rho=" << (wc.min_rho_exact ? wc.min_rho_exact->str() : "-")
          << " min_sw_vs_opt=" << (wc.min_sw_vs_opt_exact ? wc.min_sw_vs_opt_exact->str() : "-")
          << " min_sw_vs_pf=" << (wc.min_sw_vs_pf_exact ? wc.min_sw_vs_pf_exact->str() : "-")
          << " rho_witness=" << rho_witness_path << "\n";
  emit(summary.str(), out_path);
  return floor_holds(mech, wc, mech == "si" ? n : 2) ? 0 : 1;
}

int cmd_gen(const std::string& family, std::size_t n, std::size_t m, std::uint64_t seed,
            const std::string& out_path) {
  static const std::map<std::string, Family> families{
      {"simplex", Family::Simplex},       {"near-tie", Family::NearTie},
      {"disjoint", Family::Disjoint},     {"epsilon", Family::Epsilon},
      {"two-item", Family::TwoItem},      {"strong-demand", Family::StrongDemand},
  };
  const auto it = families.find(family);
  if (it == families.end()) throw CLI::ValidationError("--family", "unknown family " + family);
  Rng rng(seed);
  const Instance inst = generate(it->second, rng, n, m);
  emit(instance_to_json(inst).dump(2), out_path);
  return 0;
}

int cmd_bench(std::uint64_t seed, const std::string& out_path) {
  std::ostringstream out;
  char line[256];
  out << "mechanism guarantees, measured over seeded random campaigns\n";
  out << "-----------------------------------------------------------------------------\n";
  std::snprintf(line, sizeof line, "%-34s %12s %14s %8s\n", "quantity", "floor", "measured min",
                "trials");
  out << line;
  out << "-----------------------------------------------------------------------------\n";
  auto row = [&](const char* what, double floor, double measured, std::uint64_t trials) {
    std::snprintf(line, sizeof line, "%-34s %12.6f %14.6f %8llu\n", what, floor, measured,
                  static_cast<unsigned long long>(trials));
    out << line;
  };

  {
    const std::uint64_t trials = 2000;
    Rat min_ratio(2);
    for (std::uint64_t t = 0; t < trials; ++t) {
      Rng rng = Rng::for_trial(seed, t);
      const Instance inst = random_instance(rng, 2, 2 + rng.below(5));
      const auto pf = solve_pf_two_bidder(inst);
      min_ratio = min(min_ratio, (pf.utilities[0] + pf.utilities[1]) / sw_optimum(inst));
    }
    row("PF welfare ratio (n=2)", 0.933013, min_ratio.to_double(), trials);
  }
  {
    const Generator gen = [](Rng& rng) { return random_instance(rng, 2, 2 + rng.below(5)); };
    const WorstCase pa = worst_case_search(partial_allocation, gen, 2000, seed);
    row("PA rho", 0.5, pa.min_rho, pa.trials);
    const WorstCase hy = worst_case_search(hybrid, gen, 2000, seed);
    row("hybrid SW vs PF welfare", 2.0 / 3, hy.min_sw_vs_pf, hy.trials);
    row("hybrid SW vs optimum", 0.622008, hy.min_sw_vs_opt, hy.trials);
  }
  for (std::size_t n : {3, 5, 8}) {
    const WorstCase si = worst_case_search(
        [](const Instance& i) { return si_mechanism(i); },
        [n](Rng& rng) { return two_item_instance(rng, n); }, 2000, seed);
    char label[64];
    std::snprintf(label, sizeof label, "SI rho (n=%zu)", n);
    row(label, static_cast<double>(n) / (n + 1), si.min_rho, si.trials);
  }
  {
    const WorstCase two = worst_case_search(
        two_bidder_two_item, [](Rng& rng) { return two_item_instance(rng, 2); }, 4000, seed);
    row("two-bidder two-item rho", 0.828427, two.min_rho, two.trials);
    const WorstCase three = worst_case_search(
        three_bidder_two_item, [](Rng& rng) { return two_item_instance(rng, 3); }, 4000, seed);
    row("three-bidder two-item rho", 0.775991, three.min_rho, three.trials);
  }
  {
    const std::uint64_t trials = 60;
    double min_gap = 1;  // min over instances of (rho - per-instance floor)
    for (std::uint64_t t = 0; t < trials; ++t) {
      Rng rng = Rng::for_trial(seed, t);
      const Instance inst = strong_demand_instance(rng, 9 + rng.below(9), 2);
      const auto pf = solve_pf_two_item(inst).second;
      const SdmResult r = run_sdm(inst);
      double bound = 1;
      for (const auto& p : pf.prices)
        if (p.sign() > 0) bound = std::min(bound, p.to_double() / ceil_rat(p).to_double());
      std::vector<double> pf_utils;
      for (const auto& u : pf.utilities) pf_utils.push_back(u.to_double());
      min_gap = std::min(min_gap, pf_fractions(inst, r.result.allocation, pf_utils).min - bound);
    }
    row("SDM rho minus price floor", 0.0, min_gap, trials);
  }
  out << "-----------------------------------------------------------------------------\n";
  out << "seed " << seed << "\n";
  emit(out.str(), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truthful division of divisible goods: proportional fairness solvers, "
               "approximation mechanisms, and a verification harness"};
  app.require_subcommand(1);
  app.fallthrough(true);  // --out / --decimal may follow the subcommand

  std::string out_path;
  app.add_option("--out", out_path, "write the report to a file instead of stdout");

  int decimal_digits = -1;
  app.add_option("--decimal", decimal_digits, "render rationals as decimals with this many digits");

  auto decimals = [&]() -> std::optional<int> {
    return decimal_digits >= 0 ? std::optional<int>(decimal_digits) : std::nullopt;
  };

  // pf
  std::string pf_file;
  double pf_tol = 1e-9;
  CLI::App* pf = app.add_subcommand("pf", "solve for the proportionally fair allocation and verify it");
  pf->add_option("file", pf_file, "instance JSON")->required();
  pf->add_option("--tol", pf_tol, "iterative solver tolerance");

  // run
  std::string run_mech, run_file;
  CLI::App* run = app.add_subcommand("run", "run a mechanism on an instance");
  run->add_option("--mechanism", run_mech, "pa|swap|hybrid|si|two2|three2|sdm")->required();
  run->add_option("file", run_file, "instance JSON")->required();

  // verify
  std::string verify_mech, witness_dir;
  std::uint64_t trials = 1000, seed = default_seed();
  std::size_t vn = 9, vm = 2;
  CLI::App* verify = app.add_subcommand("verify", "random worst-case campaign for a mechanism");
  verify->add_option("--mechanism", verify_mech, "pa|swap|hybrid|si|two2|three2|sdm")->required();
  verify->add_option("--trials", trials, "number of random instances");
  verify->add_option("--seed", seed, "campaign seed (default: FAIRDIV_SEED or 0)");
  verify->add_option("--n", vn, "bidders (families that take it)");
  verify->add_option("--m", vm, "items (families that take it)");
  verify->add_option("--witness-dir", witness_dir, "directory for worst-instance files");

  // gen
  std::string family = "simplex";
  std::size_t gn = 2, gm = 4;
  std::uint64_t gseed = default_seed();
  CLI::App* gen = app.add_subcommand("gen", "generate a random instance");
  gen->add_option("--family", family, "simplex|near-tie|disjoint|epsilon|two-item|strong-demand");
  gen->add_option("--n", gn, "bidders");
  gen->add_option("--m", gm, "items");
  gen->add_option("--seed", gseed, "generator seed (default: FAIRDIV_SEED or 0)");

  // bench
  std::uint64_t bseed = default_seed();
  CLI::App* bench = app.add_subcommand("bench", "measure every mechanism against its floor");
  bench->add_option("--seed", bseed, "campaign seed (default: FAIRDIV_SEED or 0)");

  try {
    app.parse(argc, argv);
    if (pf->parsed()) return cmd_pf(pf_file, pf_tol, decimals(), out_path);
    if (run->parsed()) return cmd_run(run_mech, run_file, decimals(), out_path);
    if (verify->parsed()) return cmd_verify(verify_mech, trials, seed, vn, vm, witness_dir, out_path);
    if (gen->parsed()) return cmd_gen(family, gn, gm, gseed, out_path);
    if (bench->parsed()) return cmd_bench(bseed, out_path);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateBidder& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
