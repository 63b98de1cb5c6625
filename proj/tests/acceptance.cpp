// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "conic/cone_calculus.hpp"
#include "conic/cps_engine.hpp"
#include "conic/market_model.hpp"
#include "conic/portfolio_engine.hpp"
#include "conic/random.hpp"
#include "oracles.hpp"

using namespace conic;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

MarketScenario random_market(Rng& rng, std::uint64_t seed, int max_assets, int max_depth, int max_branching) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.assets = rng.integer(2, max_assets);
  cfg.depth = rng.integer(1, max_depth);
  cfg.branching = rng.integer(1, max_branching);
  cfg.vol = rng.uniform(0.02, 0.4);
  cfg.cost_lo = rng.uniform(0.005, 0.05);
  cfg.cost_hi = cfg.cost_lo + rng.uniform(0.0, 0.2);
  cfg.per_node_costs = rng.uniform() < 0.5;
  cfg.martingale = rng.uniform() < 0.5;
  return generate_market(cfg);
}

// 1. Primal and dual liquidation programs agree.
Outcome ac1() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = rng.integer(2, 12);
    const Eigen::MatrixXd lam = triangle_closure(oracle::random_costs(rng, n, 0.001, 0.4));
    const Eigen::VectorXd nu = oracle::random_vector(rng, n, -2.0, 2.0);
    const Liquidation liq = liquidation_value(nu, lam);
    const double rel = liq.gap() / (1.0 + std::abs(liq.value));
    worst = std::max(worst, rel);
    if (!(liq.gap() <= 1e-8 * (1.0 + std::abs(liq.value)))) ++failures;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {failures == 0 && seconds < 60.0, "500 instances, n <= 12, max relative gap " + fmt("%.3g", worst) + ", " +
                                               std::to_string(failures) + " failures, " + fmt("%.2f", seconds) + " s"};
}

// 2. Solvency agrees with a grid search over netted transfers.
Outcome ac2() {
  Rng rng(1002);
  int disagreements = 0, resampled = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = trial % 2 == 0 ? 2 : 3;
    const int steps = n == 2 ? 20001 : 161;
    while (true) {
      const Eigen::MatrixXd lam = oracle::random_admissible_costs(rng, n);
      Eigen::VectorXd nu = oracle::random_vector(rng, n, -1.0, 1.0);
      nu /= nu.cwiseAbs().sum();
      const double bound = 10.0 * nu.cwiseAbs().sum();
      const auto grid = oracle::grid_solvency(nu, lam, bound, steps);
      const bool grid_solvent = grid.best >= 0.0;
      const bool grid_insolvent = grid.best < -grid.resolution;
      if (!grid_solvent && !grid_insolvent) {
        ++resampled;  // within gridding error of the boundary: the oracle cannot decide
        continue;
      }
      if (solvency_membership(nu, lam).solvent != grid_solvent) ++disagreements;
      break;
    }
  }
  return {disagreements == 0, "200 portfolios, n <= 3, " + std::to_string(disagreements) + " disagreements, " +
                                  std::to_string(resampled) + " undecidable draws resampled"};
}

// 3. Liquidity floor bounds nonnegative portfolios.
Outcome ac3() {
  Rng rng(1003);
  int failures = 0;
  double slack = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 500; ++trial) {
    const int n = rng.integer(2, 8);
    const Eigen::MatrixXd lam = triangle_closure(oracle::random_costs(rng, n, 0.001, 0.5));
    const Eigen::VectorXd nu = oracle::random_vector(rng, n, 0.0, 3.0);
    const double gap = liquidation_value(nu, lam).value - liquidity_floor(lam) * nu.sum();
    slack = std::min(slack, gap);
    if (gap < -1e-9) ++failures;
  }
  return {failures == 0, "500 portfolios, min slack " + fmt("%.3g", slack) + ", " + std::to_string(failures) + " failures"};
}

// 4. Triangle closure is closed, idempotent and matches path enumeration.
Outcome ac4() {
  Rng rng(1004);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.integer(2, 6);
    const Eigen::MatrixXd lam = oracle::random_costs(rng, n, 0.0, 0.6);
    const Eigen::MatrixXd closed = triangle_closure(lam);
    const Eigen::MatrixXd twice = triangle_closure(closed);
    const Eigen::MatrixXd expected = oracle::path_enumeration_closure(lam);
    bool ok = oracle::count_triangle_violations(closed, 1e-12) == 0;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        ok = ok && std::abs(twice(x, y) - closed(x, y)) <= 1e-12 * (1.0 + closed(x, y));
        ok = ok && std::abs(closed(x, y) - expected(x, y)) <= 1e-12 * (1.0 + expected(x, y));
      }
    if (!ok) ++failures;
  }
  return {failures == 0, "100 surfaces, n <= 6, " + std::to_string(failures) + " failures"};
}

// 5. Shrunk surfaces stay strict-admissible and strictly cheaper.
Outcome ac5() {
  Rng rng(1005);
  int failures = 0, cases = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.integer(2, 6);
    const Eigen::MatrixXd lam = oracle::random_admissible_costs(rng, n, 0.001, 0.5);
    const CostSurface surface = CostSurface::constant(lam, true);
    for (double k : {0.3, 0.5, 0.9}) {
      ++cases;
      const CostSurface shrunk = shrink_costs(surface, k);
      bool ok = validate_costs(shrunk, true).ok();
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          if (x != y) ok = ok && shrunk.at(0)(x, y) < lam(x, y) && shrunk.at(0)(x, y) > 0.0;
      if (!ok) ++failures;
    }
  }
  return {failures == 0, std::to_string(cases) + " (surface, k) cases, " + std::to_string(failures) + " failures"};
}

// 6. Shrunk-cost value equals original value plus the surplus.
Outcome ac6() {
  Rng rng(1006);
  int failures = 0, negative = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const MarketScenario m = random_market(rng, 6000 + std::uint64_t(trial), 5, 3, 3);
    const TransferPlan plan = oracle::random_plan(rng, m, 0.6, rng.uniform(0.1, 5.0));
    const double k = rng.uniform(0.01, 0.99);
    const MarketScenario shrunk = with_costs(m, shrink_costs(m.costs, k));
    const auto mu = frictional_surplus(plan, m, k);
    for (int leaf : m.tree.leaves()) {
      const int id = m.tree.node(leaf).id;
      const Eigen::VectorXd lhs = oracle::value_by_g_operator(plan, Eigen::VectorXd(), shrunk, id);
      const Eigen::VectorXd rhs = portfolio_value(plan, Eigen::VectorXd(), m, id) + mu.at(id);
      const double err = (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, lhs.cwiseAbs().maxCoeff());
      worst = std::max(worst, err);
      if (err > 1e-12) ++failures;
      if (mu.at(id).minCoeff() < 0.0) ++negative;
    }
  }
  return {failures == 0 && negative == 0, "200 triples, max relative error " + fmt("%.3g", worst) + ", " +
                                              std::to_string(failures) + " identity failures, " +
                                              std::to_string(negative) + " negative surplus entries"};
}

// 7. Solvent under the original costs implies solvent under shrunk costs.
Outcome ac7() {
  Rng rng(1007);
  int violations = 0, trials = 0;
  while (trials < 300) {
    const int n = rng.integer(2, 6);
    const Eigen::MatrixXd lam = oracle::random_admissible_costs(rng, n);
    Eigen::VectorXd nu;
    if (trials % 2 == 0) {
      // Near the boundary: a small nonnegative residue after random transfers.
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          if (x != y && rng.uniform() < 0.5) a(x, y) = rng.uniform();
      nu = oracle::random_vector(rng, n, 0.0, 1e-3) - transfer_effect(a, lam);
    } else {
      nu = oracle::random_vector(rng, n, -1.0, 2.0);
    }
    if (!solvency_membership(nu, lam).solvent) continue;
    ++trials;
    const double k = rng.uniform(0.01, 0.99);
    if (!solvency_membership(nu, shrink_cost_matrix(lam, k)).solvent) ++violations;
  }
  return {violations == 0, "300 solvent portfolios, " + std::to_string(violations) + " violations"};
}

bool verified_arbitrage(const MarketScenario& m, const TransferPlan& plan) {
  bool positive = false;
  for (int leaf : m.tree.leaves()) {
    const Eigen::VectorXd v = oracle::value_by_g_operator(plan, Eigen::VectorXd(), m, m.tree.node(leaf).id);
    if (!solvency_membership(v, m.lam(leaf)).solvent) return false;
    positive = positive || liquidation_value(v, m.lam(leaf)).value > 1e-9;
  }
  return positive;
}

// 8. Exactly one of: strict price system, verified arbitrage.
Outcome ac8() {
  Rng rng(1008);
  int both = 0, neither = 0, strict = 0, arbitrage = 0, errors = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const MarketScenario m = random_market(rng, 8000 + std::uint64_t(trial), 5, 3, 3);
    try {
      const ArbitrageResult r = detect_arbitrage(m);
      const bool has_cps = r.margin > 1e-7 && r.cps && verify_cps(*r.cps, m, r.margin / 2).ok();
      const bool has_arb = r.strategy && verified_arbitrage(m, *r.strategy);
      strict += has_cps;
      arbitrage += has_arb;
      if (has_cps && has_arb) ++both;
      if (!has_cps && !has_arb) ++neither;
    } catch (const InternalInconsistency&) {
      ++errors;
      ++neither;
    }
  }
  // Hand-derived fixtures.
  const auto binomial = detect_arbitrage(oracle::one_period_market({1.2, 0.9}, {0.5, 0.5}, 0.1));
  const auto growth_market = oracle::one_period_market({1.5}, {1.0}, 0.1);
  const auto growth = detect_arbitrage(growth_market);
  const bool fixtures = binomial.status == ArbitrageStatus::NoFreeLunch &&
                        growth.status == ArbitrageStatus::Arbitrage && growth.strategy &&
                        verified_arbitrage(growth_market, *growth.strategy);
  return {both == 0 && neither == 0 && fixtures,
          "300 markets: " + std::to_string(strict) + " strict, " + std::to_string(arbitrage) + " arbitrage, " +
              std::to_string(both) + " both, " + std::to_string(neither) + " neither (" + std::to_string(errors) +
              " internal errors); fixtures " + (fixtures ? "ok" : "wrong")};
}

// 9. V(Z) is a supermartingale for admissible plans.
Outcome ac9() {
  Rng rng(1009);
  int pairs = 0, violations = 0, skipped = 0;
  std::uint64_t seed = 9000;
  while (pairs < 1000 && skipped < 5000) {
    GeneratorConfig cfg;
    cfg.seed = seed++;
    cfg.assets = 4;
    cfg.depth = rng.integer(1, 3);
    cfg.branching = rng.integer(1, 3);
    cfg.vol = rng.uniform(0.02, 0.15);
    cfg.cost_lo = 0.02;
    cfg.cost_hi = 0.1;
    cfg.martingale = rng.uniform() < 0.75;
    const MarketScenario m = generate_market(cfg);
    const CpsSearch search = find_cps(m);
    if (!search.strict() || !verify_cps(search.cps, m, 0.0).ok()) {
      ++skipped;
      continue;
    }
    for (int i = 0; i < 25 && pairs < 1000; ++i) {
      const TransferPlan plan = oracle::random_plan(rng, m, 0.6, rng.uniform(0.1, 3.0));
      const AdmissibilityResult adm = admissibility_check(plan, m, 0.0);
      if (!admissibility_check(plan, m, adm.min_norm).admissible) {
        ++violations;
        continue;
      }
      ++pairs;
      if (!supermartingale_check(plan, search.cps, m, 1e-9).ok()) ++violations;
    }
  }
  return {violations == 0 && pairs == 1000, std::to_string(pairs) + " pairs, " + std::to_string(violations) + " violations, " +
                               std::to_string(skipped) + " markets without a strict system skipped"};
}

// 10. realize_transfer reproduces -L0 o H.
Outcome ac10() {
  Rng rng(1010);
  int failures = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    GeneratorConfig cfg;
    cfg.seed = 10000 + std::uint64_t(trial);
    cfg.assets = rng.integer(2, 8);
    cfg.depth = 1;
    cfg.branching = rng.integer(1, 2);
    cfg.cost_lo = 0.01;
    cfg.cost_hi = 0.3;
    const MarketScenario m = generate_market(cfg);
    const TransferPlan original = oracle::random_plan(rng, m, 1.0, rng.uniform(0.1, 5.0));
    std::vector<TransferTarget> targets;
    for (const auto& atom : original.atoms) {
      const int v = m.tree.index_or_throw(atom.node_id);
      targets.push_back({atom.node_id, -transfer_effect(atom.amounts, m.lam(v))});
    }
    try {
      const TransferPlan plan = realize_transfer(targets, m);
      double err = 0.0;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        const int v = m.tree.index_or_throw(plan.atoms[i].node_id);
        err = std::max(err, (-transfer_effect(plan.atoms[i].amounts, m.lam(v)) - targets[i].change).cwiseAbs().maxCoeff());
      }
      worst = std::max(worst, err);
      if (err > 1e-9) ++failures;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  return {failures == 0, "200 plans, n <= 8, max residual " + fmt("%.3g", worst) + ", " + std::to_string(failures) +
                             " failures"};
}

// 11. The golden CLI suite is byte-for-byte reproducible.
std::vector<std::string> golden_commands() {
  const std::string g = GOLDEN_DIR;
  auto in = [&](const std::string& f) { return g + "/" + f; };
  return {
      "validate " + in("two_asset.json"),
      "validate " + in("triangle.json"),
      "validate " + in("malformed.json"),
      "validate " + in("truncated.json"),
      "liquidate " + in("two_asset.json") + " " + in("long_one.json"),
      "liquidate " + in("two_asset.json") + " " + in("long_one.json") + " --curve 1:-2:2:8 --format csv",
      "solvency " + in("two_asset.json") + " " + in("short_cash.json"),
      "solvency " + in("two_asset.json") + " " + in("covered.json"),
      "closure " + in("triangle.json"),
      "shrink " + in("binomial.json") + " --k 0.5",
      "value " + in("binomial.json") + " " + in("buy_root.json") + " --endowment " + in("long_one.json"),
      "admissible " + in("binomial.json") + " " + in("debt_leaf.json") + " --c 0.5",
      "find-cps " + in("binomial.json"),
      "find-cps " + in("growth.json"),
      "arbitrage " + in("binomial.json"),
      "arbitrage " + in("growth.json"),
      "arbitrage " + in("boundary.json"),
      "rnflvr " + in("binomial.json") + " --k 0.9",
      "rnflvr " + in("boundary.json") + " --k 0.99",
      "rnflvr " + in("binomial.json") + " --k-grid 0.1:0.95:6 --format csv",
      "gen --seed 42 --assets 4 --depth 2 --branching 2",
  };
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool run_suite(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto commands = golden_commands();
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const std::string stem = (dir / ("case" + std::to_string(i))).string();
    const std::string line = std::string(CONICMKT_PATH) + " " + commands[i] + " --report " + stem + ".report.json" +
                             " --out " + stem + ".out.json > " + stem + ".stdout 2> " + stem + ".stderr; echo $? > " +
                             stem + ".code";
    if (std::system(line.c_str()) == -1) return false;
  }
  // The certificate and price-system artifacts feed a second round of checks.
  const std::string g = GOLDEN_DIR;
  const std::vector<std::string> followups = {
      "check-cps " + g + "/binomial.json " + (dir / "case12.out.json").string(),
      "supermartingale " + g + "/binomial.json " + g + "/buy_root.json " + (dir / "case12.out.json").string(),
      "value " + g + "/growth.json " + (dir / "case15.out.json").string(),
  };
  for (std::size_t i = 0; i < followups.size(); ++i) {
    const std::string stem = (dir / ("followup" + std::to_string(i))).string();
    const std::string line = std::string(CONICMKT_PATH) + " " + followups[i] + " > " + stem + ".stdout 2> " + stem +
                             ".stderr; echo $? > " + stem + ".code";
    if (std::system(line.c_str()) == -1) return false;
  }
  return true;
}

Outcome ac11() {
  const fs::path a = fs::current_path() / "golden_run_a", b = fs::current_path() / "golden_run_b";
  if (!run_suite(a) || !run_suite(b)) return {false, "could not launch the CLI"};
  int files = 0, differing = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    const fs::path other = b / entry.path().filename();
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
  }
  std::size_t count_b = 0;
  for ([[maybe_unused]] const auto& entry : fs::directory_iterator(b)) ++count_b;
  if (count_b != std::size_t(files)) ++differing;
  // The follow-up checks must succeed: the artifacts round-trip.
  const bool roundtrip = slurp(a / "followup0.code") == "0\n" && slurp(a / "followup1.code") == "0\n" &&
                         slurp(a / "followup2.code") == "0\n";
  return {differing == 0 && files > 0 && roundtrip,
          std::to_string(files) + " output files compared, " + std::to_string(differing) + " differ; artifact round trip " +
              (roundtrip ? "ok" : "failed")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1  liquidation LP duality", ac1},      {"AC2  solvency vs grid oracle", ac2},
      {"AC3  liquidity floor", ac3},             {"AC4  triangle closure", ac4},
      {"AC5  shrink admissibility", ac5},        {"AC6  surplus identity", ac6},
      {"AC7  cone inclusion under shrink", ac7}, {"AC8  desk-scale FTAP", ac8},
      {"AC9  supermartingale", ac9},             {"AC10 decomposition round trip", ac10},
      {"AC11 CLI determinism", ac11},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %-36s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
