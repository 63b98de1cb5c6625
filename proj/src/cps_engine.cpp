#include "conic/cps_engine.hpp"

#include <cmath>
#include <string>

#include "conic/simplex.hpp"

namespace conic {

const char* to_string(CpsViolation::Kind kind) {
  switch (kind) {
    case CpsViolation::Kind::DualCone: return "dual_cone";
    case CpsViolation::Kind::Positivity: return "positivity";
    case CpsViolation::Kind::Martingale: return "martingale";
  }
  return "unknown";
}

const char* to_string(ArbitrageStatus s) {
  switch (s) {
    case ArbitrageStatus::NoFreeLunch: return "no_free_lunch";
    case ArbitrageStatus::Arbitrage: return "arbitrage";
    case ArbitrageStatus::Boundary: return "boundary";
  }
  return "unknown";
}

namespace {

void check_price_system(const PriceSystem& z, const MarketScenario& market) {
  if (z.weights.size() != market.tree.size())
    throw StructuralError("price system has " + std::to_string(z.weights.size()) + " nodes, market has " +
                          std::to_string(market.tree.size()));
  for (const auto& w : z.weights)
    if (w.size() != static_cast<Eigen::Index>(market.assets()))
      throw StructuralError("price system weight has wrong dimension");
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

CpsReport verify_cps(const PriceSystem& z, const MarketScenario& market, double margin, double martingale_tolerance) {
  check_price_system(z, market);
  const int n = static_cast<int>(market.assets());
  CpsReport report;
  report.min_slack = std::numeric_limits<double>::infinity();
  for (int v : market.tree.order()) {
    const auto& f = z.weights[std::size_t(v)];
    const auto& lam = market.lam(v);
    const int id = market.tree.node(v).id;
    const DualMembership dm = dual_membership(f, lam, margin);
    report.min_slack = std::min(report.min_slack, dm.worst());
    if (!dm.interior()) {
      for (int x = 0; x < n; ++x) {
        if (f(x) <= margin) report.violations.push_back({CpsViolation::Kind::Positivity, id, x, -1, f(x)});
        for (int y = 0; y < n; ++y) {
          if (x == y) continue;
          const double s = (1.0 + lam(x, y)) * f(x) - f(y);
          if (s <= margin) report.violations.push_back({CpsViolation::Kind::DualCone, id, x, y, s});
        }
      }
    }
    const auto& children = market.tree.node(v).children;
    if (children.empty()) continue;
    const Eigen::VectorXd r = market.growth(v);
    for (int x = 0; x < n; ++x) {
      const double lhs = f(x) * r(x);
      double rhs = 0.0;
      for (int c : children) {
        const auto& child = market.tree.node(c);
        rhs += child.prob * z.weights[std::size_t(c)](x) * market.growth(c)(x);
      }
      const double err = relative_gap(lhs, rhs);
      report.max_martingale = std::max(report.max_martingale, err);
      if (err > martingale_tolerance) report.violations.push_back({CpsViolation::Kind::Martingale, id, x, -1, err});
    }
  }
  return report;
}

CpsSearch find_cps(const MarketScenario& market) {
  market.check();
  const auto& tree = market.tree;
  const int n = static_cast<int>(market.assets());
  const int nodes = static_cast<int>(tree.size());
  const int root = tree.root();
  const int cash = static_cast<int>(market.grid.numeraire);

  // Strategy side of: max m s.t. (1+l)Z(x) - Z(y) >= m, Z >= m,
  // Z r martingale, Z(root, cash) = 1. Rows are indexed by (node, asset);
  // their multipliers are -Z.
  lp::LinearProgram<double> prog;
  auto row = [n](int v, int x) { return v * n + x; };
  for (int v = 0; v < nodes; ++v)
    for (int x = 0; x < n; ++x) prog.add_constraint(lp::Sense::Equal, 0.0);
  const int mass = prog.add_constraint(lp::Sense::Equal, 1.0);

  std::vector<std::vector<int>> alpha_var(std::size_t(nodes), std::vector<int>(std::size_t(n * n), -1));
  std::vector<Eigen::VectorXd> growth(static_cast<std::size_t>(nodes));
  for (int v = 0; v < nodes; ++v) growth[std::size_t(v)] = market.growth(v);

  for (int v = 0; v < nodes; ++v) {
    const auto& lam = market.lam(v);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (x == y) continue;
        const int a = prog.add_variable(0.0);
        alpha_var[std::size_t(v)][std::size_t(x * n + y)] = a;
        prog.add_coefficient(row(v, x), a, 1.0 + lam(x, y));
        prog.add_coefficient(row(v, y), a, -1.0);
        prog.add_coefficient(mass, a, 1.0);
      }
    for (int x = 0; x < n; ++x) {
      const int b = prog.add_variable(0.0);
      prog.add_coefficient(row(v, x), b, 1.0);
      prog.add_coefficient(mass, b, 1.0);
    }
    const auto& children = tree.node(v).children;
    if (children.empty()) continue;
    for (int x = 0; x < n; ++x) {
      const int t = prog.add_variable(0.0, true);
      prog.add_coefficient(row(v, x), t, growth[std::size_t(v)](x));
      for (int c : children) prog.add_coefficient(row(c, x), t, -tree.node(c).prob * growth[std::size_t(c)](x));
    }
  }
  const int gamma = prog.add_variable(1.0, true);
  prog.add_coefficient(row(root, cash), gamma, -1.0);

  // Tight pricing: reduced costs of the free martingale columns are the
  // martingale residuals of Z.
  lp::SolverOptions<double> options;
  options.cost_tolerance = 1e-12;
  const auto sol = prog.solve(options);
  if (!sol.optimal())
    throw InternalInconsistency(std::string("price system program ended with status ") + lp::to_string(sol.status));

  CpsSearch out;
  out.margin = sol.x(gamma);
  out.cps.weights.assign(std::size_t(nodes), Eigen::VectorXd(n));
  out.alpha.assign(std::size_t(nodes), Eigen::MatrixXd::Zero(n, n));
  for (int v = 0; v < nodes; ++v)
    for (int x = 0; x < n; ++x) {
      out.cps.weights[std::size_t(v)](x) = -sol.duals(row(v, x));
      for (int y = 0; y < n; ++y)
        if (x != y) out.alpha[std::size_t(v)](x, y) = std::max(0.0, sol.x(alpha_var[std::size_t(v)][std::size_t(x * n + y)]));
    }
  return out;
}

SupermartingaleReport supermartingale_check(const TransferPlan& plan, const PriceSystem& z,
                                            const MarketScenario& market, double tolerance) {
  check_price_system(z, market);
  const auto values = portfolio_path(plan, Eigen::VectorXd(), market);
  SupermartingaleReport report;
  report.y.resize(market.tree.size());
  std::vector<double> scale(market.tree.size());
  for (std::size_t v = 0; v < market.tree.size(); ++v) {
    report.y[v] = values[v].dot(z.weights[v]);
    scale[v] = std::max(1.0, values[v].cwiseProduct(z.weights[v]).cwiseAbs().sum());
  }
  for (int v : market.tree.order()) {
    const auto& children = market.tree.node(v).children;
    if (children.empty()) continue;
    double expected = 0.0;
    double s = scale[std::size_t(v)];
    for (int c : children) {
      expected += market.tree.node(c).prob * report.y[std::size_t(c)];
      s = std::max(s, scale[std::size_t(c)]);
    }
    if (expected > report.y[std::size_t(v)] + tolerance * s)
      report.violations.push_back({market.tree.node(v).id, report.y[std::size_t(v)], expected});
  }
  return report;
}

namespace {

// Largest probability-weighted cash extraction s_l in [0, 1] per leaf with
// V_l - s_l e_0 >= 0 at every leaf; returns the plan when the value is
// positive beyond `threshold`.
std::optional<TransferPlan> terminal_arbitrage_program(const MarketScenario& market, double threshold) {
  const auto& tree = market.tree;
  const int n = static_cast<int>(market.assets());
  const int nodes = static_cast<int>(tree.size());
  const int cash = static_cast<int>(market.grid.numeraire);
  const auto& leaves = tree.leaves();

  lp::LinearProgram<double> prog;
  std::vector<int> leaf_slot(std::size_t(nodes), -1);
  std::vector<int> share(leaves.size());
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    leaf_slot[std::size_t(leaves[l])] = static_cast<int>(l);
    for (int x = 0; x < n; ++x) prog.add_constraint(lp::Sense::GreaterEqual, 0.0);
  }
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    share[l] = prog.add_variable(-tree.path_probability(leaves[l]));
    prog.add_coefficient(static_cast<int>(l) * n + cash, share[l], -1.0);
    const int cap = prog.add_constraint(lp::Sense::LessEqual, 1.0);
    prog.add_coefficient(cap, share[l], 1.0);
  }

  // Leaves below each node, for carrying a transfer to every terminal state.
  std::vector<std::vector<int>> below(static_cast<std::size_t>(nodes));
  for (int leaf : leaves)
    for (int v : tree.path(leaf)) below[std::size_t(v)].push_back(leaf);

  std::vector<std::vector<int>> var(std::size_t(nodes), std::vector<int>(std::size_t(n * n), -1));
  for (int v = 0; v < nodes; ++v) {
    const auto& lam = market.lam(v);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (x == y) continue;
        const int a = prog.add_variable(0.0);
        var[std::size_t(v)][std::size_t(x * n + y)] = a;
        for (int leaf : below[std::size_t(v)]) {
          const int l = leaf_slot[std::size_t(leaf)];
          const Eigen::VectorXd carry = market.carry(v, leaf);
          prog.add_coefficient(l * n + y, a, carry(y));
          prog.add_coefficient(l * n + x, a, -(1.0 + lam(x, y)) * carry(x));
        }
      }
  }
  const auto sol = prog.solve();
  if (!sol.optimal())
    throw InternalInconsistency(std::string("arbitrage program ended with status ") + lp::to_string(sol.status));
  if (-sol.objective <= threshold) return std::nullopt;

  TransferPlan plan;
  for (int v = 0; v < nodes; ++v) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (x != y) a(x, y) = std::max(0.0, sol.x(var[std::size_t(v)][std::size_t(x * n + y)]));
    if (a.maxCoeff() > 0.0) plan.atoms.push_back({tree.node(v).id, std::move(a)});
  }
  return plan;
}

TransferPlan plan_from_multipliers(const MarketScenario& market, const CpsSearch& search) {
  TransferPlan plan;
  const double scale = -search.margin;
  for (std::size_t v = 0; v < market.tree.size(); ++v) {
    const auto& a = search.alpha[v];
    if (a.maxCoeff() <= 0.0) continue;
    plan.atoms.push_back({market.tree.node(int(v)).id, a / (market.tree.path_probability(int(v)) * scale)});
  }
  return plan;
}

// Re-simulates a candidate arbitrage. Returns the terminal liquidation
// values, or nullopt when some leaf is insolvent or none is profitable.
std::optional<std::vector<double>> verify_arbitrage(const TransferPlan& plan, const MarketScenario& market,
                                                    const Tolerances& tol) {
  std::vector<double> liq;
  bool profitable = false;
  for (int leaf : market.tree.leaves()) {
    const Eigen::VectorXd v = portfolio_value(plan, Eigen::VectorXd(), market, market.tree.node(leaf).id);
    Tolerances scaled = tol;
    scaled.feasibility = tol.feasibility * std::max(1.0, v.cwiseAbs().maxCoeff());
    const auto solv = solvency_membership(v, market.lam(leaf), scaled, market.grid.numeraire);
    if (!solv.solvent) return std::nullopt;
    liq.push_back(solv.liquidation);
    if (solv.liquidation > tol.margin_threshold) profitable = true;
  }
  if (!profitable) return std::nullopt;
  return liq;
}

}  // namespace

ArbitrageResult detect_arbitrage(const MarketScenario& market, const Tolerances& tol) {
  const CpsSearch search = find_cps(market);
  ArbitrageResult out;
  out.margin = search.margin;
  if (search.strict(tol)) {
    out.status = ArbitrageStatus::NoFreeLunch;
    out.cps = search.cps;
    const int cash = static_cast<int>(market.grid.numeraire);
    const double z0 = search.cps.weights[std::size_t(market.tree.root())](cash);
    for (int leaf : market.tree.leaves())
      out.density.push_back(search.cps.weights[std::size_t(leaf)](cash) * market.growth(leaf)(cash) / z0);
    return out;
  }

  std::optional<TransferPlan> plan;
  if (search.margin < -tol.margin_threshold) {
    plan = plan_from_multipliers(market, search);
    if (!verify_arbitrage(*plan, market, tol))
      throw InternalInconsistency("strategy extracted from the price system program fails re-simulation");
  } else {
    plan = terminal_arbitrage_program(market, tol.margin_threshold);
  }

  if (!plan) {
    out.status = ArbitrageStatus::Boundary;
    out.cps = search.cps;
    return out;
  }
  auto liq = verify_arbitrage(*plan, market, tol);
  if (!liq) throw InternalInconsistency("arbitrage strategy fails re-simulation");
  out.status = ArbitrageStatus::Arbitrage;
  out.strategy = std::move(plan);
  out.leaf_liquidation = std::move(*liq);
  return out;
}

RobustReport nflvr_eps_check(const MarketScenario& market, double k, const Tolerances& tol) {
  if (!(k > 0.0 && k < 1.0)) throw ParameterError("shrink exponent k must lie in (0, 1)");
  const MarketScenario shrunk = with_costs(market, shrink_costs(market.costs, k));
  RobustReport out;
  out.k = k;
  out.margin_original = find_cps(market).margin;
  const ArbitrageResult res = detect_arbitrage(shrunk, tol);
  out.margin_shrunk = res.margin;
  out.shrunk_status = res.status;
  out.holds = res.status == ArbitrageStatus::NoFreeLunch;
  if (out.holds) {
    const CpsReport check = verify_cps(*res.cps, market, 0.0);
    if (!check.ok())
      throw InternalInconsistency("price system of the shrunk market is not interior for the original costs");
    out.original_slack = check.min_slack;
    out.cps = res.cps;
  }
  return out;
}

}  // namespace conic
