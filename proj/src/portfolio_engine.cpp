#include "conic/portfolio_engine.hpp"

#include <cmath>
#include <string>

#include "conic/simplex.hpp"

namespace conic {

namespace {

Eigen::VectorXd endowment_or_zero(const Eigen::VectorXd& v0, std::size_t n) {
  if (v0.size() == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (v0.size() != static_cast<Eigen::Index>(n)) throw StructuralError("endowment dimension does not match the grid");
  return v0;
}

}  // namespace

void check_plan(const TransferPlan& plan, const MarketScenario& market) {
  const auto n = static_cast<Eigen::Index>(market.assets());
  for (const auto& atom : plan.atoms) {
    if (!market.tree.index_of(atom.node_id))
      throw StructuralError("plan references unknown node " + std::to_string(atom.node_id));
    if (atom.amounts.rows() != n || atom.amounts.cols() != n)
      throw StructuralError("transfer matrix at node " + std::to_string(atom.node_id) + " has wrong dimension");
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y) {
        const double v = atom.amounts(x, y);
        if (!std::isfinite(v) || v < 0.0)
          throw StructuralError("transfer at node " + std::to_string(atom.node_id) + " is negative or not finite");
        if (x == y && v != 0.0)
          throw StructuralError("self-transfer at node " + std::to_string(atom.node_id));
      }
  }
}

std::vector<Eigen::MatrixXd> plan_by_node(const TransferPlan& plan, const MarketScenario& market) {
  check_plan(plan, market);
  const auto n = static_cast<Eigen::Index>(market.assets());
  std::vector<Eigen::MatrixXd> out(market.tree.size(), Eigen::MatrixXd::Zero(n, n));
  for (const auto& atom : plan.atoms) out[std::size_t(market.tree.index_or_throw(atom.node_id))] += atom.amounts;
  return out;
}

double apply_H(const Eigen::VectorXd& f, const Eigen::MatrixXd& lam, int x, int y) {
  if (x == y) throw ParameterError("H is undefined on self-transfers");
  if (x < 0 || y < 0 || x >= f.size() || y >= f.size()) throw StructuralError("asset index out of range");
  return f(y) - (1.0 + lam(x, y)) * f(x);
}

double apply_H(const std::vector<Eigen::VectorXd>& f, const CostSurface& costs, int node, int x, int y) {
  return apply_H(f.at(static_cast<std::size_t>(node)), costs.at(node), x, y);
}

Eigen::VectorXd portfolio_value(const TransferPlan& plan, const Eigen::VectorXd& endowment,
                                const MarketScenario& market, int node_id) {
  check_plan(plan, market);
  const int target = market.tree.index_or_throw(node_id);
  const Eigen::VectorXd& st = market.price(target);
  Eigen::VectorXd value =
      endowment_or_zero(endowment, market.assets()).cwiseProduct(st).cwiseQuotient(market.initial_price());
  for (const auto& atom : plan.atoms) {
    const int s = market.tree.index_or_throw(atom.node_id);
    if (!market.tree.is_ancestor_or_self(s, target)) continue;
    const Eigen::VectorXd net = transfer_effect(atom.amounts, market.lam(s));
    value += net.cwiseProduct(st).cwiseQuotient(market.price(s));
  }
  return value;
}

std::vector<Eigen::VectorXd> portfolio_path(const TransferPlan& plan, const Eigen::VectorXd& endowment,
                                            const MarketScenario& market) {
  const auto by_node = plan_by_node(plan, market);
  const Eigen::VectorXd v0 = endowment_or_zero(endowment, market.assets());
  std::vector<Eigen::VectorXd> out(market.tree.size());
  for (int v : market.tree.order()) {
    const int parent = market.tree.node(v).parent;
    const Eigen::VectorXd carried = parent < 0 ? Eigen::VectorXd(v0.cwiseProduct(market.growth(v)))
                                               : Eigen::VectorXd(out[std::size_t(parent)].cwiseProduct(
                                                     market.carry(parent, v)));
    out[std::size_t(v)] = carried + transfer_effect(by_node[std::size_t(v)], market.lam(v));
  }
  return out;
}

AdmissibilityResult admissibility_check(const TransferPlan& plan, const MarketScenario& market, double c,
                                        const Tolerances& tol) {
  if (!(c >= 0.0)) throw ParameterError("admissibility bound c must be >= 0");
  const auto values = portfolio_path(plan, Eigen::VectorXd(), market);
  const int n = static_cast<int>(market.assets());
  const int nodes = static_cast<int>(market.tree.size());

  // min sum(eta+ + eta-) subject to V_v + r_v (eta+ - eta-) + (node transfers) >= 0.
  lp::LinearProgram<double> prog;
  std::vector<int> up(static_cast<std::size_t>(n)), down(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    up[std::size_t(x)] = prog.add_variable(1.0);
    down[std::size_t(x)] = prog.add_variable(1.0);
  }
  std::vector<int> row_of(static_cast<std::size_t>(nodes * n));
  for (int v = 0; v < nodes; ++v) {
    const Eigen::VectorXd r = market.growth(v);
    const auto& lam = market.lam(v);
    for (int z = 0; z < n; ++z) {
      const int row = prog.add_constraint(lp::Sense::GreaterEqual, -values[std::size_t(v)](z));
      row_of[std::size_t(v * n + z)] = row;
      prog.add_coefficient(row, up[std::size_t(z)], r(z));
      prog.add_coefficient(row, down[std::size_t(z)], -r(z));
    }
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (x == y) continue;
        const int b = prog.add_variable(0.0);
        prog.add_coefficient(row_of[std::size_t(v * n + y)], b, 1.0);
        prog.add_coefficient(row_of[std::size_t(v * n + x)], b, -(1.0 + lam(x, y)));
      }
  }
  const auto sol = prog.solve();
  if (!sol.optimal())
    throw InternalInconsistency(std::string("admissibility program ended with status ") + lp::to_string(sol.status));

  AdmissibilityResult out;
  out.min_norm = sol.objective;
  out.eta = Eigen::VectorXd(n);
  for (int x = 0; x < n; ++x) out.eta(x) = sol.x(up[std::size_t(x)]) - sol.x(down[std::size_t(x)]);
  out.admissible = out.min_norm <= c + tol.feasibility * std::max(1.0, c);
  if (out.admissible) return out;

  double worst = 0.0;
  out.certificate.assign(std::size_t(nodes), Eigen::VectorXd::Zero(n));
  for (int v = 0; v < nodes; ++v) {
    auto& f = out.certificate[std::size_t(v)];
    for (int z = 0; z < n; ++z) f(z) = std::max(0.0, sol.duals(row_of[std::size_t(v * n + z)]));
    const double contribution = f.dot(values[std::size_t(v)]);
    if (out.violated_node_id < 0 || contribution < worst) {
      worst = contribution;
      out.violated_node_id = market.tree.node(v).id;
    }
  }
  return out;
}

std::map<int, Eigen::VectorXd> frictional_surplus(const TransferPlan& plan, const MarketScenario& market, double k) {
  const CostSurface shrunk = shrink_costs(market.costs, k);
  check_plan(plan, market);
  std::map<int, Eigen::VectorXd> out;
  const auto n = static_cast<Eigen::Index>(market.assets());
  for (int leaf : market.tree.leaves()) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd& st = market.price(leaf);
    for (const auto& atom : plan.atoms) {
      const int s = market.tree.index_or_throw(atom.node_id);
      if (!market.tree.is_ancestor_or_self(s, leaf)) continue;
      const Eigen::MatrixXd eps = market.lam(s) - shrunk.at(s);
      for (Eigen::Index x = 0; x < n; ++x) {
        const double carry = st(x) / market.price(s)(x);
        for (Eigen::Index y = 0; y < n; ++y)
          if (x != y) mu(x) += eps(x, y) * carry * atom.amounts(x, y);
      }
    }
    out.emplace(market.tree.node(leaf).id, std::move(mu));
  }
  return out;
}

TransferPlan realize_transfer(const std::vector<TransferTarget>& targets, const MarketScenario& market,
                              const Tolerances& tol) {
  const int n = static_cast<int>(market.assets());
  TransferPlan plan;
  for (const auto& target : targets) {
    const int v = market.tree.index_or_throw(target.node_id);
    if (target.change.size() != n) throw StructuralError("target change has wrong dimension");
    const auto& lam = market.lam(v);
    TransferAtom atom{target.node_id, Eigen::MatrixXd::Zero(n, n)};
    if (target.change.isZero(0.0)) {
      plan.atoms.push_back(std::move(atom));
      continue;
    }
    lp::LinearProgram<double> prog;
    std::vector<int> var(std::size_t(n * n), -1);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (x != y) var[std::size_t(x * n + y)] = prog.add_variable(1.0);
    for (int x = 0; x < n; ++x) {
      const int row = prog.add_constraint(lp::Sense::Equal, target.change(x));
      for (int y = 0; y < n; ++y) {
        if (y == x) continue;
        prog.add_coefficient(row, var[std::size_t(x * n + y)], 1.0 + lam(x, y));
        prog.add_coefficient(row, var[std::size_t(y * n + x)], -1.0);
      }
    }
    const auto sol = prog.solve();
    if (sol.status == lp::Status::Infeasible)
      throw TargetNotReachable(target.node_id, -sol.farkas,
                               "target change at node " + std::to_string(target.node_id) +
                                   " is not generated by any transfer matrix");
    if (!sol.optimal())
      throw InternalInconsistency(std::string("transfer program ended with status ") + lp::to_string(sol.status));
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (x != y) atom.amounts(x, y) = std::max(0.0, sol.x(var[std::size_t(x * n + y)]));
    const Eigen::VectorXd residual = -transfer_effect(atom.amounts, lam) - target.change;
    const double scale = std::max(1.0, target.change.cwiseAbs().maxCoeff());
    if (residual.cwiseAbs().maxCoeff() > tol.feasibility * scale)
      throw InternalInconsistency("realized transfer misses its target at node " + std::to_string(target.node_id));
    plan.atoms.push_back(std::move(atom));
  }
  return plan;
}

}  // namespace conic
