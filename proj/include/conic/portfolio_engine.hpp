#pragma once

// Strategies as nonnegative transfer measures on the scenario tree and the
// portfolio processes they generate.

#include <Eigen/Dense>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "conic/cone_calculus.hpp"
#include "conic/errors.hpp"
#include "conic/market_model.hpp"

namespace conic {

/// Transfers a(x, y) >= 0 executed at one node, in credited currency value.
struct TransferAtom {
  int node_id = 0;
  Eigen::MatrixXd amounts;
};

/// A discrete strategy. Several atoms may share a node; they add up.
struct TransferPlan {
  std::vector<TransferAtom> atoms;

  bool empty() const { return atoms.empty(); }
  /// Disjoint union: the strategy that executes both plans.
  TransferPlan merged(const TransferPlan& other) const {
    TransferPlan out = *this;
    out.atoms.insert(out.atoms.end(), other.atoms.begin(), other.atoms.end());
    return out;
  }
};

/// Structural checks: known nodes, square matrices of the grid size,
/// nonnegative finite entries, zero diagonal.
void check_plan(const TransferPlan& plan, const MarketScenario& market);

/// Summed transfer matrix per node index (zero where the plan is silent).
std::vector<Eigen::MatrixXd> plan_by_node(const TransferPlan& plan, const MarketScenario& market);

/// f(y) - (1 + l(x, y)) f(x).
double apply_H(const Eigen::VectorXd& f, const Eigen::MatrixXd& lam, int x, int y);
/// H at a node index, with f given per node index.
double apply_H(const std::vector<Eigen::VectorXd>& f, const CostSurface& costs, int node, int x, int y);

/// Value vector at one node: endowment and every transfer on the path from
/// the root, each carried forward at its asset's growth.
Eigen::VectorXd portfolio_value(const TransferPlan& plan, const Eigen::VectorXd& endowment,
                                const MarketScenario& market, int node_id);

/// Values at every node (indexed like the tree), built recursively from the
/// parent's value.
std::vector<Eigen::VectorXd> portfolio_path(const TransferPlan& plan, const Eigen::VectorXd& endowment,
                                            const MarketScenario& market);

struct AdmissibilityResult {
  bool admissible = false;
  double min_norm = 0.0;  // least sum |eta(x)| making every node solvent
  Eigen::VectorXd eta;    // optimal shift
  // On failure: node weights f_v in K'_v with sum_v f_v(V_v) = -min_norm and
  // |sum_v (S_v / S_0) f_v| <= 1, so no eta with norm below min_norm works.
  int violated_node_id = -1;
  std::vector<Eigen::VectorXd> certificate;
};

AdmissibilityResult admissibility_check(const TransferPlan& plan, const MarketScenario& market, double c,
                                        const Tolerances& tol = {});

/// Carried cost savings at the horizon when rates drop to the shrunk
/// surface, one vector per leaf (keyed by leaf id).
std::map<int, Eigen::VectorXd> frictional_surplus(const TransferPlan& plan, const MarketScenario& market, double k);

/// Desired account changes at one node.
struct TransferTarget {
  int node_id = 0;
  Eigen::VectorXd change;
};

/// Raised when a target change is not generated by any transfer matrix.
class TargetNotReachable : public std::runtime_error {
 public:
  TargetNotReachable(int node_id, Eigen::VectorXd weight, const std::string& what)
      : std::runtime_error(what), node_id_(node_id), weight_(std::move(weight)) {}
  int node_id() const { return node_id_; }
  /// f with f(y) <= (1 + l(x, y)) f(x) for all pairs and change(f) < 0.
  const Eigen::VectorXd& weight() const { return weight_; }

 private:
  int node_id_;
  Eigen::VectorXd weight_;
};

/// Least-mass L >= 0 at each target node with
///   sum_y (1 + l(x, y)) L(x, y) - sum_y L(y, x) = change(x),
/// that is, transfer_effect(L) = -change.
TransferPlan realize_transfer(const std::vector<TransferTarget>& targets, const MarketScenario& market,
                              const Tolerances& tol = {});

}  // namespace conic
