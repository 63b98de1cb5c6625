#pragma once

// Consistent price systems on a scenario tree and the arbitrage dichotomy.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "conic/cone_calculus.hpp"
#include "conic/errors.hpp"
#include "conic/market_model.hpp"
#include "conic/portfolio_engine.hpp"

namespace conic {

/// Z(v, .) per node index.
struct PriceSystem {
  std::vector<Eigen::VectorXd> weights;
};

struct CpsViolation {
  enum class Kind { DualCone, Positivity, Martingale };
  Kind kind = Kind::DualCone;
  int node_id = 0;
  int x = -1, y = -1;
  double residual = 0.0;  // slack (dual cone / positivity) or relative martingale error
};

const char* to_string(CpsViolation::Kind kind);

struct CpsReport {
  std::vector<CpsViolation> violations;
  double min_slack = 0.0;       // smallest dual-cone or positivity slack over all nodes
  double max_martingale = 0.0;  // largest relative martingale residual
  bool ok() const { return violations.empty(); }
};

inline constexpr double kMartingaleTolerance = 1e-10;

/// Interior dual membership with `margin` at every node and the per-asset
/// martingale identity for Z S / S_0 at every non-leaf node.
CpsReport verify_cps(const PriceSystem& z, const MarketScenario& market, double margin,
                     double martingale_tolerance = kMartingaleTolerance);

struct CpsSearch {
  double margin = 0.0;  // optimal uniform slack m
  PriceSystem cps;      // optimizer, normalized so Z(root, 0) = 1
  // Optimal strategy-side multipliers: alpha per node index (transfers)
  // and the objective multiplier gamma = margin.
  std::vector<Eigen::MatrixXd> alpha;
  bool strict(const Tolerances& tol = {}) const { return margin > tol.margin_threshold; }
};

/// Max-margin program over Z with the martingale equalities; solved in its
/// strategy-side form, whose row duals are Z.
CpsSearch find_cps(const MarketScenario& market);

struct SupermartingaleViolation {
  int node_id = 0;
  double value = 0.0;     // Y at the node
  double expected = 0.0;  // conditional expectation of Y at the children
};

struct SupermartingaleReport {
  std::vector<double> y;  // V(v) . Z(v) per node index
  std::vector<SupermartingaleViolation> violations;
  bool ok() const { return violations.empty(); }
};

SupermartingaleReport supermartingale_check(const TransferPlan& plan, const PriceSystem& z,
                                            const MarketScenario& market, double tolerance = 1e-9);

enum class ArbitrageStatus { NoFreeLunch, Arbitrage, Boundary };

const char* to_string(ArbitrageStatus s);

struct ArbitrageResult {
  ArbitrageStatus status = ArbitrageStatus::Boundary;
  double margin = 0.0;
  std::optional<PriceSystem> cps;        // present unless arbitrage
  std::optional<TransferPlan> strategy;  // present on arbitrage
  std::vector<double> leaf_liquidation;  // terminal liquidation values of the strategy, per leaf
  std::vector<double> density;           // dQ/dP per leaf when a strict CPS exists
};

/// Strict CPS when the margin clears the threshold; otherwise a terminal
/// arbitrage (V_T >= 0 at every leaf, positive liquidation somewhere),
/// re-simulated before it is returned. Boundary: neither exists.
ArbitrageResult detect_arbitrage(const MarketScenario& market, const Tolerances& tol = {});

struct RobustReport {
  double k = 0.0;
  double margin_original = 0.0;
  double margin_shrunk = 0.0;
  ArbitrageStatus shrunk_status = ArbitrageStatus::Boundary;
  bool holds = false;
  // Smallest interior slack of the shrunk CPS against the original cones.
  double original_slack = 0.0;
  std::optional<PriceSystem> cps;
};

RobustReport nflvr_eps_check(const MarketScenario& market, double k, const Tolerances& tol = {});

}  // namespace conic
