#pragma once

// Discretized market: a finite asset grid, a scenario tree standing in for
// the filtration, node-indexed prices and proportional cost surfaces.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "conic/errors.hpp"

namespace conic {

/// Ordered asset labels (maturities). The numeraire is the liquidation
/// asset; by convention it sits at index 0.
struct AssetGrid {
  std::vector<std::string> labels;
  std::size_t numeraire = 0;

  std::size_t size() const { return labels.size(); }
  std::optional<std::size_t> index_of(std::string_view label) const;
  void check() const;
};

struct TreeNode {
  int id = 0;
  int parent = -1;  // node index, -1 for the root
  int time_index = 0;
  double prob = 1.0;  // transition probability from the parent
  std::vector<int> children;
};

/// Finite filtration. Nodes are kept in the order given, with parents
/// resolved to indices; `order()` is a parents-first traversal.
class ScenarioTree {
 public:
  ScenarioTree() = default;
  /// `parent_ids[i]` is the id of node i's parent, or nullopt for the root.
  ScenarioTree(std::vector<double> times, std::vector<TreeNode> nodes, const std::vector<std::optional<int>>& parent_ids);

  const std::vector<double>& times() const { return times_; }
  int horizon() const { return static_cast<int>(times_.size()) - 1; }
  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int root() const { return root_; }
  bool is_leaf(int index) const { return node(index).children.empty(); }
  std::optional<int> index_of(int id) const;
  int index_or_throw(int id) const;

  const std::vector<int>& order() const { return order_; }
  const std::vector<int>& leaves() const { return leaves_; }
  /// Root-to-node index path, inclusive at both ends.
  std::vector<int> path(int index) const;
  /// Product of transition probabilities along the path.
  double path_probability(int index) const { return path_prob_.at(static_cast<std::size_t>(index)); }
  bool is_ancestor_or_self(int ancestor, int index) const;

 private:
  std::vector<double> times_;
  std::vector<TreeNode> nodes_;
  std::unordered_map<int, int> by_id_;
  std::vector<int> order_;
  std::vector<int> leaves_;
  std::vector<double> path_prob_;
  int root_ = -1;
};

/// Node-indexed price vectors S(node, x) > 0, currency per unit.
struct PriceField {
  std::vector<Eigen::VectorXd> values;
};

/// Rates lambda(x, y) >= 0 per node, either one matrix shared by all nodes
/// or one matrix per node. The diagonal is forced to zero.
class CostSurface {
 public:
  CostSurface() = default;
  static CostSurface constant(Eigen::MatrixXd lam, bool strict = true);
  static CostSurface per_node(std::vector<Eigen::MatrixXd> lams, bool strict = true);

  const Eigen::MatrixXd& at(int node) const {
    return constant_ ? matrices_.front() : matrices_.at(static_cast<std::size_t>(node));
  }
  bool is_constant() const { return constant_; }
  bool strict() const { return strict_; }
  std::size_t dimension() const { return matrices_.empty() ? 0 : static_cast<std::size_t>(matrices_.front().rows()); }
  const std::vector<Eigen::MatrixXd>& matrices() const { return matrices_; }

  template <typename F>
  CostSurface transformed(F&& f) const {
    CostSurface out = *this;
    for (auto& m : out.matrices_) {
      m = f(static_cast<const Eigen::MatrixXd&>(m));
      m.diagonal().setZero();
    }
    return out;
  }

 private:
  std::vector<Eigen::MatrixXd> matrices_;
  bool constant_ = true;
  bool strict_ = true;
};

struct MarketScenario {
  AssetGrid grid;
  ScenarioTree tree;
  PriceField prices;
  CostSurface costs;

  std::size_t assets() const { return grid.size(); }
  const Eigen::VectorXd& price(int node) const { return prices.values.at(static_cast<std::size_t>(node)); }
  const Eigen::VectorXd& initial_price() const { return price(tree.root()); }
  /// S(node) / S_0, the carry factor of one currency unit held since time 0.
  Eigen::VectorXd growth(int node) const { return price(node).cwiseQuotient(initial_price()); }
  /// S(to) / S(from) for an ancestor `from` of `to`.
  Eigen::VectorXd carry(int from, int to) const { return price(to).cwiseQuotient(price(from)); }
  const Eigen::MatrixXd& lam(int node) const { return costs.at(node); }

  /// Throws StructuralError unless dimensions agree, prices are positive and
  /// the tree is well formed.
  void check() const;
};

// ---------------------------------------------------------------------------
// Cost-surface algebra.

struct CostViolation {
  enum class Kind { Negative, ZeroOffDiagonal, Triangle };
  Kind kind = Kind::Negative;
  int node = -1;  // -1: the shared matrix of a constant surface
  int x = 0, y = 0, z = -1;
  double value = 0.0;  // offending 1 + lambda(x, z), or lambda(x, y)
  double bound = 0.0;  // (1 + lambda(x, y)) (1 + lambda(y, z)), or 0
};

const char* to_string(CostViolation::Kind kind);

struct ValidationReport {
  std::vector<CostViolation> violations;
  bool ok() const { return violations.empty(); }
  std::size_t count(CostViolation::Kind kind) const;
};

/// Relative slack below which a triangle violation is treated as rounding.
inline constexpr double kTriangleTolerance = 1e-12;

template <typename Derived>
void validate_cost_matrix(const Eigen::MatrixBase<Derived>& lam, bool strict, int node, ValidationReport& report) {
  using Scalar = typename Derived::Scalar;
  const auto n = lam.rows();
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      const Scalar v = lam(x, y);
      if (v < Scalar(0))
        report.violations.push_back({CostViolation::Kind::Negative, node, int(x), int(y), -1, double(v), 0.0});
      else if (strict && v == Scalar(0))
        report.violations.push_back({CostViolation::Kind::ZeroOffDiagonal, node, int(x), int(y), -1, double(v), 0.0});
    }
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x) continue;
      for (Eigen::Index z = 0; z < n; ++z) {
        if (z == x || z == y) continue;
        const Scalar direct = Scalar(1) + lam(x, z);
        const Scalar via = (Scalar(1) + lam(x, y)) * (Scalar(1) + lam(y, z));
        if (direct - via > Scalar(kTriangleTolerance) * direct)
          report.violations.push_back(
              {CostViolation::Kind::Triangle, node, int(x), int(y), int(z), double(direct), double(via)});
      }
    }
}

/// Lists negative rates, zero off-diagonal rates (strict mode) and triangle
/// violations 1 + l(x,z) > (1 + l(x,y))(1 + l(y,z)).
ValidationReport validate_costs(const CostSurface& costs, bool strict, std::size_t expected_dimension = 0);

/// All-pairs cheapest path closure of the factors 1 + lambda, computed as
/// shortest paths on log(1 + lambda). Never increases an entry.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> triangle_closure(
    const Eigen::MatrixBase<Derived>& lam) {
  using Scalar = typename Derived::Scalar;
  using std::exp;
  using std::log1p;
  using std::expm1;
  const auto n = lam.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) d(x, y) = x == y ? Scalar(0) : log1p(lam(x, y));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y)
        if (d(x, k) + d(k, y) < d(x, y)) d(x, y) = d(x, k) + d(k, y);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y)
      out(x, y) = x == y ? Scalar(0) : std::min<Scalar>(lam(x, y), expm1(d(x, y)));
  return out;
}

CostSurface triangle_closure(const CostSurface& costs);

/// 1 + shrunk(x, y) = (1 + lambda(x, y))^k for k in (0, 1).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> shrink_cost_matrix(
    const Eigen::MatrixBase<Derived>& lam, double k) {
  using Scalar = typename Derived::Scalar;
  using std::expm1;
  using std::log1p;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = lam.unaryExpr(
      [k](Scalar v) { return expm1(Scalar(k) * log1p(v)); });
  out.diagonal().setZero();
  return out;
}

/// Throws ParameterError unless 0 < k < 1 and the surface is strictly
/// admissible.
CostSurface shrink_costs(const CostSurface& costs, double k);

/// The implied reduction eps = lambda - shrunk at one node.
Eigen::MatrixXd shrink_gap(const Eigen::MatrixXd& lam, double k);

MarketScenario with_costs(const MarketScenario& market, CostSurface costs);

struct GeneratorConfig {
  std::uint64_t seed = 0;
  int assets = 2;
  int depth = 1;
  int branching = 2;
  double vol = 0.1;
  double cost_lo = 0.01;
  double cost_hi = 0.05;
  bool per_node_costs = true;
  bool martingale = false;  // recenter shocks so that S / S_0 is a martingale under P
};

/// Random scenario tree with multiplicative lognormal shocks from a
/// deterministic initial curve; the numeraire is flat cash. Costs are drawn
/// in [cost_lo, cost_hi] and triangle-closed. Deterministic in the seed.
MarketScenario generate_market(const GeneratorConfig& config);

}  // namespace conic
