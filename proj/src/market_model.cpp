#include "conic/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <utility>

#include "conic/random.hpp"

namespace conic {

std::optional<std::size_t> AssetGrid::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return i;
  return std::nullopt;
}

void AssetGrid::check() const {
  if (labels.empty()) throw StructuralError("asset grid is empty");
  if (numeraire >= labels.size()) throw StructuralError("numeraire index out of range");
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      if (labels[i] == labels[j]) throw StructuralError("duplicate asset label '" + labels[i] + "'");
}

ScenarioTree::ScenarioTree(std::vector<double> times, std::vector<TreeNode> nodes,
                           const std::vector<std::optional<int>>& parent_ids)
    : times_(std::move(times)), nodes_(std::move(nodes)) {
  if (times_.empty()) throw StructuralError("time grid is empty");
  for (std::size_t k = 1; k < times_.size(); ++k)
    if (!(times_[k] > times_[k - 1])) throw StructuralError("time grid must be strictly increasing");
  if (times_.front() != 0.0) throw StructuralError("time grid must start at 0");
  if (nodes_.empty()) throw StructuralError("scenario tree has no nodes");
  if (parent_ids.size() != nodes_.size()) throw StructuralError("parent list size mismatch");

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!by_id_.emplace(nodes_[i].id, static_cast<int>(i)).second)
      throw StructuralError("duplicate node id " + std::to_string(nodes_[i].id));
    nodes_[i].children.clear();
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& node = nodes_[i];
    if (!parent_ids[i]) {
      if (root_ >= 0) throw StructuralError("more than one root (nodes " + std::to_string(nodes_[std::size_t(root_)].id) +
                                            " and " + std::to_string(node.id) + ")");
      root_ = static_cast<int>(i);
      node.parent = -1;
      continue;
    }
    auto it = by_id_.find(*parent_ids[i]);
    if (it == by_id_.end())
      throw StructuralError("node " + std::to_string(node.id) + " has unknown parent " + std::to_string(*parent_ids[i]));
    node.parent = it->second;
    nodes_[std::size_t(it->second)].children.push_back(static_cast<int>(i));
  }
  if (root_ < 0) throw StructuralError("scenario tree has no root");
  if (nodes_[std::size_t(root_)].time_index != 0) throw StructuralError("root must have time_index 0");

  const int m = horizon();
  for (const auto& node : nodes_) {
    if (node.time_index < 0 || node.time_index > m)
      throw StructuralError("node " + std::to_string(node.id) + " time_index outside the time grid");
    if (node.parent >= 0 && nodes_[std::size_t(node.parent)].time_index != node.time_index - 1)
      throw StructuralError("node " + std::to_string(node.id) + " is not one step after its parent");
    if (node.parent >= 0 && !(node.prob > 0.0))
      throw StructuralError("node " + std::to_string(node.id) + " has non-positive probability");
    if (node.children.empty() && node.time_index != m)
      throw StructuralError("leaf " + std::to_string(node.id) + " ends before the horizon");
  }
  for (const auto& node : nodes_) {
    if (node.children.empty()) continue;
    double total = 0.0;
    for (int c : node.children) total += nodes_[std::size_t(c)].prob;
    if (std::abs(total - 1.0) > 1e-12)
      throw StructuralError("child probabilities of node " + std::to_string(node.id) + " sum to " +
                            std::to_string(total));
  }

  path_prob_.assign(nodes_.size(), 0.0);
  std::deque<int> queue{root_};
  path_prob_[std::size_t(root_)] = 1.0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    order_.push_back(v);
    const auto& node = nodes_[std::size_t(v)];
    if (node.children.empty()) leaves_.push_back(v);
    for (int c : node.children) {
      path_prob_[std::size_t(c)] = path_prob_[std::size_t(v)] * nodes_[std::size_t(c)].prob;
      queue.push_back(c);
    }
  }
  if (order_.size() != nodes_.size()) throw StructuralError("scenario tree is not connected");
}

std::optional<int> ScenarioTree::index_of(int id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

int ScenarioTree::index_or_throw(int id) const {
  auto idx = index_of(id);
  if (!idx) throw StructuralError("unknown node id " + std::to_string(id));
  return *idx;
}

std::vector<int> ScenarioTree::path(int index) const {
  std::vector<int> out;
  for (int v = index; v >= 0; v = node(v).parent) out.push_back(v);
  std::reverse(out.begin(), out.end());
  return out;
}

bool ScenarioTree::is_ancestor_or_self(int ancestor, int index) const {
  for (int v = index; v >= 0; v = node(v).parent)
    if (v == ancestor) return true;
  return false;
}

CostSurface CostSurface::constant(Eigen::MatrixXd lam, bool strict) {
  if (lam.rows() != lam.cols()) throw StructuralError("cost matrix must be square");
  CostSurface out;
  lam.diagonal().setZero();
  out.matrices_.push_back(std::move(lam));
  out.constant_ = true;
  out.strict_ = strict;
  return out;
}

CostSurface CostSurface::per_node(std::vector<Eigen::MatrixXd> lams, bool strict) {
  if (lams.empty()) throw StructuralError("per-node cost surface needs at least one matrix");
  const auto n = lams.front().rows();
  for (auto& m : lams) {
    if (m.rows() != n || m.cols() != n) throw StructuralError("cost matrices must be square and of equal size");
    m.diagonal().setZero();
  }
  CostSurface out;
  out.matrices_ = std::move(lams);
  out.constant_ = false;
  out.strict_ = strict;
  return out;
}

void MarketScenario::check() const {
  grid.check();
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (prices.values.size() != tree.size())
    throw StructuralError("price field has " + std::to_string(prices.values.size()) + " entries for " +
                          std::to_string(tree.size()) + " nodes");
  for (std::size_t i = 0; i < prices.values.size(); ++i) {
    const auto& s = prices.values[i];
    if (s.size() != n)
      throw StructuralError("prices at node " + std::to_string(tree.node(int(i)).id) + " have wrong dimension");
    for (Eigen::Index x = 0; x < n; ++x)
      if (!(s(x) > 0.0) || !std::isfinite(s(x)))
        throw StructuralError("price at node " + std::to_string(tree.node(int(i)).id) + ", asset '" +
                              grid.labels[std::size_t(x)] + "' is not a positive finite number");
  }
  if (costs.dimension() != grid.size()) throw StructuralError("cost matrix dimension does not match the asset grid");
  if (!costs.is_constant() && costs.matrices().size() != tree.size())
    throw StructuralError("per-node cost surface needs one matrix per node");
  for (const auto& m : costs.matrices())
    if (!m.allFinite()) throw StructuralError("cost matrix has non-finite entries");
}

const char* to_string(CostViolation::Kind kind) {
  switch (kind) {
    case CostViolation::Kind::Negative: return "negative";
    case CostViolation::Kind::ZeroOffDiagonal: return "zero_off_diagonal";
    case CostViolation::Kind::Triangle: return "triangle";
  }
  return "unknown";
}

std::size_t ValidationReport::count(CostViolation::Kind kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [kind](const CostViolation& v) { return v.kind == kind; }));
}

ValidationReport validate_costs(const CostSurface& costs, bool strict, std::size_t expected_dimension) {
  if (expected_dimension != 0 && costs.dimension() != expected_dimension)
    throw StructuralError("cost matrix dimension " + std::to_string(costs.dimension()) + " does not match grid size " +
                          std::to_string(expected_dimension));
  ValidationReport report;
  const auto& ms = costs.matrices();
  for (std::size_t i = 0; i < ms.size(); ++i)
    validate_cost_matrix(ms[i], strict, costs.is_constant() ? -1 : static_cast<int>(i), report);
  return report;
}

CostSurface triangle_closure(const CostSurface& costs) {
  return costs.transformed([](const Eigen::MatrixXd& m) { return triangle_closure(m); });
}

CostSurface shrink_costs(const CostSurface& costs, double k) {
  if (!(k > 0.0 && k < 1.0)) throw ParameterError("shrink exponent k must lie in (0, 1)");
  const auto report = validate_costs(costs, true);
  if (!report.ok()) throw ParameterError("shrink_costs needs a strictly admissible cost surface");
  return costs.transformed([k](const Eigen::MatrixXd& m) { return shrink_cost_matrix(m, k); });
}

Eigen::MatrixXd shrink_gap(const Eigen::MatrixXd& lam, double k) {
  Eigen::MatrixXd gap = lam - shrink_cost_matrix(lam, k);
  gap.diagonal().setZero();
  return gap;
}

MarketScenario with_costs(const MarketScenario& market, CostSurface costs) {
  MarketScenario out = market;
  out.costs = std::move(costs);
  return out;
}

namespace {

std::vector<std::string> maturity_labels(int n) {
  std::vector<std::string> labels;
  for (int i = 0; i < n - 1; ++i) labels.push_back(std::to_string(i));
  labels.emplace_back("inf");
  return labels;
}

Eigen::MatrixXd random_costs(Rng& rng, int n, double lo, double hi) {
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y) lam(x, y) = rng.uniform(lo, hi);
  return triangle_closure(lam);
}

}  // namespace

MarketScenario generate_market(const GeneratorConfig& cfg) {
  if (cfg.assets < 2) throw ParameterError("generate_market needs at least 2 assets");
  if (cfg.depth < 1) throw ParameterError("generate_market needs depth >= 1");
  if (cfg.branching < 1) throw ParameterError("generate_market needs branching >= 1");
  if (!(cfg.vol >= 0.0) || !std::isfinite(cfg.vol)) throw ParameterError("volatility must be finite and >= 0");
  if (!(cfg.cost_lo > 0.0 && cfg.cost_lo <= cfg.cost_hi)) throw ParameterError("cost range must satisfy 0 < lo <= hi");

  Rng rng(cfg.seed);
  const int n = cfg.assets;

  std::vector<double> times;
  for (int k = 0; k <= cfg.depth; ++k) times.push_back(static_cast<double>(k) / cfg.depth);

  Eigen::VectorXd s0(n);
  for (int x = 0; x < n; ++x) s0(x) = x == 0 ? 1.0 : std::exp(-0.03 * (x == n - 1 ? 2.0 * n : double(x)));

  std::vector<TreeNode> nodes;
  std::vector<std::optional<int>> parents;
  std::vector<Eigen::VectorXd> prices;
  nodes.push_back({0, -1, 0, 1.0, {}});
  parents.emplace_back(std::nullopt);
  prices.push_back(s0);
  std::vector<int> frontier{0};
  for (int level = 1; level <= cfg.depth; ++level) {
    std::vector<int> next;
    for (int parent : frontier) {
      std::vector<double> weights(std::size_t(cfg.branching));
      double total = 0.0;
      for (auto& w : weights) total += (w = 0.5 + rng.uniform());
      Eigen::MatrixXd shock = Eigen::MatrixXd::Ones(cfg.branching, n);
      for (int b = 0; b < cfg.branching; ++b)
        for (int x = 1; x < n; ++x) shock(b, x) = std::exp(cfg.vol * rng.normal() - 0.5 * cfg.vol * cfg.vol);
      if (cfg.martingale) {
        for (int x = 1; x < n; ++x) {
          double mean = 0.0;
          for (int b = 0; b < cfg.branching; ++b)
            mean += (cfg.branching == 1 ? 1.0 : weights[std::size_t(b)] / total) * shock(b, x);
          shock.col(x) /= mean;
        }
      }
      for (int b = 0; b < cfg.branching; ++b) {
        const int id = static_cast<int>(nodes.size());
        const double prob = cfg.branching == 1 ? 1.0 : weights[std::size_t(b)] / total;
        Eigen::VectorXd s = prices[std::size_t(parent)].cwiseProduct(shock.row(b).transpose());
        nodes.push_back({id, -1, level, prob, {}});
        parents.emplace_back(parent);
        prices.push_back(std::move(s));
        next.push_back(id);
      }
    }
    frontier = std::move(next);
  }

  MarketScenario market;
  market.grid.labels = maturity_labels(n);
  market.grid.numeraire = 0;
  market.tree = ScenarioTree(std::move(times), std::move(nodes), parents);
  market.prices.values = std::move(prices);
  if (cfg.per_node_costs) {
    std::vector<Eigen::MatrixXd> lams;
    for (std::size_t i = 0; i < market.tree.size(); ++i) lams.push_back(random_costs(rng, n, cfg.cost_lo, cfg.cost_hi));
    market.costs = CostSurface::per_node(std::move(lams), true);
  } else {
    market.costs = CostSurface::constant(random_costs(rng, n, cfg.cost_lo, cfg.cost_hi), true);
  }
  market.check();
  return market;
}

}  // namespace conic
