#include "conic/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "conic/cone_calculus.hpp"
#include "conic/cps_engine.hpp"
#include "conic/io.hpp"
#include "conic/market_model.hpp"
#include "conic/portfolio_engine.hpp"

namespace conic {

namespace {

using io::json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kInputError = 2;
constexpr int kInternalError = 3;

std::string f6(double v) {
  if (std::abs(v) < 5e-7) v = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string f6(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + f6(v(i));
  return s;
}

double env_tolerance(const char* name, double fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !(v > 0.0))
    throw ParameterError(std::string("environment variable ") + name + " must be a positive number");
  return v;
}

struct Range {
  double from = 0.0, to = 0.0;
  int steps = 0;
  std::vector<double> points() const {
    std::vector<double> out;
    for (int i = 0; i < steps; ++i) out.push_back(steps == 1 ? from : from + (to - from) * i / (steps - 1));
    return out;
  }
};

Range parse_range(const std::string& spec, const std::string& what) {
  Range r;
  char tail = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d%c", &r.from, &r.to, &r.steps, &tail) != 3 || r.steps < 1)
    throw ParameterError(what + " must look like FROM:TO:STEPS");
  return r;
}

struct Options {
  std::string scenario, second, third;
  std::string out_path, report_path, format = "report";
  std::optional<int> node;
  std::string endowment;
  double k = 0.5, c = 0.0, margin = 0.0;
  std::string k_grid, curve;
  bool lenient = false;
  std::optional<double> feas_tol, gap_tol, margin_tol;
  GeneratorConfig gen;
  bool constant_costs = false;
};

class Runner {
 public:
  Runner(const Options& opt, std::ostream& out) : opt_(opt), out_(out) {
    tol_.feasibility = opt.feas_tol.value_or(env_tolerance("CONIC_FEAS_TOL", tol_.feasibility));
    tol_.duality_gap = opt.gap_tol.value_or(env_tolerance("CONIC_GAP_TOL", tol_.duality_gap));
    tol_.margin_threshold = opt.margin_tol.value_or(env_tolerance("CONIC_MARGIN_TOL", tol_.margin_threshold));
    if (!(tol_.feasibility > 0.0 && tol_.duality_gap > 0.0 && tol_.margin_threshold > 0.0))
      throw ParameterError("tolerances must be positive");
  }

  int run(const std::string& command) {
    report_["command"] = command;
    int code = dispatch(command);
    if (!opt_.report_path.empty()) io::write_file(opt_.report_path, io::dump(report_));
    return code;
  }

 private:
  void line(const std::string& s) { out_ << s << "\n"; }

  void artifact(const json& j) {
    if (!opt_.out_path.empty()) io::write_file(opt_.out_path, io::dump(j));
  }

  const std::string& label(int x) const { return market_.grid.labels.at(std::size_t(x)); }

  int node_index() {
    if (!opt_.node) return market_.tree.root();
    return market_.tree.index_or_throw(*opt_.node);
  }

  json transfers_json(const Eigen::MatrixXd& a) const {
    json out = json::array();
    for (Eigen::Index x = 0; x < a.rows(); ++x)
      for (Eigen::Index y = 0; y < a.cols(); ++y)
        if (a(x, y) > 0.0) out.push_back({label(int(x)), label(int(y)), io::round12(a(x, y))});
    return out;
  }

  void load_market() { market_ = io::read_scenario(opt_.scenario); }

  int dispatch(const std::string& command) {
    if (command == "gen") return gen();
    load_market();
    if (command == "validate") return validate();
    if (command == "liquidate") return liquidate();
    if (command == "solvency") return solvency();
    if (command == "closure") return closure();
    if (command == "shrink") return shrink();
    if (command == "value") return value();
    if (command == "admissible") return admissible();
    if (command == "find-cps") return find();
    if (command == "check-cps") return check();
    if (command == "supermartingale") return supermartingale();
    if (command == "arbitrage") return arbitrage();
    if (command == "rnflvr") return rnflvr();
    throw ParameterError("unknown subcommand " + command);
  }

  int validate() {
    const bool strict = market_.costs.strict() && !opt_.lenient;
    const ValidationReport rep = validate_costs(market_.costs, strict, market_.assets());
    json list = json::array();
    for (const auto& v : rep.violations) {
      json j{{"kind", to_string(v.kind)}, {"node", v.node < 0 ? json(nullptr) : json(market_.tree.node(v.node).id)},
             {"x", label(v.x)}, {"y", label(v.y)}, {"value", io::round12(v.value)}};
      if (v.z >= 0) {
        j["z"] = label(v.z);
        j["bound"] = io::round12(v.bound);
      }
      list.push_back(std::move(j));
    }
    report_["strict"] = strict;
    report_["violations"] = list;
    report_["ok"] = rep.ok();
    line("violations " + std::to_string(rep.violations.size()));
    for (const auto& v : rep.violations) {
      std::string where = v.node < 0 ? "all nodes" : "node " + std::to_string(market_.tree.node(v.node).id);
      if (v.kind == CostViolation::Kind::Triangle)
        line("triangle " + where + " (" + label(v.x) + "," + label(v.y) + "," + label(v.z) + ") " + f6(v.value) +
             " > " + f6(v.bound));
      else
        line(std::string(to_string(v.kind)) + " " + where + " (" + label(v.x) + "," + label(v.y) + ") " + f6(v.value));
    }
    artifact(report_);
    return rep.ok() ? kPass : kFail;
  }

  Eigen::VectorXd portfolio() { return io::read_portfolio(opt_.second, market_.grid); }

  int liquidate() {
    const int v = node_index();
    const auto& lam = market_.lam(v);
    Eigen::VectorXd nu = portfolio();
    if (!opt_.curve.empty()) {
      const auto colon = opt_.curve.find(':');
      if (colon == std::string::npos) throw ParameterError("--curve must look like ASSET:FROM:TO:STEPS");
      const auto asset = market_.grid.index_of(opt_.curve.substr(0, colon));
      if (!asset) throw ParameterError("--curve names an unknown asset");
      const Range r = parse_range(opt_.curve.substr(colon + 1), "--curve");
      json rows = json::array();
      if (opt_.format == "csv") line("amount,liquidation_value,dual_value");
      for (double t : r.points()) {
        nu(Eigen::Index(*asset)) = t;
        const Liquidation liq = liquidation_value(nu, lam, market_.grid.numeraire);
        check_gap(liq);
        rows.push_back({{"amount", io::round12(t)}, {"liquidation_value", io::round12(liq.value)},
                        {"dual_value", io::round12(liq.dual_value)}});
        if (opt_.format == "csv") line(f6(t) + "," + f6(liq.value) + "," + f6(liq.dual_value));
      }
      report_["node_id"] = market_.tree.node(v).id;
      report_["asset"] = label(int(*asset));
      report_["curve"] = rows;
      if (opt_.format != "csv") out_ << io::dump(rows);
      return kPass;
    }
    const Liquidation liq = liquidation_value(nu, lam, market_.grid.numeraire);
    check_gap(liq);
    report_["node_id"] = market_.tree.node(v).id;
    report_["liquidation_value"] = io::round12(liq.value);
    report_["dual_value"] = io::round12(liq.dual_value);
    report_["gap"] = io::round12(liq.gap());
    report_["dual_weight"] = io::rounded(liq.dual_weight);
    report_["transfers"] = transfers_json(liq.transfers);
    report_["liquidity_floor"] = io::round12(liquidity_floor(lam, market_.grid.numeraire));
    line("liquidation_value " + f6(liq.value));
    line("dual_value " + f6(liq.dual_value));
    line("dual_weight " + f6(liq.dual_weight));
    artifact({{"node_id", market_.tree.node(v).id}, {"weights", io::rounded(liq.dual_weight)}});
    return kPass;
  }

  void check_gap(const Liquidation& liq) const {
    if (!liq.consistent(tol_.duality_gap))
      throw InternalInconsistency("liquidation duality gap " + std::to_string(liq.gap()) + " exceeds tolerance");
  }

  int solvency() {
    const int v = node_index();
    const Eigen::VectorXd nu = portfolio();
    const SolvencyResult res = solvency_membership(nu, market_.lam(v), tol_, market_.grid.numeraire);
    report_["node_id"] = market_.tree.node(v).id;
    report_["solvent"] = res.solvent;
    report_["liquidation_value"] = io::round12(res.liquidation);
    line(res.solvent ? "solvent" : "insolvent");
    line("liquidation_value " + f6(res.liquidation));
    if (res.solvent) {
      report_["transfers"] = transfers_json(res.transfers);
      artifact({{"node_id", market_.tree.node(v).id}, {"transfers", transfers_json(res.transfers)}});
      return kPass;
    }
    report_["certificate"] = io::rounded(res.certificate);
    line("certificate " + f6(res.certificate));
    line("certificate_value " + f6(nu.dot(res.certificate)));
    artifact({{"node_id", market_.tree.node(v).id}, {"weights", io::rounded(res.certificate)}});
    return kFail;
  }

  int emit_scenario(const MarketScenario& m, std::size_t changed) {
    if (opt_.out_path.empty()) {
      out_ << io::dump(io::scenario_to_json(m));
    } else {
      io::write_file(opt_.out_path, io::dump(io::scenario_to_json(m)));
      line("entries_changed " + std::to_string(changed));
    }
    report_["entries_changed"] = changed;
    return kPass;
  }

  std::size_t count_changed(const CostSurface& a, const CostSurface& b) const {
    std::size_t changed = 0;
    for (std::size_t i = 0; i < a.matrices().size(); ++i)
      changed += static_cast<std::size_t>((a.matrices()[i].array() != b.matrices()[i].array()).count());
    return changed;
  }

  int closure() {
    const CostSurface closed = triangle_closure(market_.costs);
    return emit_scenario(with_costs(market_, closed), count_changed(market_.costs, closed));
  }

  int shrink() {
    const CostSurface shrunk = shrink_costs(market_.costs, opt_.k);
    report_["k"] = opt_.k;
    return emit_scenario(with_costs(market_, shrunk), count_changed(market_.costs, shrunk));
  }

  TransferPlan plan() { return io::read_plan(opt_.second, market_); }

  int value() {
    const TransferPlan p = plan();
    const Eigen::VectorXd v0 =
        opt_.endowment.empty() ? Eigen::VectorXd() : io::read_portfolio(opt_.endowment, market_.grid);
    const auto values = portfolio_path(p, v0, market_);
    json nodes = json::array();
    for (int v : market_.tree.order()) {
      const auto& node = market_.tree.node(v);
      if (opt_.node && node.id != *opt_.node) continue;
      const Liquidation liq = liquidation_value(values[std::size_t(v)], market_.lam(v), market_.grid.numeraire);
      nodes.push_back({{"node_id", node.id},
                       {"time_index", node.time_index},
                       {"value", io::rounded(values[std::size_t(v)])},
                       {"liquidation_value", io::round12(liq.value)}});
      line("node " + std::to_string(node.id) + " t=" + std::to_string(node.time_index) + " value " +
           f6(values[std::size_t(v)]) + " liquidation " + f6(liq.value));
    }
    if (opt_.node && nodes.empty()) throw StructuralError("unknown node id " + std::to_string(*opt_.node));
    report_["nodes"] = nodes;
    return kPass;
  }

  int admissible() {
    const AdmissibilityResult res = admissibility_check(plan(), market_, opt_.c, tol_);
    report_["c"] = opt_.c;
    report_["admissible"] = res.admissible;
    report_["min_norm"] = io::round12(res.min_norm);
    report_["eta"] = io::rounded(res.eta);
    line(res.admissible ? "admissible" : "not_admissible");
    line("min_norm " + f6(res.min_norm));
    line("eta " + f6(res.eta));
    if (res.admissible) {
      artifact({{"eta", io::rounded(res.eta)}});
      return kPass;
    }
    json cert = json::array();
    for (std::size_t v = 0; v < res.certificate.size(); ++v)
      if (!res.certificate[v].isZero(0.0))
        cert.push_back({{"node_id", market_.tree.node(int(v)).id}, {"weights", io::rounded(res.certificate[v])}});
    report_["violated_node_id"] = res.violated_node_id;
    report_["certificate"] = cert;
    line("violated_at " + std::to_string(res.violated_node_id));
    artifact({{"violated_node_id", res.violated_node_id}, {"certificate", cert}});
    return kFail;
  }

  int find() {
    const CpsSearch search = find_cps(market_);
    const bool strict = search.strict(tol_);
    report_["margin"] = io::round12(search.margin);
    report_["strict"] = strict;
    line("margin " + f6(search.margin));
    line(strict ? "strict_cps_found" : "no_strict_cps");
    if (strict) {
      report_["cps"] = io::price_system_to_json(search.cps, market_);
      artifact({{"cps", io::price_system_to_json(search.cps, market_)}});
      return kPass;
    }
    TransferPlan multipliers;
    for (std::size_t v = 0; v < search.alpha.size(); ++v)
      if (search.alpha[v].maxCoeff() > 0.0) multipliers.atoms.push_back({market_.tree.node(int(v)).id, search.alpha[v]});
    report_["certificate"] = io::plan_to_json(multipliers, market_);
    artifact({{"margin", io::round12(search.margin)}, {"certificate", io::plan_to_json(multipliers, market_)}});
    return kFail;
  }

  json violations_json(const CpsReport& rep) const {
    json list = json::array();
    for (const auto& v : rep.violations) {
      json j{{"kind", to_string(v.kind)}, {"node_id", v.node_id}, {"x", label(v.x)}, {"residual", io::round12(v.residual)}};
      if (v.y >= 0) j["y"] = label(v.y);
      list.push_back(std::move(j));
    }
    return list;
  }

  int check() {
    const PriceSystem z = io::read_price_system(opt_.second, market_);
    const CpsReport rep = verify_cps(z, market_, opt_.margin);
    report_["margin"] = opt_.margin;
    report_["ok"] = rep.ok();
    report_["min_slack"] = io::round12(rep.min_slack);
    report_["max_martingale_residual"] = io::round12(rep.max_martingale);
    report_["violations"] = violations_json(rep);
    line(rep.ok() ? "valid_cps" : "invalid_cps");
    line("min_slack " + f6(rep.min_slack));
    line("violations " + std::to_string(rep.violations.size()));
    for (const auto& v : rep.violations)
      line(std::string(to_string(v.kind)) + " node " + std::to_string(v.node_id) + " " + label(v.x) +
           (v.y >= 0 ? "," + label(v.y) : "") + " residual " + f6(v.residual));
    artifact(report_);
    return rep.ok() ? kPass : kFail;
  }

  int supermartingale() {
    const TransferPlan p = plan();
    const PriceSystem z = io::read_price_system(opt_.third, market_);
    const CpsReport valid = verify_cps(z, market_, 0.0);
    if (!valid.ok()) throw ParameterError("price system fails verification; run check-cps for details");
    const SupermartingaleReport rep = supermartingale_check(p, z, market_);
    json y = json::array();
    for (int v : market_.tree.order())
      y.push_back({{"node_id", market_.tree.node(v).id}, {"y", io::round12(rep.y[std::size_t(v)])}});
    json viol = json::array();
    for (const auto& v : rep.violations)
      viol.push_back({{"node_id", v.node_id}, {"value", io::round12(v.value)}, {"expected", io::round12(v.expected)}});
    report_["ok"] = rep.ok();
    report_["y"] = y;
    report_["violations"] = viol;
    line(rep.ok() ? "supermartingale" : "violated");
    line("y_root " + f6(rep.y[std::size_t(market_.tree.root())]));
    line("violations " + std::to_string(rep.violations.size()));
    artifact(report_);
    return rep.ok() ? kPass : kFail;
  }

  int arbitrage() {
    const ArbitrageResult res = detect_arbitrage(market_, tol_);
    report_["status"] = to_string(res.status);
    report_["margin"] = io::round12(res.margin);
    line(std::string("status ") + to_string(res.status));
    line("margin " + f6(res.margin));
    if (res.status == ArbitrageStatus::Arbitrage) {
      report_["strategy"] = io::plan_to_json(*res.strategy, market_);
      json liq = json::array();
      for (std::size_t l = 0; l < res.leaf_liquidation.size(); ++l)
        liq.push_back({{"node_id", market_.tree.node(market_.tree.leaves()[l]).id},
                       {"liquidation_value", io::round12(res.leaf_liquidation[l])}});
      report_["leaf_liquidation"] = liq;
      for (std::size_t l = 0; l < res.leaf_liquidation.size(); ++l)
        line("leaf " + std::to_string(market_.tree.node(market_.tree.leaves()[l]).id) + " liquidation " +
             f6(res.leaf_liquidation[l]));
      artifact({{"strategy", io::plan_to_json(*res.strategy, market_)}});
      return kFail;
    }
    report_["cps"] = io::price_system_to_json(*res.cps, market_);
    if (!res.density.empty()) {
      json q = json::array();
      for (std::size_t l = 0; l < res.density.size(); ++l) {
        const int leaf = market_.tree.leaves()[l];
        q.push_back({{"node_id", market_.tree.node(leaf).id},
                     {"density", io::round12(res.density[l])},
                     {"q", io::round12(market_.tree.path_probability(leaf) * res.density[l])}});
      }
      report_["measure"] = q;
    }
    artifact({{"cps", io::price_system_to_json(*res.cps, market_)}});
    return kPass;
  }

  json robust_json(const RobustReport& r) const {
    return {{"k", io::round12(r.k)},
            {"margin_original", io::round12(r.margin_original)},
            {"margin_shrunk", io::round12(r.margin_shrunk)},
            {"shrunk_status", to_string(r.shrunk_status)},
            {"holds", r.holds},
            {"original_slack", io::round12(r.original_slack)}};
  }

  int rnflvr() {
    if (!opt_.k_grid.empty()) {
      const Range r = parse_range(opt_.k_grid, "--k-grid");
      json rows = json::array();
      if (opt_.format == "csv") line("k,margin_original,margin_shrunk,status,holds");
      for (double k : r.points()) {
        const RobustReport rep = nflvr_eps_check(market_, k, tol_);
        rows.push_back(robust_json(rep));
        if (opt_.format == "csv")
          line(f6(k) + "," + f6(rep.margin_original) + "," + f6(rep.margin_shrunk) + "," + to_string(rep.shrunk_status) +
               "," + (rep.holds ? "1" : "0"));
      }
      report_["sweep"] = rows;
      if (opt_.format != "csv") out_ << io::dump(rows);
      return kPass;
    }
    const RobustReport rep = nflvr_eps_check(market_, opt_.k, tol_);
    report_.update(robust_json(rep));
    line(rep.holds ? "rnflvr_holds" : "rnflvr_fails");
    line("margin_original " + f6(rep.margin_original));
    line("margin_shrunk " + f6(rep.margin_shrunk));
    line(std::string("shrunk_status ") + to_string(rep.shrunk_status));
    if (rep.cps) artifact({{"cps", io::price_system_to_json(*rep.cps, market_)}});
    return rep.holds ? kPass : kFail;
  }

  int gen() {
    GeneratorConfig cfg = opt_.gen;
    cfg.per_node_costs = !opt_.constant_costs;
    const MarketScenario m = generate_market(cfg);
    if (opt_.out_path.empty())
      out_ << io::dump(io::scenario_to_json(m));
    else
      io::write_file(opt_.out_path, io::dump(io::scenario_to_json(m)));
    report_["nodes"] = m.tree.size();
    return kPass;
  }

  const Options& opt_;
  std::ostream& out_;
  Tolerances tol_;
  MarketScenario market_;
  json report_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solvency cones, price systems and arbitrage on scenario trees", "conicmkt"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", opt.out_path, "Write the artifact or certificate to FILE");
    sub->add_option("--report", opt.report_path, "Write the JSON report to FILE");
    sub->add_option("--feas-tol", opt.feas_tol, "Feasibility tolerance");
    sub->add_option("--gap-tol", opt.gap_tol, "Relative duality-gap tolerance");
    sub->add_option("--margin-tol", opt.margin_tol, "Strict-margin threshold");
  };
  auto scenario = [&](CLI::App* sub) { sub->add_option("scenario", opt.scenario, "Scenario file")->required(); };

  std::vector<CLI::App*> subs;
  auto add = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    subs.push_back(sub);
    return sub;
  };

  auto* validate = add("validate", "Check cost admissibility");
  scenario(validate);
  validate->add_flag("--lenient", opt.lenient, "Allow zero off-diagonal rates");

  auto* liquidate = add("liquidate", "Liquidation value of a portfolio");
  scenario(liquidate);
  liquidate->add_option("portfolio", opt.second, "Portfolio file")->required();
  liquidate->add_option("--node", opt.node, "Node id (default: root)");
  liquidate->add_option("--curve", opt.curve, "Sweep one asset: ASSET:FROM:TO:STEPS");
  liquidate->add_option("--format", opt.format, "report or csv")->check(CLI::IsMember({"report", "csv"}));

  auto* solv = add("solvency", "Solvency cone membership");
  scenario(solv);
  solv->add_option("portfolio", opt.second, "Portfolio file")->required();
  solv->add_option("--node", opt.node, "Node id (default: root)");

  auto* closure = add("closure", "Triangle closure of the cost surface");
  scenario(closure);

  auto* shrink = add("shrink", "Shrunk cost surface (1 + l)^k - 1");
  scenario(shrink);
  shrink->add_option("--k", opt.k, "Exponent in (0, 1)")->required();

  auto* value = add("value", "Portfolio process of a plan");
  scenario(value);
  value->add_option("plan", opt.second, "Plan file")->required();
  value->add_option("--endowment", opt.endowment, "Initial endowment portfolio file");
  value->add_option("--node", opt.node, "Only this node");

  auto* adm = add("admissible", "Admissibility with bound c");
  scenario(adm);
  adm->add_option("plan", opt.second, "Plan file")->required();
  adm->add_option("--c", opt.c, "Lower bound c >= 0")->required();

  auto* find = add("find-cps", "Max-margin consistent price system");
  scenario(find);

  auto* check = add("check-cps", "Verify a price system");
  scenario(check);
  check->add_option("cps", opt.second, "Price system file")->required();
  check->add_option("--margin", opt.margin, "Interior margin (default 0)");

  auto* sm = add("supermartingale", "Supermartingale check of V(Z)");
  scenario(sm);
  sm->add_option("plan", opt.second, "Plan file")->required();
  sm->add_option("cps", opt.third, "Price system file")->required();

  auto* arb = add("arbitrage", "Price system or arbitrage strategy");
  scenario(arb);

  auto* rob = add("rnflvr", "Robust no-arbitrage under shrunk costs");
  scenario(rob);
  rob->add_option("--k", opt.k, "Exponent in (0, 1)");
  rob->add_option("--k-grid", opt.k_grid, "Sweep FROM:TO:STEPS");
  rob->add_option("--format", opt.format, "report or csv")->check(CLI::IsMember({"report", "csv"}));

  auto* gen = add("gen", "Random scenario");
  gen->add_option("--seed", opt.gen.seed, "64-bit seed")->required();
  gen->add_option("--assets", opt.gen.assets, "Number of assets")->required();
  gen->add_option("--depth", opt.gen.depth, "Tree depth")->required();
  gen->add_option("--branching", opt.gen.branching, "Children per node")->required();
  gen->add_option("--vol", opt.gen.vol, "Shock volatility");
  gen->add_option("--cost-lo", opt.gen.cost_lo, "Lowest cost rate");
  gen->add_option("--cost-hi", opt.gen.cost_hi, "Highest cost rate");
  gen->add_flag("--martingale", opt.gen.martingale, "Recenter shocks so growth is a P-martingale");
  gen->add_flag("--constant-costs", opt.constant_costs, "One cost matrix for all nodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kInputError;
  }

  std::string command;
  for (auto* sub : subs)
    if (sub->parsed()) command = sub->get_name();

  try {
    Runner runner(opt, out);
    return runner.run(command);
  } catch (const InternalInconsistency& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace conic
