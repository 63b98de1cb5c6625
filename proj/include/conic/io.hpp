#pragma once

// JSON ingestion and emission. Input errors carry "file:line:" anchors.

#include <Eigen/Dense>

#include <map>
#include <string>

#include "conic/cps_engine.hpp"
#include "conic/errors.hpp"
#include "conic/market_model.hpp"
#include "conic/portfolio_engine.hpp"
#include "json.hpp"

namespace conic::io {

using nlohmann::json;

class InputError : public StructuralError {
 public:
  using StructuralError::StructuralError;
};

/// Parsed JSON plus the source line of every value, keyed by JSON pointer.
class Document {
 public:
  static Document parse(const std::string& text, const std::string& name);
  static Document load(const std::string& path);

  const json& root() const { return root_; }
  const std::string& name() const { return name_; }
  /// Line of the value at `pointer`, or of its nearest recorded ancestor.
  int line_of(const std::string& pointer) const;
  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;

 private:
  json root_;
  std::string name_;
  std::map<std::string, int> lines_;
};

MarketScenario read_scenario(const Document& doc);
MarketScenario read_scenario(const std::string& path);
json scenario_to_json(const MarketScenario& market);

Eigen::VectorXd read_portfolio(const Document& doc, const AssetGrid& grid);
Eigen::VectorXd read_portfolio(const std::string& path, const AssetGrid& grid);

TransferPlan read_plan(const Document& doc, const MarketScenario& market);
TransferPlan read_plan(const std::string& path, const MarketScenario& market);
json plan_to_json(const TransferPlan& plan, const MarketScenario& market);

PriceSystem read_price_system(const Document& doc, const MarketScenario& market);
PriceSystem read_price_system(const std::string& path, const MarketScenario& market);
json price_system_to_json(const PriceSystem& z, const MarketScenario& market);

/// Rounds to 12 significant digits.
double round12(double v);
json rounded(const Eigen::VectorXd& v);
json rounded(const Eigen::MatrixXd& m);
/// Two-space indented, trailing newline.
std::string dump(const json& j);
void write_file(const std::string& path, const std::string& contents);

}  // namespace conic::io
