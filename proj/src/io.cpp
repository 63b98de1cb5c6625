#include "conic/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace conic::io {

namespace {

// Character iterator that tracks the line of the last character the lexer
// consumed.
struct LineCursor {
  const char* p = nullptr;
  int* line = nullptr;

  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  reference operator*() const { return *p; }
  LineCursor& operator++() {
    if (*p == '\n') ++*line;
    ++p;
    return *this;
  }
  LineCursor operator++(int) {
    LineCursor old = *this;
    ++*this;
    return old;
  }
  bool operator==(const LineCursor& o) const { return p == o.p; }
  bool operator!=(const LineCursor& o) const { return p != o.p; }
};

class LineRecorder : public nlohmann::json_sax<json> {
 public:
  LineRecorder(const int* line, std::map<std::string, int>* lines) : line_(line), lines_(lines) {}

  bool null() override { return value(); }
  bool boolean(bool) override { return value(); }
  bool number_integer(number_integer_t) override { return value(); }
  bool number_unsigned(number_unsigned_t) override { return value(); }
  bool number_float(number_float_t, const string_t&) override { return value(); }
  bool string(string_t&) override { return value(); }
  bool binary(binary_t&) override { return value(); }
  bool start_object(std::size_t) override { return open(false); }
  bool end_object() override { return close(); }
  bool start_array(std::size_t) override { return open(true); }
  bool end_array() override { return close(); }
  bool key(string_t& k) override {
    stack_.back().key = escape(k);
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

 private:
  struct Frame {
    std::string path;
    bool array = false;
    std::size_t next = 0;
    std::string key;
  };

  static std::string escape(const std::string& k) {
    std::string out;
    for (char c : k) {
      if (c == '~') out += "~0";
      else if (c == '/') out += "~1";
      else out += c;
    }
    return out;
  }

  std::string child_path() {
    if (stack_.empty()) return "";
    auto& top = stack_.back();
    if (top.array) return top.path + "/" + std::to_string(top.next++);
    return top.path + "/" + top.key;
  }
  bool value() {
    lines_->emplace(child_path(), *line_);
    return true;
  }
  bool open(bool array) {
    std::string path = child_path();
    lines_->emplace(path, *line_);
    stack_.push_back({std::move(path), array, 0, {}});
    return true;
  }
  bool close() {
    stack_.pop_back();
    return true;
  }

  const int* line_;
  std::map<std::string, int>* lines_;
  std::vector<Frame> stack_;
};

std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string ptr(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

double number_at(const Document& doc, const json& j, const std::string& pointer) {
  if (!j.is_number()) doc.fail(pointer, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) doc.fail(pointer, "expected a finite number");
  return v;
}

int integer_at(const Document& doc, const json& j, const std::string& pointer) {
  if (!j.is_number_integer()) doc.fail(pointer, "expected an integer");
  return j.get<int>();
}

const json& field(const Document& doc, const json& obj, const std::string& pointer, const std::string& key) {
  if (!obj.is_object()) doc.fail(pointer, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) doc.fail(pointer, "missing field '" + key + "'");
  return *it;
}

Eigen::VectorXd vector_at(const Document& doc, const json& j, const std::string& pointer, std::size_t n) {
  if (!j.is_array()) doc.fail(pointer, "expected an array");
  if (j.size() != n)
    doc.fail(pointer, "expected " + std::to_string(n) + " entries, found " + std::to_string(j.size()));
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v(Eigen::Index(i)) = number_at(doc, j[i], ptr(pointer, i));
  return v;
}

Eigen::MatrixXd matrix_at(const Document& doc, const json& j, const std::string& pointer, std::size_t n) {
  if (!j.is_array() || j.size() != n) doc.fail(pointer, "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) m.row(Eigen::Index(r)) = vector_at(doc, j[r], ptr(pointer, r), n).transpose();
  return m;
}

std::size_t asset_at(const Document& doc, const json& j, const std::string& pointer, const AssetGrid& grid) {
  if (!j.is_string()) doc.fail(pointer, "expected an asset label");
  auto idx = grid.index_of(j.get<std::string>());
  if (!idx) doc.fail(pointer, "unknown asset '" + j.get<std::string>() + "'");
  return *idx;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Document Document::parse(const std::string& text, const std::string& name) {
  Document doc;
  doc.name_ = name;
  try {
    doc.root_ = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < limit; ++i)
      if (text[i] == '\n') ++line;
    std::string what = e.what();
    const auto pos = what.find("parse error");
    throw InputError(name + ":" + std::to_string(line) + ": " + (pos == std::string::npos ? what : what.substr(pos)));
  }
  int line = 1;
  LineRecorder recorder(&line, &doc.lines_);
  json::sax_parse(LineCursor{text.data(), &line}, LineCursor{text.data() + text.size(), &line}, &recorder);
  return doc;
}

Document Document::load(const std::string& path) { return parse(read_text(path), path); }

int Document::line_of(const std::string& pointer) const {
  std::string p = pointer;
  while (true) {
    auto it = lines_.find(p);
    if (it != lines_.end()) return it->second;
    if (p.empty()) return 1;
    p.erase(p.rfind('/'));
  }
}

void Document::fail(const std::string& pointer, const std::string& message) const {
  throw InputError(name_ + ":" + std::to_string(line_of(pointer)) + ": " + message);
}

// ---------------------------------------------------------------------------
// Scenario

MarketScenario read_scenario(const Document& doc) {
  const json& root = doc.root();
  if (!root.is_object()) doc.fail("", "scenario must be a JSON object");

  MarketScenario market;
  const json& assets = field(doc, root, "", "assets");
  if (!assets.is_array() || assets.empty()) doc.fail("/assets", "expected a non-empty array of labels");
  for (std::size_t i = 0; i < assets.size(); ++i) {
    if (!assets[i].is_string()) doc.fail(ptr("/assets", i), "asset labels must be strings");
    market.grid.labels.push_back(assets[i].get<std::string>());
  }
  try {
    market.grid.check();
  } catch (const StructuralError& e) {
    doc.fail("/assets", e.what());
  }
  const std::size_t n = market.grid.size();
  if (root.contains("numeraire"))
    market.grid.numeraire = asset_at(doc, root["numeraire"], "/numeraire", market.grid);

  const json& times = field(doc, root, "", "times");
  if (!times.is_array() || times.empty()) doc.fail("/times", "expected a non-empty array");
  std::vector<double> t;
  for (std::size_t i = 0; i < times.size(); ++i) t.push_back(number_at(doc, times[i], ptr("/times", i)));

  const json& nodes = field(doc, root, "", "nodes");
  if (!nodes.is_array() || nodes.empty()) doc.fail("/nodes", "expected a non-empty array");
  std::map<int, int> child_count;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = ptr("/nodes", i);
    const json& parent = field(doc, nodes[i], p, "parent");
    if (!parent.is_null()) ++child_count[integer_at(doc, parent, p + "/parent")];
  }
  std::vector<TreeNode> tree_nodes;
  std::vector<std::optional<int>> parents;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = ptr("/nodes", i);
    const json& node = nodes[i];
    TreeNode tn;
    tn.id = integer_at(doc, field(doc, node, p, "id"), p + "/id");
    tn.time_index = integer_at(doc, field(doc, node, p, "time_index"), p + "/time_index");
    const json& parent = node["parent"];
    if (parent.is_null()) {
      parents.emplace_back(std::nullopt);
      tn.prob = 1.0;
    } else {
      const int pid = parent.get<int>();
      parents.emplace_back(pid);
      if (node.contains("prob"))
        tn.prob = number_at(doc, node["prob"], p + "/prob");
      else if (child_count[pid] == 1)
        tn.prob = 1.0;
      else
        doc.fail(p, "missing field 'prob' (node has siblings)");
    }
    Eigen::VectorXd prices = vector_at(doc, field(doc, node, p, "prices"), p + "/prices", n);
    for (std::size_t x = 0; x < n; ++x)
      if (!(prices(Eigen::Index(x)) > 0.0))
        doc.fail(ptr(p + "/prices", x), "price of asset '" + market.grid.labels[x] + "' must be positive");
    market.prices.values.push_back(std::move(prices));
    tree_nodes.push_back(tn);
  }
  try {
    market.tree = ScenarioTree(std::move(t), std::move(tree_nodes), parents);
  } catch (const StructuralError& e) {
    doc.fail("/nodes", e.what());
  }

  bool strict = true;
  if (root.contains("strict")) {
    if (!root["strict"].is_boolean()) doc.fail("/strict", "expected true or false");
    strict = root["strict"].get<bool>();
  }
  const json& costs = field(doc, root, "", "costs");
  const json& mode = field(doc, costs, "/costs", "mode");
  if (mode == "constant") {
    market.costs = CostSurface::constant(matrix_at(doc, field(doc, costs, "/costs", "matrix"), "/costs/matrix", n), strict);
  } else if (mode == "per_node") {
    const json& ms = field(doc, costs, "/costs", "matrices");
    if (!ms.is_array() || ms.size() != nodes.size())
      doc.fail("/costs/matrices", "expected one matrix per node (" + std::to_string(nodes.size()) + ")");
    std::vector<Eigen::MatrixXd> lams;
    for (std::size_t i = 0; i < ms.size(); ++i) lams.push_back(matrix_at(doc, ms[i], ptr("/costs/matrices", i), n));
    market.costs = CostSurface::per_node(std::move(lams), strict);
  } else {
    doc.fail("/costs/mode", "cost mode must be \"constant\" or \"per_node\"");
  }
  try {
    market.check();
  } catch (const StructuralError& e) {
    doc.fail("", e.what());
  }
  return market;
}

MarketScenario read_scenario(const std::string& path) { return read_scenario(Document::load(path)); }

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

}  // namespace

json scenario_to_json(const MarketScenario& market) {
  json out;
  out["times"] = market.tree.times();
  out["assets"] = market.grid.labels;
  out["numeraire"] = market.grid.labels.at(market.grid.numeraire);
  out["strict"] = market.costs.strict();
  json nodes = json::array();
  for (std::size_t i = 0; i < market.tree.size(); ++i) {
    const auto& node = market.tree.node(int(i));
    json j;
    j["id"] = node.id;
    j["parent"] = node.parent < 0 ? json(nullptr) : json(market.tree.node(node.parent).id);
    j["time_index"] = node.time_index;
    j["prob"] = node.prob;
    j["prices"] = vector_json(market.price(int(i)));
    nodes.push_back(std::move(j));
  }
  out["nodes"] = std::move(nodes);
  json costs;
  if (market.costs.is_constant()) {
    costs["mode"] = "constant";
    costs["matrix"] = matrix_json(market.costs.matrices().front());
  } else {
    costs["mode"] = "per_node";
    costs["matrices"] = json::array();
    for (const auto& m : market.costs.matrices()) costs["matrices"].push_back(matrix_json(m));
  }
  out["costs"] = std::move(costs);
  return out;
}

// ---------------------------------------------------------------------------
// Portfolio

Eigen::VectorXd read_portfolio(const Document& doc, const AssetGrid& grid) {
  const json* amounts = &doc.root();
  std::string p;
  if (amounts->is_object()) {
    amounts = &field(doc, doc.root(), "", "amounts");
    p = "/amounts";
  }
  if (amounts->is_array()) return vector_at(doc, *amounts, p, grid.size());
  if (!amounts->is_object()) doc.fail(p, "amounts must be an array or an object keyed by asset label");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  for (auto it = amounts->begin(); it != amounts->end(); ++it) {
    const std::string q = p + "/" + it.key();
    auto idx = grid.index_of(it.key());
    if (!idx) doc.fail(q, "unknown asset '" + it.key() + "'");
    v(Eigen::Index(*idx)) = number_at(doc, it.value(), q);
  }
  return v;
}

Eigen::VectorXd read_portfolio(const std::string& path, const AssetGrid& grid) {
  return read_portfolio(Document::load(path), grid);
}

// ---------------------------------------------------------------------------
// Plans

TransferPlan read_plan(const Document& doc, const MarketScenario& market) {
  const json* atoms = &doc.root();
  std::string p;
  if (atoms->is_object()) {
    for (const char* key : {"strategy", "atoms"})
      if (atoms->contains(key)) {
        p = std::string("/") + key;
        atoms = &(*atoms)[key];
        break;
      }
  }
  if (!atoms->is_array()) doc.fail(p, "plan must be an array of node transfers");
  const auto n = static_cast<Eigen::Index>(market.assets());
  TransferPlan plan;
  for (std::size_t i = 0; i < atoms->size(); ++i) {
    const std::string q = ptr(p, i);
    const json& atom = (*atoms)[i];
    TransferAtom a;
    a.node_id = integer_at(doc, field(doc, atom, q, "node_id"), q + "/node_id");
    if (!market.tree.index_of(a.node_id)) doc.fail(q + "/node_id", "unknown node " + std::to_string(a.node_id));
    a.amounts = Eigen::MatrixXd::Zero(n, n);
    const json& transfers = field(doc, atom, q, "transfers");
    if (!transfers.is_array()) doc.fail(q + "/transfers", "expected an array");
    for (std::size_t k = 0; k < transfers.size(); ++k) {
      const std::string r = ptr(q + "/transfers", k);
      const json& t = transfers[k];
      std::size_t x = 0, y = 0;
      double amount = 0.0;
      if (t.is_array()) {
        if (t.size() != 3) doc.fail(r, "transfer must be [from, to, amount]");
        x = asset_at(doc, t[0], r + "/0", market.grid);
        y = asset_at(doc, t[1], r + "/1", market.grid);
        amount = number_at(doc, t[2], r + "/2");
      } else if (t.is_object()) {
        x = asset_at(doc, field(doc, t, r, "from"), r + "/from", market.grid);
        y = asset_at(doc, field(doc, t, r, "to"), r + "/to", market.grid);
        amount = number_at(doc, field(doc, t, r, "amount"), r + "/amount");
      } else {
        doc.fail(r, "transfer must be an array or an object");
      }
      if (x == y) doc.fail(r, "self-transfers are not allowed");
      if (amount < 0.0) doc.fail(r, "transfer amounts must be nonnegative");
      a.amounts(Eigen::Index(x), Eigen::Index(y)) += amount;
    }
    plan.atoms.push_back(std::move(a));
  }
  return plan;
}

TransferPlan read_plan(const std::string& path, const MarketScenario& market) {
  return read_plan(Document::load(path), market);
}

json plan_to_json(const TransferPlan& plan, const MarketScenario& market) {
  json out = json::array();
  for (const auto& atom : plan.atoms) {
    json transfers = json::array();
    for (Eigen::Index x = 0; x < atom.amounts.rows(); ++x)
      for (Eigen::Index y = 0; y < atom.amounts.cols(); ++y)
        if (atom.amounts(x, y) > 0.0)
          transfers.push_back({market.grid.labels[std::size_t(x)], market.grid.labels[std::size_t(y)], atom.amounts(x, y)});
    out.push_back({{"node_id", atom.node_id}, {"transfers", std::move(transfers)}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Price systems

PriceSystem read_price_system(const Document& doc, const MarketScenario& market) {
  const json* entries = &doc.root();
  std::string p;
  if (entries->is_object()) {
    entries = &field(doc, doc.root(), "", "cps");
    p = "/cps";
  }
  if (!entries->is_array()) doc.fail(p, "price system must be an array of {node_id, weights}");
  PriceSystem z;
  z.weights.assign(market.tree.size(), Eigen::VectorXd());
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const std::string q = ptr(p, i);
    const json& e = (*entries)[i];
    const int id = integer_at(doc, field(doc, e, q, "node_id"), q + "/node_id");
    auto idx = market.tree.index_of(id);
    if (!idx) doc.fail(q + "/node_id", "unknown node " + std::to_string(id));
    if (z.weights[std::size_t(*idx)].size() != 0) doc.fail(q + "/node_id", "duplicate node " + std::to_string(id));
    z.weights[std::size_t(*idx)] = vector_at(doc, field(doc, e, q, "weights"), q + "/weights", market.assets());
  }
  for (std::size_t v = 0; v < z.weights.size(); ++v)
    if (z.weights[v].size() == 0) doc.fail(p, "no weights for node " + std::to_string(market.tree.node(int(v)).id));
  return z;
}

PriceSystem read_price_system(const std::string& path, const MarketScenario& market) {
  return read_price_system(Document::load(path), market);
}

json price_system_to_json(const PriceSystem& z, const MarketScenario& market) {
  json out = json::array();
  for (std::size_t v = 0; v < z.weights.size(); ++v)
    out.push_back({{"node_id", market.tree.node(int(v)).id}, {"weights", vector_json(z.weights[v])}});
  return out;
}

// ---------------------------------------------------------------------------
// Output

double round12(double v) {
  if (!std::isfinite(v)) return v;
  const double r = std::strtod(fmt12(v).c_str(), nullptr);
  return r == 0.0 ? 0.0 : r;
}

json rounded(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(round12(v(i)));
  return out;
}

json rounded(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(rounded(Eigen::VectorXd(m.row(r).transpose())));
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot write file");
  out << contents;
}

}  // namespace conic::io
