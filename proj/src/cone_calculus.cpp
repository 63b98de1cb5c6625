#include "conic/cone_calculus.hpp"

#include <string>
#include <vector>

#include "conic/simplex.hpp"

namespace conic {

namespace {

void check_dimensions(const Eigen::VectorXd& nu, const Eigen::MatrixXd& lam, std::size_t numeraire) {
  if (lam.rows() != lam.cols() || lam.rows() != nu.size())
    throw StructuralError("portfolio has " + std::to_string(nu.size()) + " entries for a " +
                          std::to_string(lam.rows()) + "x" + std::to_string(lam.cols()) + " cost matrix");
  if (numeraire >= static_cast<std::size_t>(nu.size())) throw StructuralError("numeraire index out of range");
  if (!nu.allFinite()) throw StructuralError("portfolio has non-finite entries");
}

// Least total mass a >= 0 with nu + transfer_effect(a) >= 0; assumes one exists.
Eigen::MatrixXd minimal_transfers(const Eigen::VectorXd& nu, const Eigen::MatrixXd& lam) {
  const int n = static_cast<int>(nu.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  if ((nu.array() >= 0.0).all()) return a;
  lp::LinearProgram<double> prog;
  std::vector<int> var(static_cast<std::size_t>(n * n), -1);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y) var[std::size_t(x * n + y)] = prog.add_variable(1.0);
  for (int z = 0; z < n; ++z) {
    const int row = prog.add_constraint(lp::Sense::LessEqual, nu(z));
    for (int y = 0; y < n; ++y) {
      if (y == z) continue;
      prog.add_coefficient(row, var[std::size_t(z * n + y)], 1.0 + lam(z, y));
      prog.add_coefficient(row, var[std::size_t(y * n + z)], -1.0);
    }
  }
  const auto sol = prog.solve();
  if (!sol.optimal())
    throw InternalInconsistency(std::string("solvency witness program ended with status ") + lp::to_string(sol.status));
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (x != y) a(x, y) = sol.x(var[std::size_t(x * n + y)]);
  return a;
}

}  // namespace

Liquidation liquidation_value(const Eigen::VectorXd& nu, const Eigen::MatrixXd& lam, std::size_t numeraire) {
  check_dimensions(nu, lam, numeraire);
  const int n = static_cast<int>(nu.size());
  const int c = static_cast<int>(numeraire);
  Liquidation out;
  out.transfers = Eigen::MatrixXd::Zero(n, n);
  out.dual_weight = Eigen::VectorXd::Zero(n);

  // Transfer form: max w with nu - w e_c + (net transfers) >= 0.
  {
    lp::LinearProgram<double> prog;
    const int w = prog.add_variable(-1.0, true);
    std::vector<int> var(static_cast<std::size_t>(n * n), -1);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (x != y) var[std::size_t(x * n + y)] = prog.add_variable(0.0);
    for (int z = 0; z < n; ++z) {
      const int row = prog.add_constraint(lp::Sense::LessEqual, nu(z));
      if (z == c) prog.add_coefficient(row, w, 1.0);
      for (int y = 0; y < n; ++y) {
        if (y == z) continue;
        prog.add_coefficient(row, var[std::size_t(z * n + y)], 1.0 + lam(z, y));
        prog.add_coefficient(row, var[std::size_t(y * n + z)], -1.0);
      }
    }
    const auto sol = prog.solve();
    if (sol.status == lp::Status::Unbounded)
      throw StructuralError("liquidation value is unbounded: cost surface admits a free cycle");
    if (!sol.optimal())
      throw InternalInconsistency(std::string("liquidation program ended with status ") + lp::to_string(sol.status));
    out.value = sol.x(w);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y)
        if (x != y) out.transfers(x, y) = sol.x(var[std::size_t(x * n + y)]);
  }

  // Price form: min nu(f) over f in K' with f(c) = 1.
  {
    lp::LinearProgram<double> prog;
    for (int x = 0; x < n; ++x) prog.add_variable(nu(x));
    const int norm = prog.add_constraint(lp::Sense::Equal, 1.0);
    prog.add_coefficient(norm, c, 1.0);
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (x == y) continue;
        const int row = prog.add_constraint(lp::Sense::LessEqual, 0.0);
        prog.add_coefficient(row, y, 1.0);
        prog.add_coefficient(row, x, -(1.0 + lam(x, y)));
      }
    const auto sol = prog.solve();
    if (sol.status == lp::Status::Unbounded)
      throw StructuralError("dual liquidation program is unbounded: cost surface is not admissible");
    if (!sol.optimal())
      throw InternalInconsistency(std::string("dual liquidation program ended with status ") +
                                  lp::to_string(sol.status));
    out.dual_value = sol.objective;
    out.dual_weight = sol.x;
  }
  return out;
}

SolvencyResult solvency_membership(const Eigen::VectorXd& nu, const Eigen::MatrixXd& lam, const Tolerances& tol,
                                   std::size_t numeraire) {
  const Liquidation liq = liquidation_value(nu, lam, numeraire);
  SolvencyResult out;
  out.liquidation = liq.value;
  out.solvent = liq.value >= -tol.feasibility;
  if (!out.solvent) {
    out.certificate = liq.dual_weight;
    return out;
  }
  // Within tolerance of the boundary the witness is computed for the
  // slightly relaxed position.
  Eigen::VectorXd relaxed = nu;
  if (liq.value < 0.0) relaxed(static_cast<Eigen::Index>(numeraire)) -= liq.value;
  out.transfers = minimal_transfers(relaxed, lam);
  return out;
}

}  // namespace conic
