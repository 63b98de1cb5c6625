#pragma once

// Solvency cone K = cone{(1 + l(x,y)) e_x - e_y, e_x} at one node, its dual
// K' = {f >= 0 : f(y) <= (1 + l(x,y)) f(x)}, and liquidation in asset 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "conic/errors.hpp"

namespace conic {

enum class DualStatus { Interior, Boundary, Outside };

inline const char* to_string(DualStatus s) {
  switch (s) {
    case DualStatus::Interior: return "interior";
    case DualStatus::Boundary: return "boundary";
    case DualStatus::Outside: return "outside";
  }
  return "unknown";
}

struct DualMembership {
  DualStatus status = DualStatus::Outside;
  double pair_slack = std::numeric_limits<double>::infinity();  // min (1+l(x,y)) f(x) - f(y)
  int x = -1, y = -1;                                           // minimizing pair
  double min_weight = std::numeric_limits<double>::infinity();  // min f(x)
  int weight_index = -1;
  double worst() const { return std::min(pair_slack, min_weight); }
  bool member() const { return status != DualStatus::Outside; }
  bool interior() const { return status == DualStatus::Interior; }
};

template <typename Derived>
double default_margin(const Eigen::MatrixBase<Derived>& f) {
  return 1e-6 * std::max(1.0, static_cast<double>(f.cwiseAbs().maxCoeff()));
}

/// Interior iff min(slack, min f) > margin. Closed-cone membership allows a
/// shortfall of `tolerance * max|f|`, so the verdict is invariant under
/// positive rescaling of f when margin = 0.
template <typename DerivedF, typename DerivedL>
DualMembership dual_membership(const Eigen::MatrixBase<DerivedF>& f, const Eigen::MatrixBase<DerivedL>& lam,
                               double margin, double tolerance = 1e-9) {
  if (margin < 0.0) throw ParameterError("dual_membership margin must be >= 0");
  const auto n = f.size();
  if (lam.rows() != n || lam.cols() != n) throw StructuralError("price weight and cost matrix dimensions differ");
  DualMembership out;
  for (Eigen::Index x = 0; x < n; ++x) {
    if (double(f(x)) < out.min_weight) {
      out.min_weight = double(f(x));
      out.weight_index = int(x);
    }
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      const double s = (1.0 + double(lam(x, y))) * double(f(x)) - double(f(y));
      if (s < out.pair_slack) {
        out.pair_slack = s;
        out.x = int(x);
        out.y = int(y);
      }
    }
  }
  const double worst = out.worst();
  const double scale = n ? double(f.cwiseAbs().maxCoeff()) : 0.0;
  if (worst > margin)
    out.status = DualStatus::Interior;
  else if (worst >= -tolerance * scale)
    out.status = DualStatus::Boundary;
  else
    out.status = DualStatus::Outside;
  return out;
}

/// Net change of every account under a transfer matrix a(x, y) that
/// credits a(x, y) to y at the cost of (1 + l(x, y)) a(x, y) from x.
template <typename DerivedA, typename DerivedL>
Eigen::VectorXd transfer_effect(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedL>& lam) {
  const auto n = a.rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      if (x == y) continue;
      const double v = double(a(x, y));
      if (v == 0.0) continue;
      out(y) += v;
      out(x) -= (1.0 + double(lam(x, y))) * v;
    }
  return out;
}

struct Liquidation {
  double value = 0.0;       // primal: sup{w : nu - w e_0 in K}
  double dual_value = 0.0;  // inf{nu(f) : f in K', f(0) = 1}
  Eigen::VectorXd dual_weight;
  Eigen::MatrixXd transfers;  // primal optimizer a(x, y)
  double gap() const { return std::abs(value - dual_value); }
  bool consistent(double relative_tolerance) const {
    return gap() <= relative_tolerance * (1.0 + std::abs(value));
  }
};

/// Solves the transfer-form and the price-form programs separately.
Liquidation liquidation_value(const Eigen::VectorXd& nu, const Eigen::MatrixXd& lam, std::size_t numeraire = 0);

struct SolvencyResult {
  bool solvent = false;
  double liquidation = 0.0;
  Eigen::MatrixXd transfers;    // witness: nu + transfer_effect(transfers) >= 0
  Eigen::VectorXd certificate;  // insolvent: f in K' with nu(f) < 0
};

SolvencyResult solvency_membership(const Eigen::VectorXd& nu, const Eigen::MatrixXd& lam,
                                   const Tolerances& tol = {}, std::size_t numeraire = 0);

/// iota = min_x 1 / (1 + l(x, 0)).
template <typename Derived>
double liquidity_floor(const Eigen::MatrixBase<Derived>& lam, std::size_t numeraire = 0) {
  double iota = 1.0;
  const auto c = static_cast<Eigen::Index>(numeraire);
  for (Eigen::Index x = 0; x < lam.rows(); ++x)
    if (x != c) iota = std::min(iota, 1.0 / (1.0 + double(lam(x, c))));
  return iota;
}

}  // namespace conic
