#pragma once

// Dense two-phase primal simplex on an Eigen tableau.
//
// Solves   min c'x   s.t.   a_i x (<=, >=, =) b_i,   x_j >= 0 or free.
//
// Pivoting is Dantzig's rule with lowest-index tie breaking; after a run of
// degenerate pivots it falls back to Bland's rule until progress resumes, so
// the pivot sequence (and therefore every reported vertex) is a deterministic
// function of the input. The ratio test is two-pass (Harris): among rows
// within a small tolerance of the minimum ratio it takes the largest pivot.
// The tableau is rebuilt from the original columns through a dense LU of the
// basis at regular intervals and before optimality is accepted, so rounding
// does not accumulate across long pivot sequences.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace conic::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };
enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

template <typename Scalar>
struct Solution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Status status = Status::IterationLimit;
  Scalar objective = Scalar(0);
  Vector x;  // one entry per variable
  // Row multipliers in the min convention: c - A'y >= 0 on nonnegative
  // variables, = 0 on free ones; y <= 0 on <= rows, y >= 0 on >= rows.
  Vector duals;
  // Infeasible only: same sign pattern as `duals`, A'y <= 0 on nonnegative
  // variables, A'y = 0 on free ones, and b'y > 0.
  Vector farkas;
  // Unbounded only: direction d with c'd < 0 along which x stays feasible.
  Vector ray;
  int iterations = 0;

  bool optimal() const { return status == Status::Optimal; }
};

template <typename Scalar>
struct SolverOptions {
  Scalar pivot_tolerance = Scalar(1e-10);
  Scalar cost_tolerance = Scalar(1e-10);
  Scalar feasibility_tolerance = Scalar(1e-9);
  Scalar harris_tolerance = Scalar(1e-12);
  int degenerate_run_before_bland = 50;
  int reinversion_interval = 64;  // pivots between fresh factorizations of the basis
  int max_iterations = 0;  // 0: 50 * (rows + columns)
};

template <typename Scalar>
class LinearProgram {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int add_variable(Scalar cost, bool free = false) {
    cost_.push_back(cost);
    free_.push_back(free);
    return static_cast<int>(cost_.size()) - 1;
  }

  int add_constraint(Sense sense, Scalar rhs) {
    sense_.push_back(sense);
    rhs_.push_back(rhs);
    return static_cast<int>(rhs_.size()) - 1;
  }

  /// Adds `value` to the coefficient of variable `var` in row `row`.
  void add_coefficient(int row, int var, Scalar value) {
    if (value != Scalar(0)) entries_.push_back({row, var, value});
  }

  void set_cost(int var, Scalar cost) { cost_.at(static_cast<std::size_t>(var)) = cost; }

  int variables() const { return static_cast<int>(cost_.size()); }
  int constraints() const { return static_cast<int>(rhs_.size()); }

  Matrix dense_matrix() const {
    Matrix a = Matrix::Zero(constraints(), variables());
    for (const auto& e : entries_) a(e.row, e.var) += e.value;
    return a;
  }
  Vector rhs() const { return Eigen::Map<const Vector>(rhs_.data(), constraints()); }
  Vector costs() const { return Eigen::Map<const Vector>(cost_.data(), variables()); }
  Sense sense(int row) const { return sense_.at(static_cast<std::size_t>(row)); }
  bool is_free(int var) const { return free_.at(static_cast<std::size_t>(var)); }

  Solution<Scalar> solve(const SolverOptions<Scalar>& options = {}) const;

 private:
  struct Entry {
    int row;
    int var;
    Scalar value;
  };
  std::vector<Scalar> cost_;
  std::vector<bool> free_;
  std::vector<Sense> sense_;
  std::vector<Scalar> rhs_;
  std::vector<Entry> entries_;
};

namespace detail {

enum class ColumnKind { Structural, Slack, Artificial };

template <typename Scalar>
class Tableau {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Tableau(const Matrix& a, const Vector& b, const std::vector<ColumnKind>& kinds, std::vector<int> basis,
          const SolverOptions<Scalar>& options)
      : a_(a), b_(b), kinds_(kinds), basis_(std::move(basis)), options_(options) {
    const auto m = a.rows();
    const auto n = a.cols();
    t_.resize(m + 1, n + 1);
    t_.topLeftCorner(m, n) = a;
    t_.topRightCorner(m, 1) = b;
    t_.row(m).setZero();
    barred_.assign(static_cast<std::size_t>(n), false);
  }

  Eigen::Index rows() const { return a_.rows(); }
  Eigen::Index cols() const { return a_.cols(); }
  const std::vector<int>& basis() const { return basis_; }
  int iterations() const { return iterations_; }

  void bar(int column) { barred_[static_cast<std::size_t>(column)] = true; }

  // Installs the objective row for cost vector c (reduced costs and -z).
  void set_objective(const Vector& c) {
    c_ = c;
    price();
  }

  // Rebuilds the tableau as B^-1 [A | b] from the original columns.
  // Returns false (tableau untouched) when the basis is numerically singular.
  bool reinvert() {
    const auto m = rows();
    since_reinversion_ = 0;
    if (m == 0) return true;
    Matrix basis_matrix(m, m);
    for (Eigen::Index i = 0; i < m; ++i) basis_matrix.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Matrix> lu(basis_matrix);
    if (!lu.isInvertible()) return false;
    Matrix rhs(m, cols() + 1);
    rhs.leftCols(cols()) = a_;
    rhs.col(cols()) = b_;
    t_.topRows(m) = lu.solve(rhs);
    for (Eigen::Index i = 0; i < m; ++i) t_(i, basis_[static_cast<std::size_t>(i)]) = Scalar(1);
    price();
    return true;
  }

  Scalar objective_value() const { return -t_(rows(), cols()); }

  // Runs simplex iterations on the installed objective.
  Status run(int max_iterations) {
    const auto m = rows();
    int degenerate_run = 0;
    while (iterations_ < max_iterations) {
      if (since_reinversion_ >= options_.reinversion_interval) reinvert();
      const bool bland = degenerate_run >= options_.degenerate_run_before_bland;
      int entering = -1;
      Scalar best = -options_.cost_tolerance;
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (barred_[static_cast<std::size_t>(j)]) continue;
        const Scalar d = t_(m, j);
        if (d < best) {
          entering = static_cast<int>(j);
          if (bland) break;
          best = d;
        }
      }
      if (entering < 0) {
        // Confirm on a fresh factorization before accepting optimality.
        if (since_reinversion_ > 0 && reinvert()) continue;
        return Status::Optimal;
      }

      // Harris pass 1: the smallest ratio with a slightly relaxed bound.
      Scalar bound = std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        const Scalar coef = t_(i, entering);
        if (coef <= options_.pivot_tolerance) continue;
        bound = std::min(bound, (std::max(Scalar(0), t_(i, cols())) + options_.harris_tolerance) / coef);
      }
      if (bound == std::numeric_limits<Scalar>::infinity()) {
        if (since_reinversion_ > 0 && reinvert()) continue;
        unbounded_column_ = entering;
        return Status::Unbounded;
      }
      // Pass 2: the largest pivot among rows within that bound.
      int leaving = -1;
      Scalar best_coef = Scalar(0);
      for (Eigen::Index i = 0; i < m; ++i) {
        const Scalar coef = t_(i, entering);
        if (coef <= options_.pivot_tolerance) continue;
        if (std::max(Scalar(0), t_(i, cols())) / coef > bound) continue;
        const int bi = basis_[static_cast<std::size_t>(i)];
        if (leaving < 0 || coef > best_coef ||
            (coef == best_coef && bi < basis_[static_cast<std::size_t>(leaving)])) {
          leaving = static_cast<int>(i);
          best_coef = coef;
        }
      }
      const Scalar step = std::max(Scalar(0), t_(leaving, cols())) / best_coef;
      degenerate_run = step == Scalar(0) ? degenerate_run + 1 : 0;
      pivot(leaving, entering);
      ++iterations_;
    }
    return Status::IterationLimit;
  }

  void pivot(int r, int s) {
    const Scalar inv = Scalar(1) / t_(r, s);
    t_.row(r) *= inv;
    t_(r, s) = Scalar(1);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const Scalar f = t_(i, s);
      if (f == Scalar(0)) continue;
      t_.row(i) -= f * t_.row(r);
      t_(i, s) = Scalar(0);
    }
    basis_[static_cast<std::size_t>(r)] = s;
    ++since_reinversion_;
  }

  // Pivots basic artificials out wherever a nonzero non-artificial entry
  // exists. Rows left with an artificial basic are linearly redundant.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const int bi = basis_[static_cast<std::size_t>(i)];
      if (kinds_[static_cast<std::size_t>(bi)] != ColumnKind::Artificial) continue;
      int best = -1;
      Scalar best_abs = Scalar(1e-9);
      for (Eigen::Index j = 0; j < cols(); ++j) {
        if (kinds_[static_cast<std::size_t>(j)] == ColumnKind::Artificial) continue;
        const Scalar v = std::abs(t_(i, j));
        if (v > best_abs) {
          best_abs = v;
          best = static_cast<int>(j);
        }
      }
      if (best >= 0) pivot(static_cast<int>(i), best);
    }
  }

  // Basic values and multipliers y (B'y = c_B) recovered from a fresh
  // factorization of the basis matrix.
  void refine(const Vector& c, Vector& x, Vector& y) const {
    const auto m = rows();
    Matrix basis_matrix(m, m);
    Vector cb(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const int bi = basis_[static_cast<std::size_t>(i)];
      basis_matrix.col(i) = a_.col(bi);
      cb(i) = c(bi);
    }
    x = Vector::Zero(cols());
    if (m == 0) {
      y = Vector(0);
      return;
    }
    Eigen::PartialPivLU<Matrix> lu(basis_matrix);
    const Vector xb = lu.solve(b_);
    y = lu.transpose().solve(cb);
    for (Eigen::Index i = 0; i < m; ++i) x(basis_[static_cast<std::size_t>(i)]) = xb(i);
  }

  // Column of the tableau for the unbounded direction.
  Vector unbounded_direction() const {
    Vector d = Vector::Zero(cols());
    if (unbounded_column_ < 0) return d;
    d(unbounded_column_) = Scalar(1);
    for (Eigen::Index i = 0; i < rows(); ++i) d(basis_[static_cast<std::size_t>(i)]) = -t_(i, unbounded_column_);
    return d;
  }

 private:
  Matrix a_;
  Vector b_;
  std::vector<ColumnKind> kinds_;
  std::vector<int> basis_;
  // Objective row from the installed costs and the current tableau body.
  void price() {
    const auto m = rows();
    t_.row(m).head(cols()) = c_.transpose();
    t_(m, cols()) = Scalar(0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar cb = c_(basis_[static_cast<std::size_t>(i)]);
      if (cb != Scalar(0)) t_.row(m) -= cb * t_.row(i);
    }
  }

  SolverOptions<Scalar> options_;
  Vector c_;
  int since_reinversion_ = 0;
  RowMatrix t_;
  std::vector<bool> barred_;
  int iterations_ = 0;
  int unbounded_column_ = -1;
};

}  // namespace detail

template <typename Scalar>
Solution<Scalar> LinearProgram<Scalar>::solve(const SolverOptions<Scalar>& options) const {
  using detail::ColumnKind;
  const int m = constraints();
  const int n = variables();

  // Standard form columns: structural (free variables split in two),
  // one slack per inequality, artificials where no slack can start basic.
  std::vector<int> plus_col(static_cast<std::size_t>(n)), minus_col(static_cast<std::size_t>(n), -1);
  int cols = 0;
  for (int j = 0; j < n; ++j) {
    plus_col[static_cast<std::size_t>(j)] = cols++;
    if (free_[static_cast<std::size_t>(j)]) minus_col[static_cast<std::size_t>(j)] = cols++;
  }
  const int structural = cols;
  std::vector<int> slack_col(static_cast<std::size_t>(m), -1);
  for (int i = 0; i < m; ++i)
    if (sense_[static_cast<std::size_t>(i)] != Sense::Equal) slack_col[static_cast<std::size_t>(i)] = cols++;

  std::vector<Scalar> sign(static_cast<std::size_t>(m), Scalar(1));
  std::vector<int> art_col(static_cast<std::size_t>(m), -1);
  std::vector<int> basis(static_cast<std::size_t>(m), -1);
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    if (rhs_[si] < Scalar(0)) sign[si] = Scalar(-1);
    const Scalar slack_coef = sense_[si] == Sense::LessEqual ? Scalar(1) : Scalar(-1);
    if (slack_col[si] >= 0 && slack_coef * sign[si] > Scalar(0)) {
      basis[si] = slack_col[si];
    } else {
      art_col[si] = cols++;
      basis[si] = art_col[si];
    }
  }

  using Matrix = typename LinearProgram<Scalar>::Matrix;
  Matrix a = Matrix::Zero(m, cols);
  Vector b(m);
  for (const auto& e : entries_) {
    a(e.row, plus_col[static_cast<std::size_t>(e.var)]) += e.value;
    if (minus_col[static_cast<std::size_t>(e.var)] >= 0) a(e.row, minus_col[static_cast<std::size_t>(e.var)]) -= e.value;
  }
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    if (slack_col[si] >= 0) a(i, slack_col[si]) = sense_[si] == Sense::LessEqual ? Scalar(1) : Scalar(-1);
    a.row(i) *= sign[si];
    b(i) = rhs_[si] * sign[si];
    if (art_col[si] >= 0) a(i, art_col[si]) = Scalar(1);
  }

  std::vector<ColumnKind> kinds(static_cast<std::size_t>(cols), ColumnKind::Structural);
  for (int i = 0; i < m; ++i) {
    const auto si = static_cast<std::size_t>(i);
    if (slack_col[si] >= 0) kinds[static_cast<std::size_t>(slack_col[si])] = ColumnKind::Slack;
    if (art_col[si] >= 0) kinds[static_cast<std::size_t>(art_col[si])] = ColumnKind::Artificial;
  }

  Vector c = Vector::Zero(cols);
  for (int j = 0; j < n; ++j) {
    c(plus_col[static_cast<std::size_t>(j)]) = cost_[static_cast<std::size_t>(j)];
    if (minus_col[static_cast<std::size_t>(j)] >= 0) c(minus_col[static_cast<std::size_t>(j)]) = -cost_[static_cast<std::size_t>(j)];
  }

  const int limit = options.max_iterations > 0 ? options.max_iterations : 50 * (m + cols) + 100;
  detail::Tableau<Scalar> tableau(a, b, kinds, basis, options);

  Solution<Scalar> out;
  auto to_rows = [&](const Vector& y_std) {
    Vector y(m);
    for (int i = 0; i < m; ++i) y(i) = y_std(i) * sign[static_cast<std::size_t>(i)];
    return y;
  };
  auto to_vars = [&](const Vector& x_std) {
    Vector x(n);
    for (int j = 0; j < n; ++j) {
      x(j) = x_std(plus_col[static_cast<std::size_t>(j)]);
      if (minus_col[static_cast<std::size_t>(j)] >= 0) x(j) -= x_std(minus_col[static_cast<std::size_t>(j)]);
    }
    return x;
  };

  const bool has_artificials = std::any_of(art_col.begin(), art_col.end(), [](int k) { return k >= 0; });
  if (has_artificials) {
    Vector phase1 = Vector::Zero(cols);
    for (int k : art_col)
      if (k >= 0) phase1(k) = Scalar(1);
    tableau.set_objective(phase1);
    const Status s1 = tableau.run(limit);
    out.iterations = tableau.iterations();
    if (s1 == Status::IterationLimit) {
      out.status = s1;
      return out;
    }
    const Scalar scale = std::max(Scalar(1), b.size() ? b.cwiseAbs().maxCoeff() : Scalar(0));
    if (tableau.objective_value() > options.feasibility_tolerance * scale) {
      Vector x_std, y_std;
      tableau.refine(phase1, x_std, y_std);
      out.status = Status::Infeasible;
      out.farkas = to_rows(y_std);
      out.x = to_vars(x_std);
      return out;
    }
    tableau.expel_artificials();
    for (int k : art_col)
      if (k >= 0) tableau.bar(k);
  }

  tableau.set_objective(c);
  const Status s2 = tableau.run(limit);
  out.iterations = tableau.iterations();
  out.status = s2;
  if (s2 == Status::Unbounded) {
    out.ray = to_vars(tableau.unbounded_direction());
    return out;
  }
  if (s2 != Status::Optimal) return out;

  Vector x_std, y_std;
  tableau.refine(c, x_std, y_std);
  for (int j = 0; j < structural; ++j)
    if (x_std(j) < Scalar(0) && x_std(j) > -options.feasibility_tolerance) x_std(j) = Scalar(0);
  out.x = to_vars(x_std);
  out.duals = to_rows(y_std);
  out.objective = costs().dot(out.x);
  return out;
}

}  // namespace conic::lp
