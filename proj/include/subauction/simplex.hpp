#pragma once

#include <utility>
#include <vector>

namespace subauction {

enum class Rel { le, ge, eq };
enum class LpStatus { optimal, infeasible, unbounded };

// A linear program in "maximize c^T x" form. Variables are >= 0 unless
// declared free. Rows are sparse; the solver densifies internally (every
// problem in this library is desk-scale).
class LpProblem {
 public:
  int add_var(double obj, bool free_var = false) {
    obj_.push_back(obj);
    free_.push_back(free_var);
    return static_cast<int>(obj_.size()) - 1;
  }

  int add_row(Rel rel, double rhs, std::vector<std::pair<int, double>> coef) {
    rows_.push_back(Row{std::move(coef), rel, rhs});
    return static_cast<int>(rows_.size()) - 1;
  }

  int num_vars() const { return static_cast<int>(obj_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }

  struct Row {
    std::vector<std::pair<int, double>> coef;
    Rel rel;
    double rhs;
  };

  const std::vector<double>& obj() const { return obj_; }
  const std::vector<bool>& free_vars() const { return free_; }
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<double> obj_;
  std::vector<bool> free_;
  std::vector<Row> rows_;
};

struct LpSolution {
  LpStatus status = LpStatus::optimal;
  double objective = 0.0;
  std::vector<double> x;  // primal values, one per variable
  // Dual value per original row, with the maximization convention:
  // <= rows give y >= 0, >= rows give y <= 0, == rows are free.
  std::vector<double> y;

  // b^T y, for duality-gap checks against `objective`.
  double dual_objective(const LpProblem& lp) const;
};

// Two-phase dense tableau simplex. Deterministic. Throws NumericError if the
// pivot limit is exhausted.
LpSolution solve_lp(const LpProblem& lp);

}  // namespace subauction
