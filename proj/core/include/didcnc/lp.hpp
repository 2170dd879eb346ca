#pragma once

#include <string>
#include <utility>
#include <vector>

namespace didcnc {

// Dense linear program: maximize c'x subject to rows (<=, =, >=) and x >= 0.
class LinearProgram {
 public:
  enum class Sense { kLe, kEq, kGe };

  struct Row {
    std::vector<std::pair<int, double>> terms;
    Sense sense = Sense::kLe;
    double rhs = 0.0;
  };

  int add_variable(double objective = 0.0);
  void set_objective(int var, double coefficient);
  void add_row(std::vector<std::pair<int, double>> terms, Sense sense, double rhs);

  int variable_count() const { return static_cast<int>(objective_.size()); }
  int row_count() const { return static_cast<int>(rows_.size()); }
  const std::vector<double>& objective() const { return objective_; }
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<double> objective_;
  std::vector<Row> rows_;
};

struct LpSolution {
  enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };
  Status status = Status::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

struct SimplexOptions {
  double tolerance = 1e-9;
  int max_iterations = 200000;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int degenerate_limit = 50;
};

// Two-phase tableau simplex. Dantzig pricing with a Bland fallback on
// degenerate stalls; artificials are driven out of the basis before phase 2.
LpSolution solve(const LinearProgram& lp, const SimplexOptions& options = {});

std::string to_string(LpSolution::Status status);

}  // namespace didcnc
