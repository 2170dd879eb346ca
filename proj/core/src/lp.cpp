#include "didcnc/lp.hpp"

#include <cmath>
#include <stdexcept>

namespace didcnc {

int LinearProgram::add_variable(double objective) {
  objective_.push_back(objective);
  return static_cast<int>(objective_.size()) - 1;
}

void LinearProgram::set_objective(int var, double coefficient) {
  objective_.at(var) = coefficient;
}

void LinearProgram::add_row(std::vector<std::pair<int, double>> terms, Sense sense,
                            double rhs) {
  for (const auto& [var, coef] : terms) {
    if (var < 0 || var >= variable_count()) {
      throw std::out_of_range("LinearProgram::add_row: unknown variable");
    }
    (void)coef;
  }
  rows_.push_back(Row{std::move(terms), sense, rhs});
}

std::string to_string(LpSolution::Status status) {
  switch (status) {
    case LpSolution::Status::kOptimal:
      return "optimal";
    case LpSolution::Status::kInfeasible:
      return "infeasible";
    case LpSolution::Status::kUnbounded:
      return "unbounded";
    case LpSolution::Status::kIterationLimit:
      return "iteration-limit";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& options)
      : opt_(options), n_(lp.variable_count()), m_(lp.row_count()) {
    int slacks = 0;
    int artificials = 0;
    for (const auto& row : lp.rows()) {
      const auto sense = effective_sense(row);
      if (sense != LinearProgram::Sense::kEq) ++slacks;
      if (sense != LinearProgram::Sense::kLe) ++artificials;
    }
    first_art_ = n_ + slacks;
    cols_ = first_art_ + artificials;
    width_ = cols_ + 1;
    t_.assign(static_cast<std::size_t>(m_ + 1) * width_, 0.0);
    basis_.assign(m_, -1);
    int slack = n_;
    int art = first_art_;
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp.rows()[i];
      const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
      for (const auto& [var, coef] : row.terms) at(i, var) += sign * coef;
      at(i, cols_) = sign * row.rhs;
      switch (effective_sense(row)) {
        case LinearProgram::Sense::kLe:
          at(i, slack) = 1.0;
          basis_[i] = slack++;
          break;
        case LinearProgram::Sense::kGe:
          at(i, slack++) = -1.0;
          at(i, art) = 1.0;
          basis_[i] = art++;
          break;
        case LinearProgram::Sense::kEq:
          at(i, art) = 1.0;
          basis_[i] = art++;
          break;
      }
    }
    allowed_ = cols_;
  }

  LpSolution run(const LinearProgram& lp) {
    LpSolution sol;
    // Phase 1: maximize -sum(artificials).
    if (first_art_ < cols_) {
      clear_objective();
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] < first_art_) continue;
        for (int j = 0; j <= cols_; ++j) {
          if (j >= first_art_ && j < cols_) continue;
          obj(j) += at(i, j);
        }
      }
      allowed_ = cols_;
      const auto status = iterate(sol.iterations);
      if (status == LpSolution::Status::kIterationLimit) {
        sol.status = status;
        return sol;
      }
      double scale = 1.0;
      for (const auto& row : lp.rows()) scale = std::max(scale, std::abs(row.rhs));
      if (obj(cols_) > opt_.tolerance * scale * 10.0) {
        sol.status = LpSolution::Status::kInfeasible;
        return sol;
      }
      drive_out_artificials();
    }
    // Phase 2.
    allowed_ = first_art_;
    clear_objective();
    const auto& c = lp.objective();
    for (int j = 0; j < n_; ++j) obj(j) = c[j];
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      if (b < 0 || b >= n_ || c[b] == 0.0) continue;
      for (int j = 0; j <= cols_; ++j) obj(j) -= c[b] * at(i, j);
    }
    sol.status = iterate(sol.iterations);
    if (sol.status != LpSolution::Status::kOptimal) return sol;
    sol.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= 0 && basis_[i] < n_) sol.x[basis_[i]] = std::max(0.0, at(i, cols_));
    }
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j) sol.objective += c[j] * sol.x[j];
    return sol;
  }

 private:
  static LinearProgram::Sense effective_sense(const LinearProgram::Row& row) {
    if (row.rhs >= 0.0) return row.sense;
    switch (row.sense) {
      case LinearProgram::Sense::kLe:
        return LinearProgram::Sense::kGe;
      case LinearProgram::Sense::kGe:
        return LinearProgram::Sense::kLe;
      default:
        return LinearProgram::Sense::kEq;
    }
  }

  double& at(int i, int j) { return t_[static_cast<std::size_t>(i) * width_ + j]; }
  double& obj(int j) { return at(m_, j); }

  void clear_objective() {
    for (int j = 0; j <= cols_; ++j) obj(j) = 0.0;
  }

  LpSolution::Status iterate(int& iterations) {
    int degenerate = 0;
    while (true) {
      if (iterations >= opt_.max_iterations) return LpSolution::Status::kIterationLimit;
      const bool bland = degenerate >= opt_.degenerate_limit;
      int enter = -1;
      double best = opt_.tolerance;
      for (int j = 0; j < allowed_; ++j) {
        const double d = obj(j);
        if (d > best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return LpSolution::Status::kOptimal;
      int leave = -1;
      double ratio = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= opt_.tolerance) continue;
        const double r = at(i, cols_) / a;
        if (leave < 0 || r < ratio - 1e-12) {
          leave = i;
          ratio = r;
        } else if (r <= ratio + 1e-12) {
          const bool take = bland ? basis_[i] < basis_[leave] : a > at(leave, enter);
          if (take) {
            leave = i;
            ratio = std::min(ratio, r);
          }
        }
      }
      if (leave < 0) return LpSolution::Status::kUnbounded;
      degenerate = ratio <= opt_.tolerance ? degenerate + 1 : 0;
      pivot(leave, enter);
      ++iterations;
    }
  }

  void pivot(int r, int c) {
    const double p = at(r, c);
    nz_.clear();
    for (int j = 0; j <= cols_; ++j) {
      double& v = at(r, j);
      if (v == 0.0) continue;
      v /= p;
      if (std::abs(v) < 1e-14) {
        v = 0.0;
        continue;
      }
      nz_.push_back(j);
    }
    at(r, c) = 1.0;
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      double* row = &t_[static_cast<std::size_t>(i) * width_];
      const double* prow = &t_[static_cast<std::size_t>(r) * width_];
      for (int j : nz_) {
        row[j] -= f * prow[j];
        if (std::abs(row[j]) < 1e-13) row[j] = 0.0;
      }
      row[c] = 0.0;
    }
    if (r < m_) basis_[r] = c;
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < first_art_) continue;
      int best = -1;
      double mag = opt_.tolerance;
      for (int j = 0; j < first_art_; ++j) {
        if (std::abs(at(i, j)) > mag) {
          mag = std::abs(at(i, j));
          best = j;
        }
      }
      if (best >= 0) {
        pivot(i, best);
      } else {
        // Redundant row: zero it so it never constrains phase 2.
        for (int j = 0; j <= cols_; ++j) at(i, j) = 0.0;
        basis_[i] = -1;
      }
    }
  }

  SimplexOptions opt_;
  int n_;
  int m_;
  int first_art_ = 0;
  int cols_ = 0;
  int width_ = 0;
  int allowed_ = 0;
  std::vector<double> t_;
  std::vector<int> basis_;
  std::vector<int> nz_;
};

}  // namespace

LpSolution solve(const LinearProgram& lp, const SimplexOptions& options) {
  Tableau tableau(lp, options);
  return tableau.run(lp);
}

}  // namespace didcnc
