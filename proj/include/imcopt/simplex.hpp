#pragma once

#include <vector>

namespace imcopt {

// Dense two-phase primal simplex with Bland's rule. Problems here are small
// (tens of rows), so a tableau is the right tool.
//
//   minimize c.x  subject to  a_i.x (<=|=) b_i,  x >= 0,  b_i >= 0
struct LpProblem {
  enum class Rel { le, eq };
  struct Row {
    std::vector<double> coeffs;
    Rel rel = Rel::le;
    double rhs = 0.0;
  };
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<Row> rows;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

LpSolution solve_lp(const LpProblem& prob, long max_pivots = 200000);

}  // namespace imcopt
