#pragma once

// Dense tableau simplex for small problems of the form
//   maximize c.x  subject to  A x <= b, x >= 0, with b >= 0,
// so the origin is a feasible starting basis.

#include <vector>

namespace eadlab {

struct LpResult {
  enum class Status { Optimal, Unbounded };

  Status status = Status::Optimal;
  double value = 0.0;
  std::vector<double> x;
  int pivots = 0;
};

/// Throws PreconditionError on inconsistent dimensions or a negative entry
/// of b. Uses the largest-coefficient rule and falls back to Bland's rule
/// after a run of degenerate pivots.
LpResult simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                     const std::vector<double>& c);

}  // namespace eadlab
