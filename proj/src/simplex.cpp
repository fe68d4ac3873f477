#include "eadlab/simplex.hpp"

#include <cmath>
#include <cstddef>

#include "eadlab/error.hpp"

namespace eadlab {

namespace {
constexpr double kTol = 1e-12;
constexpr int kDegenerateSwitch = 50;
}  // namespace

LpResult simplex_max(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                     const std::vector<double>& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  if (b.size() != m) throw PreconditionError("simplex_max: A and b have different row counts");
  for (std::size_t i = 0; i < m; ++i) {
    if (A[i].size() != n) throw PreconditionError("simplex_max: ragged constraint matrix");
    if (!(b[i] >= 0.0)) throw PreconditionError("simplex_max: b must be nonnegative");
  }

  // Tableau rows 0..m-1 are constraints, row m is the reduced objective.
  // Columns 0..n-1 structural, n..n+m-1 slack, n+m right-hand side.
  const std::size_t cols = n + m + 1;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(cols, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][cols - 1] = b[i];
    basis[i] = n + i;
  }
  for (std::size_t j = 0; j < n; ++j) T[m][j] = -c[j];

  LpResult res;
  bool bland = false;
  int degenerate_run = 0;
  for (;;) {
    std::size_t enter = cols;
    double best = -kTol;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (T[m][j] < -kTol) {
        if (bland) {
          enter = j;
          break;
        }
        if (T[m][j] < best) {
          best = T[m][j];
          enter = j;
        }
      }
    }
    if (enter == cols) break;

    std::size_t leave = m;
    double ratio = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (T[i][enter] > kTol) {
        const double r = T[i][cols - 1] / T[i][enter];
        if (leave == m || r < ratio - kTol ||
            (std::fabs(r - ratio) <= kTol && basis[i] < basis[leave])) {
          leave = i;
          ratio = r;
        }
      }
    }
    if (leave == m) {
      res.status = LpResult::Status::Unbounded;
      res.value = INFINITY;
      return res;
    }

    if (ratio <= kTol) {
      if (++degenerate_run > kDegenerateSwitch) bland = true;
    } else {
      degenerate_run = 0;
    }

    const double piv = T[leave][enter];
    for (double& v : T[leave]) v /= piv;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = T[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) T[i][j] -= f * T[leave][j];
    }
    basis[leave] = enter;
    ++res.pivots;
  }

  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = T[i][cols - 1];
  res.value = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.value += c[j] * res.x[j];
  return res;
}

}  // namespace eadlab
