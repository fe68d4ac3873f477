#pragma once

#include <string>

#include "eadlab/expr.hpp"
#include "eadlab/model.hpp"

namespace eadlab::testing {

/// Spec on [lo, hi] with the uniform {-1, +1} kernel.
inline ModelSpec make_spec(const std::string& b, const std::string& d, const std::string& c,
                           const std::string& m = "1", double x0 = 0.0, double lo = 0.0, double hi = 1.0) {
  ModelSpec s;
  s.space = {lo, hi};
  s.rates = {expr::parse(b), expr::parse(d), expr::parse(c), expr::parse(m)};
  s.kernel = MutationKernel::symmetric_unit();
  s.x0 = x0;
  return s;
}

}  // namespace eadlab::testing
