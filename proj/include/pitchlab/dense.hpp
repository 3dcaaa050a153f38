#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pitchlab/common.hpp"

namespace pitchlab {

using DenseMatrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting; throws ValidationError on a
// singular system. Sized for the small systems in this project.
std::vector<double> solve_linear(DenseMatrix a, std::vector<double> b);

// LDL^T factorization of a symmetric positive definite matrix, factored
// once and solved many times.
class LdltFactor {
 public:
  explicit LdltFactor(DenseMatrix a);  // throws ValidationError if not SPD
  std::vector<double> solve(std::vector<double> b) const;
  std::size_t size() const { return d_.size(); }

 private:
  DenseMatrix l_;
  std::vector<double> d_;
};

}  // namespace pitchlab
