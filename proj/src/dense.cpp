#include "pitchlab/dense.hpp"

#include <algorithm>

namespace pitchlab {

std::vector<double> solve_linear(DenseMatrix a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) {
      throw ValidationError("singular linear system");
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

LdltFactor::LdltFactor(DenseMatrix a) {
  const std::size_t n = a.size();
  l_.assign(n, std::vector<double>(n, 0.0));
  d_.assign(n, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i][i]));
  if (scale == 0.0) scale = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    double dj = a[j][j];
    for (std::size_t k = 0; k < j; ++k) dj -= l_[j][k] * l_[j][k] * d_[k];
    if (dj <= 1e-12 * scale) {
      throw ValidationError("matrix is not positive definite");
    }
    d_[j] = dj;
    l_[j][j] = 1.0;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i][j];
      for (std::size_t k = 0; k < j; ++k) v -= l_[i][k] * l_[j][k] * d_[k];
      l_[i][j] = v / dj;
    }
  }
}

std::vector<double> LdltFactor::solve(std::vector<double> b) const {
  const std::size_t n = d_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= l_[i][k] * b[k];
  }
  for (std::size_t i = 0; i < n; ++i) b[i] /= d_[i];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= l_[k][i] * b[k];
  }
  return b;
}

}  // namespace pitchlab
