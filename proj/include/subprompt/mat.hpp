#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace subprompt {

// Dense row-major matrix of doubles. All model math runs in double;
// on-disk feature/checkpoint formats are float32.
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), v(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

  double* row(std::size_t r) { return v.data() + r * cols; }
  const double* row(std::size_t r) const { return v.data() + r * cols; }

  std::size_t size() const { return rows * cols; }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  void check_shape(std::size_t r, std::size_t c, const char* what) const {
    if (rows != r || cols != c) throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
};

inline Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dims differ");
  Mat c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double av = ar[k];
      if (av == 0.0) continue;
      const double* br = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) cr[j] += av * br[j];
    }
  }
  return c;
}

}  // namespace subprompt
