#pragma once

#include <cstddef>
#include <vector>

#include "fsum/errors.hpp"

namespace fsum {

// Dense row-major matrix of doubles; the carrier for F-SUM maps and other
// per-cell grids.  Indexing is (row, col) to match the map's (m, n) indices.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // rows * cols, row-major

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {
    if (r <= 0 || c <= 0) throw ShapeError("Matrix: non-positive dimensions");
  }

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }

  double& at(int r, int c) {
    check(r, c);
    return values[static_cast<std::size_t>(r) * cols + c];
  }
  double at(int r, int c) const {
    check(r, c);
    return values[static_cast<std::size_t>(r) * cols + c];
  }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }

 private:
  void check(int r, int c) const {
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw BoundsError("Matrix: index (" + std::to_string(r) + "," +
                        std::to_string(c) + ") outside " + std::to_string(rows) +
                        "x" + std::to_string(cols));
    }
  }
};

}  // namespace fsum
