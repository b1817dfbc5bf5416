#pragma once

#include <string>

#include "t2m/errors.hpp"
#include "t2m/expr.hpp"

namespace t2m {

/// Coordinate blocks of T2M: position x, velocity y, acceleration z.
enum class Block : int { X = 0, Y = 1, Z = 2 };

/// The chart (x_i, y_i, z_i), i = 1..n, on T2M. Coordinates are numbered
/// blockwise: x_i -> i, y_i -> n + i, z_i -> 2n + i (0-based i).
class Chart {
 public:
  explicit Chart(int n) : n_(n) {
    if (n < 1) throw ChartMismatch("chart needs n >= 1, got " + std::to_string(n));
  }

  int n() const noexcept { return n_; }
  int dim() const noexcept { return 3 * n_; }

  int index(Block b, int i) const noexcept { return static_cast<int>(b) * n_ + i; }
  Block block_of(int k) const noexcept { return static_cast<Block>(k / n_); }

  Expr x(int i) const { return coord(index(Block::X, i)); }
  Expr y(int i) const { return coord(index(Block::Y, i)); }
  Expr z(int i) const { return coord(index(Block::Z, i)); }

  std::string label(int k) const {
    return std::string(1, "xyz"[k / n_]) + std::to_string(k % n_ + 1);
  }

  friend bool operator==(const Chart&, const Chart&) = default;

 private:
  int n_;
};

inline void require_same_chart(const Chart& a, const Chart& b, const char* what) {
  if (a != b)
    throw ChartMismatch(std::string(what) + ": charts differ (n=" + std::to_string(a.n()) +
                        " vs n=" + std::to_string(b.n()) + ")");
}

/// Throws ChartMismatch when `e` references a coordinate outside `chart`.
inline void require_in_chart(const Expr& e, const Chart& chart, const char* what) {
  if (e.max_coord() >= chart.dim())
    throw ChartMismatch(std::string(what) + ": expression references coordinate " +
                        std::to_string(e.max_coord()) + " outside a chart of dimension " +
                        std::to_string(chart.dim()));
}

}  // namespace t2m
