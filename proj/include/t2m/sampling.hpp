#pragma once
// Sample points and residual measurement over point sets.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "t2m/tensors.hpp"

namespace t2m {

/// Uniform sampling box; the y block is drawn with |y_i| in [y_min, y_max]
/// and a random sign, keeping points away from the zero section.
struct SamplingSpec {
  int points = 25;
  std::uint64_t seed = 7;
  double x_min = -1.0, x_max = 1.0;
  double y_min = 0.5, y_max = 2.0;
  double z_min = -1.0, z_max = 1.0;
};

inline std::vector<Point> sample_points(const Chart& chart, const SamplingSpec& spec = {}) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> xs(spec.x_min, spec.x_max), ys(spec.y_min, spec.y_max),
      zs(spec.z_min, spec.z_max), coin(0.0, 1.0);
  const int n = chart.n();
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(spec.points));
  for (int s = 0; s < spec.points; ++s) {
    Point p(chart.dim());
    for (int i = 0; i < n; ++i) p(chart.index(Block::X, i)) = xs(rng);
    for (int i = 0; i < n; ++i) {
      const double mag = ys(rng);
      p(chart.index(Block::Y, i)) = coin(rng) < 0.5 ? -mag : mag;
    }
    for (int i = 0; i < n; ++i) p(chart.index(Block::Z, i)) = zs(rng);
    out.push_back(std::move(p));
  }
  return out;
}

/// Residual of a pointwise check: the largest absolute deviation and the
/// largest magnitude of the reference values it was compared against.
struct Residual {
  double max_abs = 0.0;
  double scale = 0.0;
  int points = 0;

  void merge(const Residual& o) {
    max_abs = std::max(max_abs, o.max_abs);
    scale = std::max(scale, o.scale);
    points = std::max(points, o.points);
  }
};

/// Pass criterion: |residual| <= abs, or with `relative` set,
/// |residual| <= abs * max(1, scale).
struct Tolerance {
  double abs = 1e-9;
  bool relative = false;

  bool accepts(const Residual& r) const {
    const double bound = relative ? abs * std::max(1.0, r.scale) : abs;
    return std::isfinite(r.max_abs) && r.max_abs <= bound;
  }
};

/// Largest |coefficient| over all points.
inline Residual max_abs(std::span<const Expr> coeffs, std::span<const Point> points) {
  Residual r;
  r.points = static_cast<int>(points.size());
  bool all_zero = true;
  for (const auto& c : coeffs)
    if (!c.is_zero()) all_zero = false;
  if (all_zero) return r;
  for (const auto& p : points) {
    Evaluator ev(p);
    for (const auto& c : coeffs) {
      if (c.is_zero()) continue;
      r.max_abs = std::max(r.max_abs, std::abs(ev(c)));
    }
  }
  return r;
}

template <class T>
Residual max_abs(const T& object, std::span<const Point> points) {
  return max_abs(object.coefficients(), points);
}

/// Residual of a - b, with the magnitude of b as scale.
template <class T>
Residual difference(const T& a, const T& b, std::span<const Point> points) {
  Residual r = max_abs(a - b, points);
  r.scale = max_abs(b, points).max_abs;
  return r;
}

/// True when every stored coefficient is the literal constant 0.
template <class T>
bool exactly_zero(const T& object) {
  for (const auto& c : object.coefficients())
    if (!c.is_zero()) return false;
  return true;
}

/// Sample points plus tolerance, shared by operations that verify their
/// own preconditions and postconditions.
struct Context {
  std::vector<Point> points;
  Tolerance tol;

  static Context make(const Chart& chart, const SamplingSpec& spec = {}, const Tolerance& tol = {}) {
    return {sample_points(chart, spec), tol};
  }
};

}  // namespace t2m
