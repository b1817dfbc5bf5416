#pragma once
// Finite-difference reference implementations. They only evaluate
// expressions numerically and never call the symbolic derivative, so they
// are an independent check on the calculus kernel.

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <vector>

#include "t2m/tensors.hpp"

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using ScalarFn = std::function<double(const Vec&)>;
using FieldFn = std::function<Vec(const Vec&)>;
using MatFn = std::function<Mat(const Vec&)>;

inline constexpr double kStep = 1e-5;

inline ScalarFn fn(const t2m::Expr& e) {
  return [e](const Vec& p) { return t2m::evaluate(e, std::span<const double>(p.data(), p.size())); };
}

inline FieldFn fn(const t2m::VectorField& x) {
  return [x](const Vec& p) { return x.evaluate(p); };
}

inline MatFn fn(const t2m::VectorForm1& k) {
  return [k](const Vec& p) { return k.evaluate(p); };
}

inline double partial(const ScalarFn& f, const Vec& p, int k, double h = kStep) {
  Vec a = p, b = p;
  a(k) += h;
  b(k) -= h;
  return (f(a) - f(b)) / (2 * h);
}

/// Jacobian J(r, m) = d_m X^r by central differences.
inline Mat jacobian(const FieldFn& x, const Vec& p, double h = kStep) {
  const Vec x0 = x(p);
  Mat j(x0.size(), p.size());
  for (int m = 0; m < p.size(); ++m) {
    Vec a = p, b = p;
    a(m) += h;
    b(m) -= h;
    j.col(m) = (x(a) - x(b)) / (2 * h);
  }
  return j;
}

/// Directional derivative of a matrix field along v.
inline Mat directional(const MatFn& k, const Vec& p, const Vec& v, double h = kStep) {
  return (k(p + h * v) - k(p - h * v)) / (2 * h);
}

inline Vec lie_bracket(const FieldFn& x, const FieldFn& y, const Vec& p) {
  return jacobian(y, p) * x(p) - jacobian(x, p) * y(p);
}

/// [X, K] at p as a matrix.
inline Mat bracket(const FieldFn& x, const MatFn& k, const Vec& p) {
  const Mat dx = jacobian(x, p);
  const Mat kp = k(p);
  return directional(k, p, x(p)) + kp * dx - dx * kp;
}

/// [K, L](e_i, e_j) at p, from the eight-term formula with coordinate
/// fields, using the jacobians of the columns.
inline Vec fn_bracket(const MatFn& k, const MatFn& l, const Vec& p, int i, int j) {
  auto col = [](const MatFn& m, int c) -> FieldFn { return [m, c](const Vec& q) -> Vec { return m(q).col(c); }; };
  const Mat kp = k(p), lp = l(p);
  const Mat dki = jacobian(col(k, i), p), dkj = jacobian(col(k, j), p);
  const Mat dli = jacobian(col(l, i), p), dlj = jacobian(col(l, j), p);
  Vec ki = kp.col(i), kj = kp.col(j), li = lp.col(i), lj = lp.col(j);
  Vec r = (dlj * ki - dki * lj) + (dkj * li - dli * kj);
  r += kp * (dli.col(j) - dlj.col(i));
  r += lp * (dki.col(j) - dkj.col(i));
  return r;
}

/// Uniform sample point with |y_i| in [0.5, 2] and random y signs.
inline Vec sample_point(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> box(-1.0, 1.0), mag(0.5, 2.0);
  std::bernoulli_distribution sign(0.5);
  Vec p(3 * n);
  for (int i = 0; i < n; ++i) {
    p(i) = box(rng);
    p(n + i) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
    p(2 * n + i) = box(rng);
  }
  return p;
}

}  // namespace oracle
