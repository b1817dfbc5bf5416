#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fd_oracle.hpp"
#include "t2m/expr.hpp"

using namespace t2m;

namespace {

double at(const Expr& e, std::initializer_list<double> p) {
  return evaluate(e, std::span<const double>(p.begin(), p.size()));
}

}  // namespace

TEST(Expr, SimplifyingBuildersCollectTerms) {
  const Expr x = coord(0), y = coord(1);
  EXPECT_EQ(x + x, Expr(2.0) * x);
  EXPECT_EQ(x * x, pow(x, 2));
  EXPECT_TRUE((x - x).is_zero());
  EXPECT_TRUE((Expr(0.0) * y).is_zero());
  EXPECT_EQ(x * y, y * x);
  EXPECT_EQ(pow(pow(x, 2), 3), pow(x, 6));
  EXPECT_EQ(x / x, Expr(1.0));
}

TEST(Expr, HashConsingGivesStructuralIdentity) {
  const Expr a = coord(0) * coord(2) + Expr(3.0);
  const Expr b = Expr(3.0) + coord(2) * coord(0);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.id(), b.id());
}

TEST(Expr, NegativeZeroFoldsToZero) {
  EXPECT_EQ(Expr(-0.0), Expr(0.0));
  EXPECT_FALSE(std::signbit(Expr(-0.0).value()));
}

TEST(Expr, EvaluatesPrimitives) {
  const Expr x = coord(0), y = coord(1);
  EXPECT_DOUBLE_EQ(at(x * y + Expr(1.0), {2, 3}), 7.0);
  EXPECT_DOUBLE_EQ(at(sqrt(x), {4, 0}), 2.0);
  EXPECT_DOUBLE_EQ(at(recip(y), {0, 4}), 0.25);
  EXPECT_DOUBLE_EQ(at(exp(x), {0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(at(pow(x, 1.5), {4, 0}), 8.0);
}

TEST(Expr, DomainErrors) {
  const Expr x = coord(0);
  EXPECT_THROW(at(recip(x), {0.0}), DomainError);
  EXPECT_THROW(at(sqrt(x), {-1.0}), DomainError);
  EXPECT_THROW(at(pow(x, 0.5), {-1.0}), DomainError);
  EXPECT_THROW(at(pow(x, -2), {0.0}), DomainError);
  EXPECT_THROW(Expr(std::nan("")), DomainError);
}

TEST(Expr, CoordinateOutsidePointIsChartMismatch) {
  EXPECT_THROW(at(coord(3), {1, 2, 3}), ChartMismatch);
}

TEST(Expr, EvaluationIsDeterministic) {
  const Expr e = exp(sqrt(coord(0) * coord(0) + Expr(1.0))) / (coord(1) + Expr(3.0));
  const double a = at(e, {0.3, 0.7});
  for (int r = 0; r < 5; ++r) EXPECT_EQ(at(e, {0.3, 0.7}), a);
}

TEST(Expr, DerivativeRules) {
  const Expr x = coord(0), y = coord(1);
  EXPECT_EQ(diff(x * y, 0), y);
  EXPECT_EQ(diff(pow(x, 3), 0), Expr(3.0) * pow(x, 2));
  EXPECT_TRUE(diff(y * y, 0).is_zero());
  EXPECT_DOUBLE_EQ(at(diff(sqrt(x), 0), {4.0, 0.0}), 0.25);
  EXPECT_DOUBLE_EQ(at(diff(exp(x * y), 1), {1.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(at(diff(recip(x), 0), {2.0, 0.0}), -0.25);
}

TEST(Expr, SolveNodeMatchesDenseSolve) {
  const Expr x = coord(0), y = coord(1);
  const auto sol = solve(2, {x, Expr(1.0), y, Expr(2.0) + x * y}, {Expr(1.0), x + y});
  const double px = 0.7, py = -1.3;
  Eigen::Matrix2d a;
  a << px, 1.0, py, 2.0 + px * py;
  const Eigen::Vector2d want = a.fullPivLu().solve(Eigen::Vector2d(1.0, px + py));
  EXPECT_NEAR(at(sol[0], {px, py}), want(0), 1e-14);
  EXPECT_NEAR(at(sol[1], {px, py}), want(1), 1e-14);
}

TEST(Expr, SingularSolveIsDomainError) {
  const Expr x = coord(0);
  const auto sol = solve(2, {x, x, x, x}, {Expr(1.0), x});
  EXPECT_THROW(at(sol[0], {1.0}), DomainError);
}

// Nested derivatives to depth 3 agree with central differences (step 1e-5)
// of the previous level, to 1e-6 relative, for every primitive.
TEST(Expr, NestedDerivativesMatchFiniteDifferences) {
  const Expr x = coord(0), y = coord(1), z = coord(2);
  const std::vector<std::pair<const char*, Expr>> cases = {
      {"add", x + Expr(2.0) * y + z},
      {"mul", x * y * z},
      {"pow", pow(x * x + Expr(1.0), 2.5) * pow(y, 3)},
      {"recip", recip(y) * z + x / (Expr(2.0) + z * z)},
      {"sqrt", sqrt(y * y + x * x + Expr(1.0))},
      {"exp", exp(x * z) * y},
      {"solve", solve(2, {y, z, x, y * y + Expr(2.0)}, {x * z, Expr(1.0) + z})[1]},
  };
  std::mt19937_64 rng(11);
  for (const auto& [name, e] : cases) {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::VectorXd p = oracle::sample_point(1, rng);
      Expr level = e;
      const int vars[3] = {trial % 3, (trial + 1) % 3, (trial + 2) % 3};
      for (int depth = 0; depth < 3; ++depth) {
        const int v = vars[depth];
        const Expr next = diff(level, v);
        const double fd = oracle::partial(oracle::fn(level), p, v);
        const double exact = evaluate(next, std::span<const double>(p.data(), p.size()));
        EXPECT_NEAR(exact, fd, 1e-6 * std::max(1.0, std::abs(exact)))
            << name << " depth " << depth + 1 << " var " << v;
        level = next;
      }
    }
  }
}

TEST(Expr, ToStringUsesChartLabels) {
  EXPECT_EQ(to_string(coord(0), 1), "x1");
  EXPECT_EQ(to_string(coord(2), 2), "y1");
  EXPECT_EQ(to_string(coord(3), 2), "y2");
}
