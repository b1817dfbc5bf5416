#include <gtest/gtest.h>

#include <random>

#include "fd_oracle.hpp"
#include "t2m/linear_connections.hpp"

using namespace t2m;

namespace {

class LinearTest : public ::testing::Test {
 protected:
  const Chart c1{1};
  const Chart c2{2};
  const Context ctx = Context::make(c1, {.points = 10, .seed = 13});
  const Context ctx2 = Context::make(c2, {.points = 10, .seed = 14});
};

VectorField random_field(const Chart& c, std::mt19937_64& rng) {
  VectorField x(c);
  for (int k = 0; k < c.dim(); ++k) x[k] = random_polynomial(c, rng, 2, 3);
  return x;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace

TEST_F(LinearTest, CovariantDerivativeExamples) {
  const VectorField x(c1, {coord(0) * coord(1), coord(2), coord(0) + coord(1)});
  const LinearConnection flat = flat_connection(c1);
  const VectorField a = covariant_derivative(flat, x, make_C1(c1));
  EXPECT_TRUE(a[0].is_zero());
  EXPECT_TRUE(a[1].is_zero());
  EXPECT_TRUE((a[2] - x[1]).is_zero());
  EXPECT_TRUE(covariant_derivative(flat, x, VectorField(c1)).is_zero());

  const LinearConnection d = sample_connection(c1);
  const VectorField b = covariant_derivative(d, x, make_C1(c1));
  EXPECT_LT(difference(b, VectorField(c1, {Expr(), Expr(), x[1] + x[2]}), ctx.points).max_abs, 1e-12);
  EXPECT_TRUE(covariant_derivative(d, x, VectorField(c1)).is_zero());
}

TEST_F(LinearTest, LeibnizAndFunctionLinearity) {
  std::mt19937_64 rng(31);
  for (const auto& d : {sample_connection(c2), family_connection(c2, 1.5, -0.5)}) {
    for (int t = 0; t < 10; ++t) {
      const VectorField x = random_field(c2, rng), y = random_field(c2, rng);
      const Expr f = random_polynomial(c2, rng, 2, 3);
      const VectorField lhs = covariant_derivative(d, x, f * y);
      const VectorField rhs = x.apply(f) * y + f * covariant_derivative(d, x, y);
      EXPECT_LT(difference(lhs, rhs, ctx2.points).max_abs, 1e-9);
      EXPECT_LT(difference(covariant_derivative(d, f * x, y), f * covariant_derivative(d, x, y), ctx2.points).max_abs,
                1e-9);
      const VectorField x2 = random_field(c2, rng);
      EXPECT_LT(difference(covariant_derivative(d, x + x2, y),
                           covariant_derivative(d, x, y) + covariant_derivative(d, x2, y), ctx2.points)
                    .max_abs,
                1e-9);
    }
  }
}

TEST_F(LinearTest, CovariantDifferentialMatchesFiniteDifferences) {
  // (D Y)(e_i) = d_i Y + G(e_i, Y): directional part from the FD oracle.
  const LinearConnection d = sample_connection(c2);
  std::mt19937_64 rng(5);
  const VectorField y = random_field(c2, rng);
  const VectorForm1 dy = covariant_differential(d, y);
  for (int s = 0; s < 3; ++s) {
    const Point p = oracle::sample_point(2, rng);
    const Eigen::MatrixXd jac = oracle::jacobian(oracle::fn(y), p);
    Eigen::MatrixXd expect = jac;
    for (int i = 0; i < c2.dim(); ++i)
      expect.col(i) += d.coefficient_map(VectorField::basis(c2, i), y).evaluate(p);
    EXPECT_LT((dy.evaluate(p) - expect).lpNorm<Eigen::Infinity>(), 1e-6);
  }
}

TEST_F(LinearTest, ParallelChecks) {
  EXPECT_EQ(parallel_check(flat_connection(c1), make_J1(c1), ctx.points).max_abs, 0.0);
  EXPECT_EQ(parallel_check(flat_connection(c1), make_J2(c1), ctx.points).max_abs, 0.0);
  const LinearConnection d = sample_connection(c1);
  EXPECT_LT(parallel_check(d, make_J1(c1), ctx.points).max_abs, 1e-12);
  EXPECT_GT(parallel_check(d, make_J2(c1), ctx.points).max_abs, 0.1);
}

TEST_F(LinearTest, ParallelImplication) {
  // whenever D J2 = 0 holds, so does D J1 = 0
  std::vector<LinearConnection> all{flat_connection(c1), sample_connection(c1), family_connection(c1, 1, -1),
                                    symmetrized(sample_connection(c1)), flat_connection(c2),
                                    sample_connection(c2)};
  for (const auto& d : all) {
    const Context& cx = d.chart().n() == 1 ? ctx : ctx2;
    if (cx.tol.accepts(parallel_check(d, make_J2(d.chart()), cx.points))) {
      EXPECT_TRUE(cx.tol.accepts(parallel_check(d, make_J1(d.chart()), cx.points)));
    }
  }
}

TEST_F(LinearTest, FiberMaps) {
  const Point& p = ctx.points.front();
  const FiberMaps flat = fiber_maps(flat_connection(c1), p);
  EXPECT_EQ(flat.phi, mat({{0.0}}));
  EXPECT_EQ(flat.psi, mat({{1.0, 0.0}, {0.0, 2.0}}));
  const LinearConnection d = sample_connection(c1);
  EXPECT_LT((fiber_map(d, Regularity::J1, p) - mat({{1.0}})).norm(), 1e-12);
  // psi exists (D C2 stays vertical) even though D J2 != 0
  const double y = p(1), z = p(2);
  EXPECT_LT((fiber_map(d, Regularity::J2, p) - mat({{1.0, 0.0}, {0.0, 2.0 + 2.0 * z / y}})).norm(), 1e-12);
  // a coefficient feeding the x row makes D C1 leak out of the z block
  LinearConnection leaky(c1);
  leaky.set(0, 2, 2, Expr(1.0));
  EXPECT_THROW(fiber_map(leaky, Regularity::J1, p), PreconditionFailed);
  EXPECT_FALSE(is_regular(leaky, Regularity::J1, ctx).verdict);
}

TEST_F(LinearTest, Regularity) {
  EXPECT_FALSE(is_regular(flat_connection(c1), Regularity::J1, ctx).verdict);
  EXPECT_TRUE(is_regular(flat_connection(c1), Regularity::J2, ctx).verdict);
  EXPECT_TRUE(is_regular(flat_connection(c2), Regularity::J2, ctx2).verdict);
  const RegularityCertificate cert = is_regular(sample_connection(c1), Regularity::J1, ctx);
  EXPECT_TRUE(cert.verdict);
  EXPECT_NEAR(cert.min_abs_det, 1.0, 1e-12);
  EXPECT_NEAR(cert.max_condition, 1.0, 1e-12);
  EXPECT_FALSE(is_regular(sample_connection(c1), Regularity::J2, ctx).verdict);
}

TEST_F(LinearTest, InducedConnections) {
  const Connection g2 = induced_connection(sample_connection(c1), Regularity::J1, ctx);
  EXPECT_EQ(g2.type, 2);
  EXPECT_LT((g2.gamma.evaluate(ctx.points[3]) - mat({{1, 0, 0}, {0, 1, 0}, {0, -2, -1}})).norm(), 1e-12);
  EXPECT_TRUE(validate_connection(g2.gamma, 2, ctx).all_pass());

  const Connection g1 = induced_connection(flat_connection(c1), Regularity::J2, ctx);
  EXPECT_EQ(g1.type, 1);
  EXPECT_TRUE(validate_connection(g1.gamma, 1, ctx).all_pass());
  EXPECT_THROW(induced_connection(flat_connection(c1), Regularity::J1, ctx), NotRegular);

  const Connection g2b = induced_connection(sample_connection(c2), Regularity::J1, ctx2);
  EXPECT_TRUE(validate_connection(g2b.gamma, 2, ctx2).all_pass());
}

TEST_F(LinearTest, InducedConnectionThroughSolveNodes) {
  // A non-diagonal phi forces the general solve path; compare with a dense inverse.
  LinearConnection d(c2, "y nonzero");
  for (int i = 0; i < 2; ++i) {
    const int x = c2.index(Block::X, i), z = c2.index(Block::Z, i);
    for (int j = 0; j < 2; ++j) {
      const int zj = c2.index(Block::Z, j);
      const double w = i == j ? 2.0 : 0.5;
      d.set(x, zj, x, Expr(w) * recip(c2.y(i)));
      d.set(z, zj, z, Expr(w) * recip(c2.y(i)));
    }
  }
  const RegularityCertificate cert = is_regular(d, Regularity::J1, ctx2);
  ASSERT_TRUE(cert.verdict) << cert.note;
  const Connection g = induced_connection(d, Regularity::J1, ctx2);
  for (const auto& p : ctx2.points) {
    const Eigen::MatrixXd phi = fiber_map(d, Regularity::J1, p);
    const Eigen::MatrixXd dc = liouville_differential(d, Regularity::J1).evaluate(p);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(6, 6);
    expect.bottomRows(2) -= 2.0 * phi.inverse() * dc.bottomRows(2);
    EXPECT_LT((g.gamma.evaluate(p) - expect).norm(), 1e-10);
  }
}

TEST_F(LinearTest, HomogeneityCriterion) {
  const HomogeneityCriterion s = homogeneity_criterion(sample_connection(c1), Regularity::J1, ctx);
  EXPECT_FALSE(s.criterion.holds);
  EXPECT_FALSE(s.homogeneous.holds);
  // [C2, D C1](X) = (0, 0, -X_y)
  const VectorForm1 b = bracket(make_C2(c1), liouville_differential(sample_connection(c1), Regularity::J1));
  EXPECT_LT((b.evaluate(ctx.points[0]) - mat({{0, 0, 0}, {0, 0, 0}, {0, -1, 0}})).norm(), 1e-12);

  const HomogeneityCriterion f = homogeneity_criterion(flat_connection(c1), Regularity::J2, ctx);
  EXPECT_TRUE(f.agree());
  EXPECT_TRUE(f.criterion.holds);
  EXPECT_THROW(homogeneity_criterion(flat_connection(c1), Regularity::J1, ctx), NotRegular);
  for (double a : {0.5, 1.0, -2.0})
    for (double b : {-1.0, 0.0, 1.0})
      EXPECT_TRUE(homogeneity_criterion(family_connection(c2, a, b), Regularity::J1, ctx2).agree());
}

TEST_F(LinearTest, NoTorsionFreeJ1Regular) {
  const ObstructionResult flat = prop3_obstruction(flat_connection(c1), ctx);
  EXPECT_EQ(flat.phi_on_vertical.max_abs, 0.0);
  EXPECT_FALSE(flat.regularity.verdict);
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd j1 = make_J1(c1).evaluate(ctx.points[0]);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd x = Eigen::VectorXd::Random(3);
    const Eigen::VectorXd img = liouville_differential(flat_connection(c1), Regularity::J1).evaluate(ctx.points[0]) * j1 * x;
    EXPECT_EQ(img.norm(), 0.0);
  }
  // symmetrizing the sample connection loses D J1 = 0
  EXPECT_THROW(prop3_obstruction(symmetrized(sample_connection(c1)), ctx), PreconditionFailed);
  // and the sample connection itself has torsion
  EXPECT_GT(max_abs(torsion(sample_connection(c1)), ctx.points).max_abs, 0.1);
  EXPECT_THROW(prop3_obstruction(sample_connection(c1), ctx), PreconditionFailed);
}

TEST_F(LinearTest, TorsionFreeParallelSamplesAreJ2Regular) {
  for (const auto& d : {flat_connection(c1), flat_connection(c2)}) {
    const Context& cx = d.chart().n() == 1 ? ctx : ctx2;
    ASSERT_TRUE(cx.tol.accepts(max_abs(torsion(d), cx.points)));
    ASSERT_TRUE(cx.tol.accepts(parallel_check(d, make_J2(d.chart()), cx.points)));
    EXPECT_TRUE(is_regular(d, Regularity::J2, cx).verdict);
  }
}

TEST_F(LinearTest, FamilySearchFindsEligibleMember) {
  const FamilySearch fs = search_homogeneous_family(c1, ctx);
  ASSERT_TRUE(fs.found);
  EXPECT_EQ(fs.b, -1.0);
  EXPECT_NE(fs.a, 0.0);
  EXPECT_EQ(fs.tried, 81);
}

TEST_F(LinearTest, StrongTorsionRelation) {
  for (const Context* cx : {&ctx, &ctx2}) {
    const Chart& c = cx->points.front().size() == 3 ? c1 : c2;
    const StrongTorsionRelation r = prop4_relation(family_connection(c, 1.0, -1.0), *cx);
    EXPECT_LT(r.relation.max_abs, 1e-9);
    EXPECT_LT(r.spray_fixed.max_abs, 1e-9);
    EXPECT_TRUE(r.torsion_free);
    ASSERT_TRUE(r.closed_form.has_value());
    EXPECT_LT(r.closed_form->max_abs, 1e-9);
  }
  EXPECT_THROW(prop4_relation(sample_connection(c1), ctx), PreconditionFailed);
  EXPECT_THROW(prop4_relation(flat_connection(c1), ctx), PreconditionFailed);
}
