#include <gtest/gtest.h>

#include <random>

#include "fd_oracle.hpp"
#include "t2m/canonical.hpp"

using namespace t2m;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(rows.size(), rows.begin()->size());
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

VectorField field(const Chart& c, std::vector<Expr> comps) { return VectorField(c, std::move(comps)); }

VectorField random_field(const Chart& c, std::mt19937_64& rng) {
  VectorField x(c);
  for (int k = 0; k < c.dim(); ++k) x[k] = random_polynomial(c, rng, 2, 3);
  return x;
}

VectorForm1 random_form1(const Chart& c, std::mt19937_64& rng, int sparsity = 3) {
  VectorForm1 k(c);
  std::uniform_int_distribution<int> pick(0, sparsity);
  for (int r = 0; r < c.dim(); ++r)
    for (int s = 0; s < c.dim(); ++s)
      if (pick(rng) == 0) k(r, s) = random_polynomial(c, rng, 2, 2);
  return k;
}

ScalarPForm random_pform(const Chart& c, int p, std::mt19937_64& rng) {
  ScalarPForm w(c, p);
  for (std::size_t i = 0; i < w.size(); ++i) w.at(i) = random_polynomial(c, rng, 2, 2);
  return w;
}

constexpr double kFd = 1e-6;

}  // namespace

// ---------------------------------------------------------------------------
// Evaluation.

TEST(Evaluate, CanonicalFieldAtPoint) {
  const Chart c(1);
  Point p(3);
  p << 1, 2, 3;
  const Eigen::VectorXd v = make_C1(c).evaluate(p);
  EXPECT_EQ(v, Eigen::Vector3d(0, 0, 2));
  EXPECT_EQ(VectorField(c).evaluate(p), Eigen::Vector3d::Zero());
}

TEST(Evaluate, BasisDuality) {
  const Chart c(1);
  const ScalarPForm w = wedge(basis_form(c, 0), basis_form(c, 1));
  Point p(3);
  p << 0.3, -1.1, 0.4;
  std::vector<Eigen::VectorXd> args{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)};
  EXPECT_EQ(w.evaluate(p, args), 1.0);
  std::swap(args[0], args[1]);
  EXPECT_EQ(w.evaluate(p, args), -1.0);
}

TEST(Evaluate, DomainErrorFromReciprocal) {
  const Chart c(1);
  const VectorField x = field(c, {recip(c.y(0)), Expr(), Expr()});
  Point p = Point::Zero(3);
  EXPECT_THROW(x.evaluate(p), DomainError);
}

TEST(Evaluate, ThreeFormIsAlternatingMultilinear) {
  const Chart c(1);
  std::mt19937_64 rng(5);
  const ScalarPForm w = random_pform(c, 3, rng);
  const Point p = oracle::sample_point(1, rng);
  std::vector<Eigen::VectorXd> a{Eigen::VectorXd::Random(3), Eigen::VectorXd::Random(3), Eigen::VectorXd::Random(3)};
  const double v = w.evaluate(p, a);
  std::swap(a[0], a[2]);
  EXPECT_NEAR(w.evaluate(p, a), -v, 1e-12);
  a[1] = a[0];
  EXPECT_NEAR(w.evaluate(p, a), 0.0, 1e-12);
}

TEST(Tensors, ChartMismatchOnWrongSize) {
  const Chart c(1);
  EXPECT_THROW(VectorField(c, {Expr(), Expr()}), ChartMismatch);
  EXPECT_THROW(lie_bracket(VectorField(Chart(1)), VectorField(Chart(2))), ChartMismatch);
  EXPECT_THROW(VectorField(c, {coord(3), Expr(), Expr()}), ChartMismatch);
}

TEST(Tensors, VectorForm2IsAlternating) {
  const Chart c(1);
  VectorForm2 l(c);
  l.set(2, 0, field(c, {c.x(0), Expr(1.0), Expr()}));
  EXPECT_EQ(l.component(0, 2, 0), c.x(0));
  EXPECT_EQ(l.component(0, 0, 2), -c.x(0));
  EXPECT_TRUE(l.component(0, 1, 1).is_zero());
  EXPECT_THROW(l.set(1, 1, VectorField(c)), DegreeError);
}

// ---------------------------------------------------------------------------
// Lie bracket.

TEST(LieBracket, CanonicalFields) {
  const CanonicalPack pk = canonical_pack(1);
  const VectorField b = lie_bracket(pk.C1, pk.C2);
  EXPECT_TRUE(exactly_zero(b - pk.C1));
}

TEST(LieBracket, SelfBracketVanishes) {
  const Chart c(2);
  std::mt19937_64 rng(1);
  const VectorField x = random_field(c, rng);
  EXPECT_TRUE(exactly_zero(lie_bracket(x, x)));
}

TEST(LieBracket, LiouvilleOfStandardSpray) {
  const Chart c(1);
  const VectorField s0 = field(c, {c.y(0), c.z(0), Expr()});
  EXPECT_TRUE(exactly_zero(lie_bracket(make_C2(c), s0) - s0));
}

TEST(LieBracket, MatchesFiniteDifferences) {
  const Chart c(2);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; ++t) {
    const VectorField x = random_field(c, rng), y = random_field(c, rng);
    const Point p = oracle::sample_point(2, rng);
    const Eigen::VectorXd want = oracle::lie_bracket(oracle::fn(x), oracle::fn(y), p);
    EXPECT_LT((lie_bracket(x, y).evaluate(p) - want).lpNorm<Eigen::Infinity>(), kFd * (1 + want.norm()));
  }
}

TEST(LieBracket, BilinearAntisymmetricJacobi) {
  const Chart c(1);
  std::mt19937_64 rng(3);
  const auto pts = sample_points(c, {.points = 5, .seed = 3});
  for (int t = 0; t < 20; ++t) {
    const VectorField x = random_field(c, rng), y = random_field(c, rng), z = random_field(c, rng);
    const Expr f = random_polynomial(c, rng, 1, 2);
    const VectorField jac = lie_bracket(x, lie_bracket(y, z)) + lie_bracket(y, lie_bracket(z, x)) +
                            lie_bracket(z, lie_bracket(x, y));
    EXPECT_LT(max_abs(jac, pts).max_abs, 1e-9);
    EXPECT_LT(max_abs(lie_bracket(x, y) + lie_bracket(y, x), pts).max_abs, 1e-9);
    EXPECT_LT(max_abs(lie_bracket(x + y, z) - lie_bracket(x, z) - lie_bracket(y, z), pts).max_abs, 1e-9);
    // [X, fY] = (Xf) Y + f [X, Y].
    EXPECT_LT(max_abs(lie_bracket(x, f * y) - x.apply(f) * y - f * lie_bracket(x, y), pts).max_abs, 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Bracket of a field with a vector 1-form.

TEST(FieldFormBracket, CanonicalRelations) {
  const CanonicalPack pk = canonical_pack(1);
  EXPECT_TRUE(exactly_zero(bracket(pk.C2, pk.J1) + Expr(2.0) * pk.J1));
  EXPECT_TRUE(exactly_zero(bracket(pk.C1, pk.J2) + pk.J1));
}

TEST(FieldFormBracket, StandardSprayMatrices) {
  // Hand expansion with S0 = (y, z, 0): [J2, S0] = diag(1, 1, -2),
  // [J1, S0] = [[0,0,0],[1,0,0],[0,-1,0]], [[J1, S0], S0] = diag(1, -2, 1).
  const CanonicalPack pk = canonical_pack(1);
  const Chart& c = pk.chart;
  const VectorField s0 = field(c, {c.y(0), c.z(0), Expr()});
  const VectorForm1 j2s = bracket(pk.J2, s0), j1s = bracket(pk.J1, s0);
  Point p(3);
  p << 0.2, 1.3, -0.7;
  EXPECT_EQ(j2s.evaluate(p), mat({{1, 0, 0}, {0, 1, 0}, {0, 0, -2}}));
  EXPECT_EQ(j1s.evaluate(p), mat({{0, 0, 0}, {1, 0, 0}, {0, -1, 0}}));
  EXPECT_EQ(bracket(j1s, s0).evaluate(p), mat({{1, 0, 0}, {0, -2, 0}, {0, 0, 1}}));
}

TEST(FieldFormBracket, DefiningPropertyAndFiniteDifferences) {
  const Chart c(1);
  std::mt19937_64 rng(4);
  const auto pts = sample_points(c, {.points = 4, .seed = 4});
  for (int t = 0; t < 6; ++t) {
    const VectorField x = random_field(c, rng), y = random_field(c, rng);
    const VectorForm1 k = random_form1(c, rng, 1);
    const VectorForm1 b = bracket(x, k);
    // [X, K](Y) = [X, KY] - K[X, Y].
    EXPECT_LT(max_abs(b(y) - (lie_bracket(x, k(y)) - k(lie_bracket(x, y))), pts).max_abs, 1e-9);
    EXPECT_LT(max_abs(bracket(k, x) + b, pts).max_abs, 1e-15);
    const Point p = oracle::sample_point(1, rng);
    const Eigen::MatrixXd want = oracle::bracket(oracle::fn(x), oracle::fn(k), p);
    EXPECT_LT((b.evaluate(p) - want).lpNorm<Eigen::Infinity>(), kFd * (1 + want.norm()));
  }
}

TEST(FieldFormBracket, LieDerivativeOfVectorTwoForm) {
  const Chart c(1);
  std::mt19937_64 rng(12);
  const auto pts = sample_points(c, {.points = 4, .seed = 12});
  const VectorForm1 k = random_form1(c, rng, 1), l = random_form1(c, rng, 1);
  const VectorForm2 t = bracket(k, l);
  const VectorField x = random_field(c, rng), y = random_field(c, rng), z = random_field(c, rng);
  auto apply2 = [](const VectorForm2& f, const VectorField& a, const VectorField& b) {
    return insert(f, a)(b);
  };
  const VectorField lhs = apply2(bracket(x, t), y, z);
  const VectorField rhs = lie_bracket(x, apply2(t, y, z)) - apply2(t, lie_bracket(x, y), z) -
                          apply2(t, y, lie_bracket(x, z));
  EXPECT_LT(max_abs(lhs - rhs, pts).max_abs, 1e-8);
}

// ---------------------------------------------------------------------------
// Frolicher-Nijenhuis bracket of vector 1-forms.

TEST(FnBracket, CanonicalTensorsCommute) {
  const CanonicalPack pk = canonical_pack(1);
  EXPECT_TRUE(exactly_zero(bracket(pk.J1, pk.J1)));
  EXPECT_TRUE(exactly_zero(bracket(pk.J1, pk.J2)));
  EXPECT_TRUE(exactly_zero(bracket(pk.J2, pk.J2)));
}

TEST(FnBracket, ConstantFormSelfBracketVanishes) {
  const Chart c(1);
  const VectorForm1 k = VectorForm1::constant(c, mat({{1, 0, 0}, {0, 1, 0}, {0, 0, -2}}));
  EXPECT_TRUE(exactly_zero(bracket(k, k)));
}

TEST(FnBracket, EightTermFormulaOnRandomFields) {
  const Chart c(1);
  std::mt19937_64 rng(6);
  const auto pts = sample_points(c, {.points = 4, .seed = 6});
  for (int t = 0; t < 4; ++t) {
    const VectorForm1 k = random_form1(c, rng, 1), l = random_form1(c, rng, 1);
    const VectorField x = random_field(c, rng), y = random_field(c, rng);
    const VectorField xy = lie_bracket(x, y);
    const VectorField want = lie_bracket(k(x), l(y)) + lie_bracket(l(x), k(y)) + k(l(xy)) + l(k(xy)) -
                             k(lie_bracket(l(x), y)) - k(lie_bracket(x, l(y))) - l(lie_bracket(k(x), y)) -
                             l(lie_bracket(x, k(y)));
    const VectorField got = insert(bracket(k, l), x)(y);
    EXPECT_LT(max_abs(got - want, pts).max_abs, 1e-8);
  }
}

TEST(FnBracket, SymmetricAndMatchesFiniteDifferences) {
  const Chart c(1);
  std::mt19937_64 rng(7);
  const auto pts = sample_points(c, {.points = 4, .seed = 7});
  for (int t = 0; t < 4; ++t) {
    const VectorForm1 k = random_form1(c, rng, 1), l = random_form1(c, rng, 1);
    const VectorForm2 kl = bracket(k, l), lk = bracket(l, k);
    EXPECT_LT(max_abs(kl - lk, pts).max_abs, 1e-10);
    const Point p = oracle::sample_point(1, rng);
    Evaluator ev(p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Eigen::VectorXd got = kl.evaluate(ev, Eigen::Vector3d::Unit(i), Eigen::Vector3d::Unit(j));
        const Eigen::VectorXd want = oracle::fn_bracket(oracle::fn(k), oracle::fn(l), p, i, j);
        EXPECT_LT((got - want).lpNorm<Eigen::Infinity>(), kFd * (1 + want.norm()));
        if (i == j) {
          EXPECT_EQ(got.norm(), 0.0);
        }
      }
  }
}

// ---------------------------------------------------------------------------
// Scalar forms.

TEST(ExteriorDerivative, TautologicalForm) {
  const Chart c(2);
  const ScalarPForm w = ScalarPForm(c, 1) + Expr(1.0) * ScalarPForm(c, 1);
  ScalarPForm th(c, 1);
  th.set({c.index(Block::X, 0)}, c.y(0));
  th.set({c.index(Block::X, 1)}, c.y(1));
  const ScalarPForm dth = exterior_derivative(th);
  const ScalarPForm want = wedge(basis_form(c, c.index(Block::Y, 0)), basis_form(c, c.index(Block::X, 0))) +
                           wedge(basis_form(c, c.index(Block::Y, 1)), basis_form(c, c.index(Block::X, 1)));
  EXPECT_TRUE(exactly_zero(dth - want));
  EXPECT_TRUE(exactly_zero(exterior_derivative(w)));
}

TEST(ExteriorDerivative, ConstantsAndSquare) {
  const Chart c(1);
  EXPECT_TRUE(exactly_zero(exterior_derivative(ScalarPForm::function(c, Expr(4.0)))));
  const Expr f = c.x(0) * c.y(0) * c.z(0);
  EXPECT_TRUE(exactly_zero(exterior_derivative(exterior_derivative(ScalarPForm::function(c, f)))));
  std::mt19937_64 rng(8);
  const auto pts = sample_points(Chart(2), {.points = 3, .seed = 8});
  for (int p = 0; p <= 1; ++p) {
    const ScalarPForm w = random_pform(Chart(2), p, rng);
    EXPECT_LT(max_abs(exterior_derivative(exterior_derivative(w)), pts).max_abs, 1e-12);
  }
  EXPECT_THROW(exterior_derivative(ScalarPForm(c, 3)), DegreeError);
}

TEST(Interior, Examples) {
  const Chart c(1);
  const ScalarPForm w = wedge(basis_form(c, 1), basis_form(c, 0));  // dy ^ dx
  const ScalarPForm ic2 = interior(make_C2(c), w);
  EXPECT_TRUE(exactly_zero(ic2 - c.y(0) * basis_form(c, 0)));
  EXPECT_TRUE(exactly_zero(interior(VectorField(c), w)));
  // i_{J2}(dy ^ dx) pairs J2 e_x = e_y against dy, leaving dx ^ dx terms only.
  EXPECT_TRUE(exactly_zero(interior(make_J2(c), w)));
  EXPECT_THROW(interior(make_C2(c), ScalarPForm::function(c, Expr(1.0))), DegreeError);
  EXPECT_THROW(interior(make_J2(c), ScalarPForm::function(c, Expr(1.0))), DegreeError);
}

TEST(Interior, VectorFormInsertionIsDerivationOfSlots) {
  const Chart c(1);
  std::mt19937_64 rng(9);
  const ScalarPForm w = random_pform(c, 2, rng);
  const VectorForm1 k = random_form1(c, rng, 1);
  const Point p = oracle::sample_point(1, rng);
  Evaluator ev(p);
  const Eigen::MatrixXd km = k.evaluate(ev);
  const Eigen::VectorXd a = Eigen::VectorXd::Random(3), b = Eigen::VectorXd::Random(3);
  const std::vector<Eigen::VectorXd> ab{a, b}, kab{km * a, b}, akb{a, km * b};
  EXPECT_NEAR(interior(k, w).evaluate(ev, ab), w.evaluate(ev, kab) + w.evaluate(ev, akb), 1e-12);
}

TEST(Derivation, LiouvilleOnQuadraticEnergy) {
  const Chart c(2);
  const Expr e = Expr(0.5) * (c.y(0) * c.y(0) + c.y(1) * c.y(1));
  const ScalarPForm fe = ScalarPForm::function(c, e);
  EXPECT_TRUE(exactly_zero(derivation(make_C2(c), fe) - Expr(2.0) * fe));
  ScalarPForm want(c, 1);
  want.set({c.index(Block::X, 0)}, c.y(0));
  want.set({c.index(Block::X, 1)}, c.y(1));
  EXPECT_TRUE(exactly_zero(derivation(make_J2(c), fe) - want));
  std::mt19937_64 rng(10);
  const VectorField x = random_field(c, rng);
  EXPECT_TRUE(exactly_zero(derivation(x, ScalarPForm::function(c, Expr(3.0)))));
}

TEST(Derivation, CartanFormulaAndLeibniz) {
  const Chart c(1);
  std::mt19937_64 rng(11);
  const auto pts = sample_points(c, {.points = 4, .seed = 11});
  for (int p = 0; p <= 2; ++p) {
    const ScalarPForm w = random_pform(c, p, rng);
    const VectorField x = random_field(c, rng);
    const Expr f = random_polynomial(c, rng, 2, 2);
    ScalarPForm cartan = interior(x, exterior_derivative(w));
    if (p > 0) cartan = cartan + exterior_derivative(interior(x, w));
    EXPECT_LT(max_abs(derivation(x, w) - cartan, pts).max_abs, 1e-9) << "p=" << p;
    EXPECT_LT(max_abs(derivation(x, f * w) - x.apply(f) * w - f * derivation(x, w), pts).max_abs, 1e-9);
  }
}

// i_S d_{J2} + d_{J2} i_S = d_{C2} - i_{[S, J2]} for type-2 semi-sprays.
TEST(Derivation, CommutatorOfInsertionAndJ2Derivation) {
  for (int n : {1, 2}) {
    const Chart c(n);
    std::mt19937_64 rng(20 + n);
    const auto pts = sample_points(c, {.points = 5, .seed = 13});
    const VectorForm1 j2 = make_J2(c);
    for (int trial = 0; trial < 3; ++trial) {
      const SemiSpray s = random_semispray(c, 2, rng);
      const VectorForm1 sj2 = bracket(s.field, j2);
      for (int p = 0; p <= 2; ++p) {
        const ScalarPForm w = random_pform(c, p, rng);
        ScalarPForm lhs = interior(s.field, derivation(j2, w));
        ScalarPForm rhs = derivation(make_C2(c), w);
        if (p > 0) {
          lhs = lhs + derivation(j2, interior(s.field, w));
          rhs = rhs - interior(sj2, w);
        }
        EXPECT_LT(max_abs(lhs - rhs, pts).max_abs, 1e-9) << "n=" << n << " p=" << p;
      }
    }
  }
}

TEST(Insert, Examples) {
  const Chart c(1);
  const VectorField s(c, {c.y(0), Expr(), Expr()});
  EXPECT_TRUE(exactly_zero(insert(VectorForm2(c), s)));
  std::mt19937_64 rng(14);
  const VectorForm2 t = bracket(random_form1(c, rng, 1), random_form1(c, rng, 1));
  const auto pts = sample_points(c, {.points = 4, .seed = 14});
  EXPECT_LT(max_abs(insert(t, s)(s), pts).max_abs, 1e-12);
  const VectorForm1 g1 = VectorForm1::constant(c, mat({{1, 0, 0}, {0, -1, 0}, {0, 0, -1}}));
  EXPECT_TRUE(exactly_zero(insert(bracket(make_J1(c), g1), s)));
}
