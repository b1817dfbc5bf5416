#pragma once
// Canonical tensors J1, J2 and fields C1, C2 of T2M; homogeneity and
// semi-basic predicates; semi-sprays and sprays.

#include <Eigen/Dense>

#include <limits>
#include <random>
#include <string>
#include <vector>

#include "t2m/calculus.hpp"
#include "t2m/report.hpp"

namespace t2m {

/// J1(p, q, r) = (0, 0, p), blockwise per index.
inline VectorForm1 make_J1(const Chart& c) {
  VectorForm1 j(c);
  for (int i = 0; i < c.n(); ++i) j(c.index(Block::Z, i), c.index(Block::X, i)) = Expr(1.0);
  return j;
}

/// J2(p, q, r) = (0, p, 2q).
inline VectorForm1 make_J2(const Chart& c) {
  VectorForm1 j(c);
  for (int i = 0; i < c.n(); ++i) {
    j(c.index(Block::Y, i), c.index(Block::X, i)) = Expr(1.0);
    j(c.index(Block::Z, i), c.index(Block::Y, i)) = Expr(2.0);
  }
  return j;
}

/// C1 = (0, 0, y).
inline VectorField make_C1(const Chart& c) {
  VectorField v(c);
  for (int i = 0; i < c.n(); ++i) v[c.index(Block::Z, i)] = c.y(i);
  return v;
}

/// C2 = (0, y, 2z).
inline VectorField make_C2(const Chart& c) {
  VectorField v(c);
  for (int i = 0; i < c.n(); ++i) {
    v[c.index(Block::Y, i)] = c.y(i);
    v[c.index(Block::Z, i)] = Expr(2.0) * c.z(i);
  }
  return v;
}

struct CanonicalPack {
  Chart chart;
  VectorForm1 J1, J2;
  VectorField C1, C2;

  explicit CanonicalPack(const Chart& c)
      : chart(c), J1(make_J1(c)), J2(make_J2(c)), C1(make_C1(c)), C2(make_C2(c)) {}
};

inline CanonicalPack canonical_pack(int n) { return CanonicalPack(Chart(n)); }

// ---------------------------------------------------------------------------
// Predicates.

struct PredicateResult {
  bool holds = false;
  Residual residual;
  explicit operator bool() const noexcept { return holds; }
};

inline PredicateResult judge(const Residual& r, const Tolerance& tol) { return {tol.accepts(r), r}; }

/// h(r): d_{C2} w = r w.
inline PredicateResult is_homogeneous(const ScalarPForm& w, double r, std::span<const Point> points,
                                      const Tolerance& tol = {}) {
  const ScalarPForm lhs = derivation(make_C2(w.chart()), w);
  return judge(difference(lhs, Expr(r) * w, points), tol);
}

/// h(r) for vector l-forms: [C2, L] = (r - 1) L.
inline PredicateResult is_homogeneous(const VectorField& x, double r, std::span<const Point> points,
                                      const Tolerance& tol = {}) {
  const VectorField lhs = lie_bracket(make_C2(x.chart()), x);
  return judge(difference(lhs, Expr(r - 1.0) * x, points), tol);
}

inline PredicateResult is_homogeneous(const VectorForm1& k, double r, std::span<const Point> points,
                                      const Tolerance& tol = {}) {
  const VectorForm1 lhs = bracket(make_C2(k.chart()), k);
  return judge(difference(lhs, Expr(r - 1.0) * k, points), tol);
}

inline PredicateResult is_homogeneous(const VectorForm2& l, double r, std::span<const Point> points,
                                      const Tolerance& tol = {}) {
  const VectorForm2 lhs = bracket(make_C2(l.chart()), l);
  return judge(difference(lhs, Expr(r - 1.0) * l, points), tol);
}

inline PredicateResult is_homogeneous(const VectorLForm& f, double r, std::span<const Point> points,
                                      const Tolerance& tol = {}) {
  return std::visit([&](const auto& v) { return is_homogeneous(v, r, points, tol); }, f);
}

enum class Fibration { Pi1, Pi2 };

namespace detail {

/// J1 for pi1, J2 for pi2: the tensor whose images must be annihilated.
inline VectorForm1 semibasic_probe(const Chart& c, Fibration which) {
  return which == Fibration::Pi1 ? make_J1(c) : make_J2(c);
}

/// The tensor that must kill the values of a semi-basic vector form.
inline VectorForm1 semibasic_killer(const Chart& c, Fibration which) {
  return which == Fibration::Pi1 ? make_J2(c) : make_J1(c);
}

}  // namespace detail

/// Scalar forms: i_{J1 X} w = 0 (pi1) or i_{J2 X} w = 0 (pi2) for all X.
inline PredicateResult is_semibasic(const ScalarPForm& w, Fibration which, std::span<const Point> points,
                                    const Tolerance& tol = {}) {
  Residual r;
  r.points = static_cast<int>(points.size());
  if (w.degree() == 0) return judge(r, tol);
  const VectorForm1 probe = detail::semibasic_probe(w.chart(), which);
  for (int k = 0; k < w.dim(); ++k) {
    const VectorField v = probe.column(k);
    if (v.is_zero()) continue;
    r.merge(max_abs(interior(v, w), points));
  }
  return judge(r, tol);
}

/// Vector 1-forms: J2 L = 0 and L J1 = 0 (pi1), or J1 L = 0 and L J2 = 0 (pi2).
inline PredicateResult is_semibasic(const VectorForm1& l, Fibration which, std::span<const Point> points,
                                    const Tolerance& tol = {}) {
  Residual r = max_abs(detail::semibasic_killer(l.chart(), which) * l, points);
  r.merge(max_abs(l * detail::semibasic_probe(l.chart(), which), points));
  return judge(r, tol);
}

/// Vector 2-forms: J2 L = 0 and L(J1 X, Y) = 0 (pi1), or with J1 and J2 swapped (pi2).
inline PredicateResult is_semibasic(const VectorForm2& l, Fibration which, std::span<const Point> points,
                                    const Tolerance& tol = {}) {
  Residual r = max_abs(compose(detail::semibasic_killer(l.chart(), which), l), points);
  const VectorForm1 probe = detail::semibasic_probe(l.chart(), which);
  for (int k = 0; k < l.dim(); ++k) {
    const VectorField v = probe.column(k);
    if (v.is_zero()) continue;
    r.merge(max_abs(insert(l, v), points));
  }
  return judge(r, tol);
}

inline PredicateResult is_semibasic(const VectorLForm& f, Fibration which, std::span<const Point> points,
                                    const Tolerance& tol = {}) {
  if (const auto* x = std::get_if<VectorField>(&f)) {
    // A vector 0-form only has the value condition.
    return judge(max_abs(detail::semibasic_killer(x->chart(), which)(*x), points), tol);
  }
  if (const auto* k = std::get_if<VectorForm1>(&f)) return is_semibasic(*k, which, points, tol);
  return is_semibasic(std::get<VectorForm2>(f), which, points, tol);
}

// ---------------------------------------------------------------------------
// Semi-sprays.

struct SemiSpray {
  VectorField field;
  int type = 2;
};

/// Builds a semi-spray from the components not forced by J_type S = C_type:
/// type 1 takes the (y, z) blocks (2n expressions) and sets S_x = y;
/// type 2 takes the z block (n expressions) and sets S_x = y, S_y = z.
inline SemiSpray make_semispray(const Chart& c, int type, const std::vector<Expr>& completion) {
  if (type != 1 && type != 2) throw ConstraintError("semi-spray type must be 1 or 2");
  const std::size_t want = static_cast<std::size_t>(type == 1 ? 2 * c.n() : c.n());
  if (completion.size() != want)
    throw ConstraintError("type-" + std::to_string(type) + " completion needs " + std::to_string(want) +
                          " components, got " + std::to_string(completion.size()));
  VectorField s(c);
  for (int i = 0; i < c.n(); ++i) s[c.index(Block::X, i)] = c.y(i);
  if (type == 2)
    for (int i = 0; i < c.n(); ++i) s[c.index(Block::Y, i)] = c.z(i);
  const int first = type == 1 ? c.index(Block::Y, 0) : c.index(Block::Z, 0);
  for (std::size_t k = 0; k < want; ++k) {
    require_in_chart(completion[k], c, "semi-spray completion");
    s[first + static_cast<int>(k)] = completion[k];
  }
  return {s, type};
}

/// Wraps a full vector field; the forced blocks must coincide with the
/// constraint symbolically, otherwise ConstraintError.
inline SemiSpray make_semispray(int type, const VectorField& s) {
  if (type != 1 && type != 2) throw ConstraintError("semi-spray type must be 1 or 2");
  const Chart& c = s.chart();
  for (int i = 0; i < c.n(); ++i) {
    if (!(s[c.index(Block::X, i)] - c.y(i)).is_zero())
      throw ConstraintError("semi-spray: x-block component " + std::to_string(i + 1) + " must equal y" +
                            std::to_string(i + 1));
    if (type == 2 && !(s[c.index(Block::Y, i)] - c.z(i)).is_zero())
      throw ConstraintError("type-2 semi-spray: y-block component " + std::to_string(i + 1) +
                            " must equal z" + std::to_string(i + 1));
  }
  return {s, type};
}

/// [C2, S] = S.
inline PredicateResult is_spray(const SemiSpray& s, std::span<const Point> points, const Tolerance& tol = {}) {
  return is_homogeneous(s.field, 2.0, points, tol);
}

/// J_type S - C_type.
inline Residual semispray_residual(const SemiSpray& s, std::span<const Point> points) {
  const Chart& c = s.field.chart();
  const VectorField lhs = s.type == 1 ? make_J1(c)(s.field) : make_J2(c)(s.field);
  return difference(lhs, s.type == 1 ? make_C1(c) : make_C2(c), points);
}

// ---------------------------------------------------------------------------
// Random polynomial completions, used by the identity suite and tests.

/// A random polynomial of total degree <= `degree` in the chart
/// coordinates, with at most `terms` monomials.
inline Expr random_polynomial(const Chart& c, std::mt19937_64& rng, int degree = 2, int terms = 4) {
  std::uniform_int_distribution<int> coord_pick(0, c.dim() - 1), deg_pick(0, degree);
  std::uniform_int_distribution<int> coef_pick(-3, 3);
  std::vector<Expr> out;
  for (int t = 0; t < terms; ++t) {
    int coef = coef_pick(rng);
    if (coef == 0) coef = 1;
    std::vector<Expr> factors{Expr(static_cast<double>(coef))};
    const int d = deg_pick(rng);
    for (int k = 0; k < d; ++k) factors.push_back(coord(coord_pick(rng)));
    out.push_back(product(std::move(factors)));
  }
  return sum(std::move(out));
}

/// A random type-2 semi-spray with polynomial z block.
inline SemiSpray random_semispray(const Chart& c, int type, std::mt19937_64& rng) {
  std::vector<Expr> comp;
  const int count = type == 1 ? 2 * c.n() : c.n();
  for (int k = 0; k < count; ++k) comp.push_back(random_polynomial(c, rng));
  return make_semispray(c, type, comp);
}

// ---------------------------------------------------------------------------
// Identity suite.

namespace detail {

inline int matrix_rank_exact(const Eigen::MatrixXd& m) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(0.0);
  return static_cast<int>(lu.rank());
}

inline Residual exact_residual(const VectorForm1& a, const VectorForm1& b, int points) {
  Residual r;
  r.points = points;
  const VectorForm1 d = a - b;
  for (const auto& e : d.coefficients()) {
    if (e.is_zero()) continue;
    if (e.is_constant()) {
      r.max_abs = std::max(r.max_abs, std::abs(e.value()));
    } else {
      r.max_abs = std::numeric_limits<double>::infinity();
    }
  }
  return r;
}

inline Residual exact_residual(const VectorField& a, const VectorField& b, int points) {
  Residual r;
  r.points = points;
  const VectorField d = a - b;
  for (const auto& e : d.coefficients()) {
    if (e.is_zero()) continue;
    r.max_abs = e.is_constant() ? std::max(r.max_abs, std::abs(e.value()))
                                : std::numeric_limits<double>::infinity();
  }
  return r;
}

inline Residual exact_residual(const VectorForm2& a, int points) {
  Residual r;
  r.points = points;
  for (const auto& e : a.coefficients()) {
    if (e.is_zero()) continue;
    r.max_abs = e.is_constant() ? std::max(r.max_abs, std::abs(e.value()))
                                : std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace detail

/// Checks the canonical identities at dimension n. The constant-coefficient
/// identities must hold with exactly zero residual (symbolic cancellation);
/// the semi-spray identities are checked at sample points for `sprays`
/// random polynomial semi-sprays of each type.
inline VerificationReport verify_identity_suite(int n, const SamplingSpec& sampling, const Tolerance& tol = {},
                                                int sprays = 5) {
  const CanonicalPack pk = canonical_pack(n);
  const Chart& c = pk.chart;
  const std::vector<Point> pts = sample_points(c, sampling);
  const int np = static_cast<int>(pts.size());
  const Tolerance exact{0.0, false};
  const VectorForm1 zero(c);
  const std::string tag = "n" + std::to_string(n) + ".";
  VerificationReport rep;

  // Ranks and kernels.
  const Eigen::MatrixXd j1 = pk.J1.evaluate(pts.front()), j2 = pk.J2.evaluate(pts.front());
  const int r1 = detail::matrix_rank_exact(j1), r2 = detail::matrix_rank_exact(j2);
  rep.add_flag(tag + "rank.J1", "rank J1=n", r1 == n, np, "rank " + std::to_string(r1));
  rep.add_flag(tag + "rank.J2", "rank J2=2n", r2 == 2 * n, np, "rank " + std::to_string(r2));
  // Im J2 lies in Ker J1 and both have dimension 2n; likewise Im J1 = Ker J2.
  {
    Residual r = detail::exact_residual(pk.J1 * pk.J2, zero, np);
    const bool dims = (3 * n - r1) == r2;
    rep.add(CheckRecord{tag + "kernel.J1", "Ker J1=Im J2", np, r.max_abs, exact.accepts(r) && dims, ""});
    Residual s = detail::exact_residual(pk.J2 * pk.J1, zero, np);
    const bool dims2 = (3 * n - r2) == r1;
    rep.add(CheckRecord{tag + "kernel.J2", "Ker J2=Im J1", np, s.max_abs, exact.accepts(s) && dims2, ""});
  }
  rep.add(tag + "alg.J1J1", "J1^2=0", detail::exact_residual(pk.J1 * pk.J1, zero, np), exact);
  rep.add(tag + "alg.J2J2", "J2^2=2J1", detail::exact_residual(pk.J2 * pk.J2, Expr(2.0) * pk.J1, np), exact);
  rep.add(tag + "alg.J1J2", "J1J2=0", detail::exact_residual(pk.J1 * pk.J2, zero, np), exact);
  rep.add(tag + "alg.J2J1", "J2J1=0", detail::exact_residual(pk.J2 * pk.J1, zero, np), exact);
  rep.add(tag + "alg.J1cubed", "J1^3=0", detail::exact_residual(pk.J1 * pk.J1 * pk.J1, zero, np), exact);
  rep.add(tag + "fn.J1J1", "[J1,J1]=0", detail::exact_residual(bracket(pk.J1, pk.J1), np), exact);
  rep.add(tag + "fn.J2J2", "[J2,J2]=0", detail::exact_residual(bracket(pk.J2, pk.J2), np), exact);
  rep.add(tag + "fn.J1J2", "[J1,J2]=0", detail::exact_residual(bracket(pk.J1, pk.J2), np), exact);

  const VectorField zf(c);
  rep.add(tag + "fields.J1C1", "J1C1=0", detail::exact_residual(pk.J1(pk.C1), zf, np), exact);
  rep.add(tag + "fields.J2C1", "J2C1=0", detail::exact_residual(pk.J2(pk.C1), zf, np), exact);
  rep.add(tag + "fields.J1C2", "J1C2=0", detail::exact_residual(pk.J1(pk.C2), zf, np), exact);
  rep.add(tag + "fields.J2C2", "J2C2=2C1", detail::exact_residual(pk.J2(pk.C2), Expr(2.0) * pk.C1, np), exact);
  rep.add(tag + "fields.C1C2", "[C1,C2]=C1", detail::exact_residual(lie_bracket(pk.C1, pk.C2), pk.C1, np), exact);

  rep.add(tag + "lie.C1J1", "[C1,J1]=0", detail::exact_residual(bracket(pk.C1, pk.J1), zero, np), exact);
  rep.add(tag + "lie.C1J2", "[C1,J2]=-J1", detail::exact_residual(bracket(pk.C1, pk.J2), -pk.J1, np), exact);
  rep.add(tag + "lie.C2J1", "[C2,J1]=-2J1",
          detail::exact_residual(bracket(pk.C2, pk.J1), Expr(-2.0) * pk.J1, np), exact);
  rep.add(tag + "lie.C2J2", "[C2,J2]=-J2", detail::exact_residual(bracket(pk.C2, pk.J2), -pk.J2, np), exact);

  // Semi-spray identities.
  std::mt19937_64 rng(sampling.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(n)));
  Residual t1a, t1b, t2a, t2b, t2c, t2d, t2e, t2f;
  for (int s = 0; s < sprays; ++s) {
    const SemiSpray s1 = random_semispray(c, 1, rng);
    const VectorForm1 j1s1 = bracket(pk.J1, s1.field), j2s1 = bracket(pk.J2, s1.field);
    t1a.merge(max_abs(pk.J1 * j1s1, pts));
    t1b.merge(difference(pk.J1 * j2s1, pk.J1, pts));

    const SemiSpray s2 = random_semispray(c, 2, rng);
    const VectorForm1 j1s = bracket(pk.J1, s2.field), j2s = bracket(pk.J2, s2.field);
    t2a.merge(max_abs(pk.J1 * j1s, pts));
    t2b.merge(difference(pk.J1 * j2s, pk.J1, pts));
    t2c.merge(difference(pk.J2 * j1s, Expr(2.0) * pk.J1, pts));
    t2d.merge(difference(pk.J2 * j2s, pk.J2, pts));
    t2e.merge(difference(j2s * pk.J1, Expr(-2.0) * pk.J1, pts));
    t2f.merge(difference(j2s * pk.J2, Expr(2.0) * j1s - pk.J2, pts));
  }
  const std::string sn = " (" + std::to_string(sprays) + " semi-sprays)";
  rep.add(tag + "type1.J1J1S", "J1[J1,S]=0 (type 1)", t1a, tol, sn);
  rep.add(tag + "type1.J1J2S", "J1[J2,S]=J1 (type 1)", t1b, tol, sn);
  rep.add(tag + "type2.J1J1S", "J1[J1,S]=0", t2a, tol, sn);
  rep.add(tag + "type2.J1J2S", "J1[J2,S]=J1", t2b, tol, sn);
  rep.add(tag + "type2.J2J1S", "J2[J1,S]=2J1", t2c, tol, sn);
  rep.add(tag + "type2.J2J2S", "J2[J2,S]=J2", t2d, tol, sn);
  rep.add(tag + "type2.J2SJ1", "[J2,S]J1=-2J1", t2e, tol, sn);
  rep.add(tag + "type2.J2SJ2", "[J2,S]J2=2[J1,S]-J2", t2f, tol, sn);
  return rep;
}

}  // namespace t2m
