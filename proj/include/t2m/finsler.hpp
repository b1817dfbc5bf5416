#pragma once
// Finslerian 2-forms: validation, metric, energy, canonical spray and the
// connections built from it.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "t2m/connections.hpp"

namespace t2m {

struct FinslerianForm {
  ScalarPForm omega;
  std::string domain;
};

namespace detail {

/// a(X) for a 1-form a.
inline Expr pair(const ScalarPForm& a, const VectorField& x) {
  std::vector<Expr> terms;
  for (int k = 0; k < x.dim(); ++k) {
    const Expr& c = a.at(static_cast<std::size_t>(k));
    if (!c.is_zero() && !x[k].is_zero()) terms.push_back(c * x[k]);
  }
  return sum(std::move(terms));
}

/// Omega(X, Y) for a 2-form.
inline Expr pair(const ScalarPForm& w, const VectorField& x, const VectorField& y) {
  return pair(interior(x, w), y);
}

inline int numeric_rank(const Eigen::MatrixXd& m) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  const double cut = 1e-9 * std::max(1.0, s.size() ? s(0) : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) r += s(i) > cut ? 1 : 0;
  return r;
}

inline void require_two_form(const ScalarPForm& w, const char* what) {
  if (w.degree() != 2) throw InvalidForm(std::string(what) + " needs a 2-form, got degree " + std::to_string(w.degree()));
}

}  // namespace detail

/// Rank 3n at every point, d_{C2} Omega = Omega, i_{J2} Omega = 0, and n even.
inline VerificationReport validate_finslerian(const ScalarPForm& omega, const Context& ctx,
                                              const std::string& prefix = "finsler") {
  detail::require_two_form(omega, "validate_finslerian");
  VerificationReport rep;
  const Chart& c = omega.chart();
  const int np = static_cast<int>(ctx.points.size());
  rep.add_flag(prefix + ".parity", "3n even", c.n() % 2 == 0, np,
               c.n() % 2 == 0 ? "" : "n = " + std::to_string(c.n()) + " is odd: no 2-form has odd rank 3n");
  int worst = c.dim();
  for (const auto& p : ctx.points) {
    Evaluator ev(p);
    worst = std::min(worst, detail::numeric_rank(omega.matrix(ev)));
  }
  rep.add_flag(prefix + ".rank", "rank Omega=3n", worst == c.dim(), np,
               "minimum rank " + std::to_string(worst) + " of " + std::to_string(c.dim()));
  rep.add(prefix + ".homogeneity", "d_C2 Omega=Omega",
          difference(derivation(make_C2(c), omega), omega, ctx.points), ctx.tol);
  rep.add(prefix + ".iJ2", "i_J2 Omega=0", max_abs(interior(make_J2(c), omega), ctx.points), ctx.tol);
  return rep;
}

inline FinslerianForm make_finslerian(const ScalarPForm& omega, const Context& ctx, std::string domain = {}) {
  const VerificationReport rep = validate_finslerian(omega, ctx);
  for (const auto& chk : rep.checks())
    if (!chk.pass) throw InvalidForm("not Finslerian: " + chk.anchor + " fails" + (chk.note.empty() ? "" : " (" + chk.note + ")"));
  return {omega, std::move(domain)};
}

/// g(J2 X, Y) := Omega(J2 X, Y) at a point.
inline double induced_metric(const FinslerianForm& f, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const Point& p) {
  const Eigen::MatrixXd j2 = make_J2(f.omega.chart()).evaluate(p);
  Evaluator ev(p);
  return (j2 * x).dot(f.omega.matrix(ev) * y);
}

/// Largest |g(J2X, J2Y) - g(J2Y, J2X)| = |Omega(J2X, Y) - Omega(J2Y, X)| over
/// random pairs at each point.
inline double metric_symmetry_residual(const FinslerianForm& f, std::span<const Point> points, int pairs,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int d = f.omega.dim();
  double worst = 0.0;
  for (const auto& p : points)
    for (int k = 0; k < pairs; ++k) {
      Eigen::VectorXd x(d), y(d);
      for (int i = 0; i < d; ++i) x(i) = u(rng);
      for (int i = 0; i < d; ++i) y(i) = u(rng);
      worst = std::max(worst, std::abs(induced_metric(f, x, y, p) - induced_metric(f, y, x, p)));
    }
  return worst;
}

/// E = Omega(C2, S) / 2.
inline Expr energy(const FinslerianForm& f, const SemiSpray& s, const Context& ctx) {
  require_same_chart(f.omega.chart(), s.field.chart(), "energy");
  if (s.type != 2) throw NotSpray("energy needs a type-2 spray");
  if (!is_spray(s, ctx.points, ctx.tol)) throw NotSpray("energy: [C2,S] != S");
  return Expr(0.5) * detail::pair(f.omega, make_C2(f.omega.chart()), s.field);
}

inline Expr energy(const FinslerianForm& f, const Context& ctx) {
  return energy(f, standard_semispray(f.omega.chart(), 2), ctx);
}

struct ExactnessResult {
  ScalarPForm primitive;    // d_{J2} i_S w / (r + p)
  Residual reconstruction;  // primitive - w
  Residual commutator;      // [i_S, d_{J2}] w - (r + p) w
  Residual bracket_contraction;  // i_{[S,J2]} w + p w
};

namespace detail {

inline ScalarPForm contract(const VectorField& s, const ScalarPForm& w) {
  return w.degree() == 0 ? ScalarPForm(w.chart(), 0) : interior(s, w);
}

}  // namespace detail

/// [i_S, d_{J2}] w = (r + p) w and i_{[S,J2]} w = -p w for a semi-basic h(r)
/// p-form, together with the primitive w = d_{J2} i_S w / (r + p) of a
/// d_{J2}-closed one.
inline ExactnessResult homogeneous_exactness(const ScalarPForm& w, int r, const SemiSpray& s, Fibration which,
                                             const Context& ctx, bool require_closed = true) {
  const Chart& c = w.chart();
  require_same_chart(c, s.field.chart(), "homogeneous_exactness");
  if (s.type != 2) throw PreconditionFailed("homogeneous_exactness needs a type-2 semi-spray");
  const int p = w.degree();
  if (r + p == 0) throw PreconditionFailed("degree r = -p is excluded");
  if (!is_semibasic(w, which, ctx.points, ctx.tol)) throw PreconditionFailed("form is not semi-basic");
  if (!is_homogeneous(w, r, ctx.points, ctx.tol))
    throw PreconditionFailed("form is not homogeneous of degree " + std::to_string(r));
  const VectorForm1 j2 = make_J2(c);
  const ScalarPForm dj2w = derivation(j2, w);
  if (require_closed && !ctx.tol.accepts(max_abs(dj2w, ctx.points)))
    throw PreconditionFailed("form is not d_J2-closed");

  const ScalarPForm is_w = detail::contract(s.field, w);
  const ScalarPForm rp = Expr(static_cast<double>(r + p)) * w;
  ExactnessResult out{Expr(1.0 / (r + p)) * derivation(j2, is_w), {}, {}, {}};
  const ScalarPForm comm = detail::contract(s.field, dj2w) + derivation(j2, is_w);
  out.commutator = difference(comm, rp, ctx.points);
  out.bracket_contraction =
      p == 0 ? Residual{0.0, 0.0, static_cast<int>(ctx.points.size())}
             : difference(interior(bracket(s.field, j2), w), Expr(static_cast<double>(-p)) * w, ctx.points);
  out.reconstruction = difference(out.primitive, w, ctx.points);
  return out;
}

struct CanonicalSpray {
  SemiSpray spray;
  Expr energy;
  Residual linear_system;  // Omega G - dE with the forced blocks substituted
  Residual forced_blocks;  // solved x, y blocks against y, z
  Residual homogeneity;    // [C2, G] - G
  Residual closedness;     // d_J2 i_C2 Omega
  Residual c2_identity;    // i_C2 Omega - d_J2 E
};

namespace detail {

inline std::vector<Expr> matrix_entries(const ScalarPForm& w) {
  const int d = w.dim();
  std::vector<Expr> m;
  m.reserve(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m.push_back(i == j ? Expr() : w.coeff({i, j}));
  return m;
}

inline void require_nonsingular(const ScalarPForm& w, const Context& ctx) {
  for (std::size_t k = 0; k < ctx.points.size(); ++k) {
    Evaluator ev(ctx.points[k]);
    const int r = numeric_rank(w.matrix(ev));
    if (r < w.dim())
      throw SingularForm("2-form has rank " + std::to_string(r) + " < " + std::to_string(w.dim()) +
                         " at sample point " + std::to_string(k));
  }
}

}  // namespace detail

/// The vector field S with i_S Omega = alpha (pointwise solve).
inline VectorField spray_from_alpha(const ScalarPForm& omega, const ScalarPForm& alpha, const Context& ctx) {
  detail::require_two_form(omega, "spray_from_alpha");
  if (alpha.degree() != 1) throw DegreeError("spray_from_alpha needs a 1-form");
  detail::require_nonsingular(omega, ctx);
  // (i_S Omega)_j = sum_i S_i W_ij = -(W S)_j
  std::vector<Expr> rhs;
  for (int k = 0; k < omega.dim(); ++k) rhs.push_back(-alpha.at(static_cast<std::size_t>(k)));
  return VectorField(omega.chart(), solve(omega.dim(), detail::matrix_entries(omega), rhs));
}

/// G with i_G Omega = -dE. The x and y blocks of the solution are y and z
/// (checked at the sample points) and are substituted exactly; the z block
/// stays a solve node.
inline CanonicalSpray canonical_spray(const FinslerianForm& f, const Context& ctx) {
  const ScalarPForm& w = f.omega;
  const Chart& c = w.chart();
  const VectorField c2 = make_C2(c);
  const ScalarPForm ic2 = interior(c2, w);
  const VectorForm1 j2 = make_J2(c);
  CanonicalSpray out{standard_semispray(c, 2), Expr(), {}, {}, {}, {}, {}};
  out.closedness = max_abs(derivation(j2, ic2), ctx.points);
  if (!ctx.tol.accepts(out.closedness))
    throw ClosednessFailed("i_C2 Omega is not d_J2-closed (residual " + std::to_string(out.closedness.max_abs) + ")");
  detail::require_nonsingular(w, ctx);

  out.energy = energy(f, ctx);
  const ScalarPForm de = ScalarPForm::differential(c, out.energy);
  out.c2_identity = difference(ic2, derivation(j2, ScalarPForm::function(c, out.energy)), ctx.points);

  // W G = dE
  std::vector<Expr> rhs(de.coefficients().begin(), de.coefficients().end());
  const VectorField raw(c, solve(c.dim(), detail::matrix_entries(w), rhs));
  VectorField forced(c);
  for (int i = 0; i < c.n(); ++i) {
    forced[c.index(Block::X, i)] = c.y(i);
    forced[c.index(Block::Y, i)] = c.z(i);
    forced[c.index(Block::Z, i)] = raw[c.index(Block::Z, i)];
  }
  out.forced_blocks = difference(raw, forced, ctx.points);
  if (!ctx.tol.accepts(out.forced_blocks))
    throw ValidationFailed("canonical spray: J2 G != C2 (residual " + std::to_string(out.forced_blocks.max_abs) + ")");
  out.spray = SemiSpray{forced, 2};
  Residual sys;
  sys.points = static_cast<int>(ctx.points.size());
  for (const auto& p : ctx.points) {
    Evaluator ev(p);
    const Eigen::VectorXd g = forced.evaluate(ev), rhs_v = de.covector(ev);
    sys.max_abs = std::max(sys.max_abs, (w.matrix(ev) * g - rhs_v).lpNorm<Eigen::Infinity>());
    sys.scale = std::max(sys.scale, rhs_v.lpNorm<Eigen::Infinity>());
  }
  out.linear_system = sys;
  if (!ctx.tol.accepts(sys))
    throw ValidationFailed("canonical spray: Omega G != dE (residual " + std::to_string(sys.max_abs) + ")");
  out.homogeneity = difference(lie_bracket(c2, forced), forced, ctx.points);
  return out;
}

struct OmegaDecomposition {
  Expr energy;
  ScalarPForm exact;   // d d_J2 E
  ScalarPForm theta;   // i_C2 d Omega
  Residual reconstruction;
  bool closed = false;
};

/// Omega = d d_J2 E + i_C2 d Omega. Needs d_C2 Omega = Omega, i_J2 Omega = 0
/// and d_J2-closed i_C2 Omega; maximal rank is not used.
inline OmegaDecomposition decompose_omega(const ScalarPForm& omega, const Context& ctx) {
  detail::require_two_form(omega, "decompose_omega");
  const Chart& c = omega.chart();
  const VectorField c2 = make_C2(c);
  const VectorForm1 j2 = make_J2(c);
  auto need = [&](const Residual& r, const char* what) {
    if (!ctx.tol.accepts(r)) throw InvalidForm(std::string("decompose_omega: ") + what + " fails");
  };
  need(difference(derivation(c2, omega), omega, ctx.points), "d_C2 Omega=Omega");
  need(max_abs(interior(j2, omega), ctx.points), "i_J2 Omega=0");
  need(max_abs(derivation(j2, interior(c2, omega)), ctx.points), "d_J2 i_C2 Omega=0");

  OmegaDecomposition out{Expr(), ScalarPForm(c, 2), ScalarPForm(c, 2), {}, false};
  out.energy = Expr(0.5) * detail::pair(omega, c2, standard_semispray(c, 2).field);
  out.exact = exterior_derivative(derivation(j2, ScalarPForm::function(c, out.energy)));
  const ScalarPForm dw = exterior_derivative(omega);
  out.closed = ctx.tol.accepts(max_abs(dw, ctx.points));
  out.theta = interior(c2, dw);
  out.reconstruction = difference(out.exact + out.theta, omega, ctx.points);
  return out;
}

struct CanonicalConnections {
  Connection gamma2, gamma1;
  Residual gamma2_torsion;
  Residual gamma2_spray;  // h G - G
  Residual gamma1_spray;  // h G - G for the type-1 partner; nonzero in general
  bool gamma2_homogeneous = false, gamma1_homogeneous = false;
};

inline CanonicalConnections canonical_connections(const SemiSpray& g, const Context& ctx) {
  const ConjugatePair pair = conjugate_pair(g, ctx);
  CanonicalConnections out{pair.gamma2, pair.gamma1, {}, {}, {}, false, false};
  out.gamma2_torsion = max_abs(strong_torsion_type2(pair.gamma2), ctx.points);
  out.gamma2_spray = difference(projectors(pair.gamma2).h(g.field), g.field, ctx.points);
  out.gamma1_spray = difference(projectors(pair.gamma1).h(g.field), g.field, ctx.points);
  out.gamma2_homogeneous = ctx.tol.accepts(max_abs(bracket(make_C2(g.field.chart()), pair.gamma2.gamma), ctx.points));
  out.gamma1_homogeneous = ctx.tol.accepts(max_abs(bracket(make_C2(g.field.chart()), pair.gamma1.gamma), ctx.points));
  return out;
}

/// d_G E = 0; d_G Omega = 0 when Omega is closed; the i_C1 Omega statement
/// and its supporting identity Omega(C1, S) = 0.
inline VerificationReport prop8_and_remark5(const ScalarPForm& omega, const SemiSpray& g, const Expr& e,
                                            const Context& ctx, const std::string& prefix = "finsler") {
  const Chart& c = omega.chart();
  VerificationReport rep;
  const int np = static_cast<int>(ctx.points.size());
  rep.add(prefix + ".dGE", "d_G E=0", max_abs(std::span<const Expr>(std::vector<Expr>{g.field.apply(e)}), ctx.points),
          ctx.tol);
  const bool closed = ctx.tol.accepts(max_abs(exterior_derivative(omega), ctx.points));
  rep.add_flag(prefix + ".closed", "d Omega=0 (informational)", true, np, closed ? "closed" : "not closed");
  if (closed) rep.add(prefix + ".dGOmega", "d_G Omega=0", max_abs(derivation(g.field, omega), ctx.points), ctx.tol);
  const ScalarPForm ic1 = interior(make_C1(c), omega);
  const bool ic1_closed = ctx.tol.accepts(max_abs(derivation(make_J2(c), ic1), ctx.points));
  rep.add_flag(prefix + ".iC1closed", "d_J2 i_C1 Omega=0 (informational)", true, np,
               ic1_closed ? "d_J2-closed" : "not d_J2-closed");
  if (ic1_closed) rep.add(prefix + ".iC1", "i_C1 Omega=0", max_abs(ic1, ctx.points), ctx.tol);
  const std::vector<Expr> c1s{detail::pair(omega, make_C1(c), g.field)};
  rep.add(prefix + ".OmegaC1S", "Omega(C1,S)=0", max_abs(std::span<const Expr>(c1s), ctx.points), ctx.tol);
  return rep;
}

// ---------------------------------------------------------------------------
// Catalog.

/// n = 2 Finslerian form with skew matrix [[A,B,C],[-B,-2C,0],[C,0,0]] in
/// (x, y, z) blocks, C = (1/y1) [[0,1],[-1,0]], B = [[-2 z2, z1],[z1, 0]] / y1^2,
/// A = x1 y2 [[0,1],[-1,0]]. Energy y2 z1 / y1 - z2; not closed.
inline ScalarPForm finsler_witness() {
  const Chart c(2);
  const Expr x1 = c.x(0), y1 = c.y(0), y2 = c.y(1), z1 = c.z(0), z2 = c.z(1);
  const Expr iy = recip(y1), iy2 = recip(y1 * y1);
  ScalarPForm w(c, 2);
  const int X1 = c.index(Block::X, 0), X2 = c.index(Block::X, 1), Y1 = c.index(Block::Y, 0),
            Y2 = c.index(Block::Y, 1), Z1 = c.index(Block::Z, 0), Z2 = c.index(Block::Z, 1);
  w.set({X1, X2}, x1 * y2);
  w.set({X1, Y1}, Expr(-2.0) * z2 * iy2);
  w.set({X1, Y2}, z1 * iy2);
  w.set({X2, Y1}, z1 * iy2);
  w.set({X1, Z2}, iy);
  w.set({X2, Z1}, -iy);
  w.set({Y1, Y2}, Expr(-2.0) * iy);
  return w;
}

/// d d_J2 (|y|^2 / 2): closed, homogeneous, i_J2 = 0, but of rank 2n only.
inline ScalarPForm closed_degenerate_form(const Chart& c) {
  std::vector<Expr> sq;
  for (int i = 0; i < c.n(); ++i) sq.push_back(c.y(i) * c.y(i));
  const Expr e = Expr(0.5) * sum(sq);
  return exterior_derivative(derivation(make_J2(c), ScalarPForm::function(c, e)));
}

}  // namespace t2m
