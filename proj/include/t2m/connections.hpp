#pragma once
// Nonlinear connections of type 1 and 2: validation, projectors, torsions,
// associated semi-sprays, decompositions and conjugate pairs.

#include <Eigen/Dense>

#include <string>
#include <utility>

#include "t2m/canonical.hpp"

namespace t2m {

struct Connection {
  VectorForm1 gamma;
  int type = 1;
};

struct Projectors {
  VectorForm1 h, v;
};

/// Residuals of the defining relations (J1 G = J1, G J2 = -J2 for type 1;
/// J2 G = J2, G J1 = -J1 for type 2) and of G^2 = I.
inline VerificationReport validate_connection(const VectorForm1& g, int type, const Context& ctx,
                                              const std::string& prefix = "connection") {
  VerificationReport rep;
  const Chart& c = g.chart();
  const VectorForm1 j1 = make_J1(c), j2 = make_J2(c), id = VectorForm1::identity(c);
  if (type == 1) {
    rep.add(prefix + ".J1G", "J1 G=J1", difference(j1 * g, j1, ctx.points), ctx.tol);
    rep.add(prefix + ".GJ2", "G J2=-J2", difference(g * j2, -j2, ctx.points), ctx.tol);
  } else if (type == 2) {
    rep.add(prefix + ".J2G", "J2 G=J2", difference(j2 * g, j2, ctx.points), ctx.tol);
    rep.add(prefix + ".GJ1", "G J1=-J1", difference(g * j1, -j1, ctx.points), ctx.tol);
  } else {
    rep.add_flag(prefix + ".type", "connection type in {1,2}", false, 0, "type " + std::to_string(type));
  }
  rep.add(prefix + ".involution", "G^2=I", difference(g * g, id, ctx.points), ctx.tol);
  return rep;
}

/// Validates and wraps; InvalidConnection names the first failing relation.
inline Connection make_connection(const VectorForm1& g, int type, const Context& ctx) {
  const VerificationReport rep = validate_connection(g, type, ctx);
  for (const auto& chk : rep.checks())
    if (!chk.pass)
      throw InvalidConnection("not a type-" + std::to_string(type) + " connection: " + chk.anchor +
                              " fails (residual " + std::to_string(chk.max_residual) + ")");
  return {g, type};
}

/// h = (I + G)/2, v = (I - G)/2.
inline Projectors projectors(const Connection& con) {
  if (con.type != 1 && con.type != 2) throw InvalidConnection("connection type must be 1 or 2");
  const VectorForm1 id = VectorForm1::identity(con.gamma.chart());
  return {Expr(0.5) * (id + con.gamma), Expr(0.5) * (id - con.gamma)};
}

/// The standard semi-spray used when a construction needs an arbitrary one:
/// (y, 0, 0) for type 1 and (y, z, 0) for type 2.
inline SemiSpray standard_semispray(const Chart& c, int type) {
  return make_semispray(c, type, std::vector<Expr>(static_cast<std::size_t>(type == 1 ? 2 * c.n() : c.n())));
}

/// S = h S'.
inline SemiSpray associated_semispray(const Connection& con, const SemiSpray& s) {
  if (con.type != s.type)
    throw TypeMismatch("type-" + std::to_string(con.type) + " connection with a type-" + std::to_string(s.type) +
                       " semi-spray");
  require_same_chart(con.gamma.chart(), s.field.chart(), "associated_semispray");
  return {projectors(con).h(s.field), s.type};
}

inline SemiSpray associated_semispray(const Connection& con) {
  return associated_semispray(con, standard_semispray(con.gamma.chart(), con.type));
}

/// t = [J1, G].
inline VectorForm2 weak_torsion(const Connection& con) {
  if (con.type != 1) throw InvalidConnection("weak torsion needs a type-1 connection");
  return bracket(make_J1(con.gamma.chart()), con.gamma);
}

/// T = i_S t - [C2, G] for a type-1 connection and any type-1 semi-spray S.
inline VectorForm1 strong_torsion(const Connection& con, const SemiSpray& s) {
  if (con.type != 1) throw InvalidConnection("strong torsion needs a type-1 connection");
  if (s.type != 1) throw TypeMismatch("strong torsion needs a type-1 semi-spray");
  return insert(weak_torsion(con), s.field) - bracket(make_C2(con.gamma.chart()), con.gamma);
}

/// T = -J2 v + 2[S, J1] + [C1, G] - [C2, G], with S = h S' the associated
/// semi-spray.
inline VectorForm1 strong_torsion_closed_form(const Connection& con) {
  if (con.type != 1) throw InvalidConnection("strong torsion needs a type-1 connection");
  const Chart& c = con.gamma.chart();
  const SemiSpray s = associated_semispray(con);
  const Projectors pr = projectors(con);
  return -(make_J2(c) * pr.v) + Expr(2.0) * bracket(s.field, make_J1(c)) + bracket(make_C1(c), con.gamma) -
         bracket(make_C2(c), con.gamma);
}

/// T = 3G - I - 2[J2, S] for a type-2 connection with associated spray S.
inline VectorForm1 strong_torsion_type2(const Connection& con) {
  if (con.type != 2) throw InvalidConnection("expected a type-2 connection");
  const Chart& c = con.gamma.chart();
  const SemiSpray s = associated_semispray(con);
  return Expr(3.0) * con.gamma - VectorForm1::identity(c) - Expr(2.0) * bracket(make_J2(c), s.field);
}

/// T = (J2 G - J2 - 4[J1, S]) / 2, valid when [C2, G] = 0 and [C1, G] = 0;
/// both are checked first.
inline VectorForm1 eq17_form(const Connection& con, const Context& ctx) {
  if (con.type != 1) throw InvalidConnection("expected a type-1 connection");
  const Chart& c = con.gamma.chart();
  const Residual r2 = max_abs(bracket(make_C2(c), con.gamma), ctx.points);
  if (!ctx.tol.accepts(r2))
    throw PreconditionFailed("[C2,G]=0 fails (residual " + std::to_string(r2.max_abs) + ")");
  const Residual r1 = max_abs(bracket(make_C1(c), con.gamma), ctx.points);
  if (!ctx.tol.accepts(r1))
    throw PreconditionFailed("[C1,G]=0 fails (residual " + std::to_string(r1.max_abs) + ")");
  const SemiSpray s = associated_semispray(con);
  const VectorForm1 j2 = make_J2(c);
  return Expr(0.5) * (j2 * con.gamma - j2 - Expr(4.0) * bracket(make_J1(c), s.field));
}

// ---------------------------------------------------------------------------
// Decompositions.

namespace detail {

inline void require(const PredicateResult& p, const std::string& what) {
  if (!p.holds)
    throw PreconditionFailed(what + " fails (residual " + std::to_string(p.residual.max_abs) + ")");
}

/// Least-norm solution of {J1 G = J1, G J2 = -J2, J2 G = rhs, G s = s} for
/// the entries of G at one point. Returns the solution and the residual of
/// the linear system.
inline std::pair<Eigen::MatrixXd, double> solve_type1_entries(const Eigen::MatrixXd& j1, const Eigen::MatrixXd& j2,
                                                              const Eigen::MatrixXd& rhs, const Eigen::VectorXd& s) {
  const int d = static_cast<int>(j1.rows());
  const int unknowns = d * d;
  auto var = [d](int r, int c) { return r * d + c; };
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3 * d * d + d, unknowns);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * d * d + d);
  int row = 0;
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c, ++row) {  // (J1 G)(r, c) = J1(r, c)
      for (int m = 0; m < d; ++m) a(row, var(m, c)) += j1(r, m);
      b(row) = j1(r, c);
    }
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c, ++row) {  // (G J2)(r, c) = -J2(r, c)
      for (int m = 0; m < d; ++m) a(row, var(r, m)) += j2(m, c);
      b(row) = -j2(r, c);
    }
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c, ++row) {  // (J2 G)(r, c) = rhs(r, c)
      for (int m = 0; m < d; ++m) a(row, var(m, c)) += j2(r, m);
      b(row) = rhs(r, c);
    }
  for (int r = 0; r < d; ++r, ++row) {  // (G s)_r = s_r
    for (int c = 0; c < d; ++c) a(row, var(r, c)) = s(c);
    b(row) = s(r);
  }
  const Eigen::VectorXd g = a.completeOrthogonalDecomposition().solve(b);
  const double res = (a * g - b).lpNorm<Eigen::Infinity>();
  Eigen::MatrixXd out(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) out(r, c) = g(var(r, c));
  return {out, res};
}

}  // namespace detail

/// Builds a type-1 connection with J2 G = 2T + J2 + 4[J1, S], associated
/// spray S and strong torsion T, of the shape G = [[I,0,0],[a,-I,0],[b,0,-I]]
/// with a = (2T + J2 + 4[J1,S])_zx / 2. Feasibility is decided pointwise by a
/// least-norm solve; b is chosen so that [C1,G] = 0 as well (see below).
inline Connection decompose_type1(const SemiSpray& s, const VectorForm1& t, const Context& ctx) {
  if (s.type != 1) throw TypeMismatch("decompose_type1 needs a type-1 spray");
  const Chart& c = s.field.chart();
  require_same_chart(c, t.chart(), "decompose_type1");
  detail::require(is_spray(s, ctx.points, ctx.tol), "[C2,S]=S");
  detail::require(is_semibasic(t, Fibration::Pi2, ctx.points, ctx.tol), "T pi2-semi-basic");
  detail::require(judge(max_abs(t(s.field), ctx.points), ctx.tol), "T(S)=0");

  const VectorForm1 j1 = make_J1(c), j2 = make_J2(c);
  const VectorForm1 rhs = Expr(2.0) * t + j2 + Expr(4.0) * bracket(j1, s.field);

  const int n = c.n();
  VectorForm1 g(c);
  std::vector<Expr> ysq, yz;
  for (int i = 0; i < n; ++i) {
    ysq.push_back(c.y(i) * c.y(i));
    yz.push_back(c.y(i) * c.z(i));
  }
  const Expr inv = recip(sum(ysq));
  const Expr w = sum(yz) * inv;
  for (int i = 0; i < n; ++i) {
    g(c.index(Block::X, i), c.index(Block::X, i)) = Expr(1.0);
    g(c.index(Block::Y, i), c.index(Block::Y, i)) = Expr(-1.0);
    g(c.index(Block::Z, i), c.index(Block::Z, i)) = Expr(-1.0);
    for (int j = 0; j < n; ++j)
      g(c.index(Block::Y, i), c.index(Block::X, j)) = Expr(0.5) * rhs(c.index(Block::Z, i), c.index(Block::X, j));
  }
  // b = a (y.z)/|y|^2 plus a rank-one fix so that b y = 2 S_z.  The first
  // term is what makes y.d_z b = a hold, i.e. [C1,G] = 0 on the (z,x) block;
  // for n = 1 the whole thing collapses to 2 S_z / y.
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> ay;
    for (int k = 0; k < n; ++k) ay.push_back(g(c.index(Block::Y, i), c.index(Block::X, k)) * c.y(k));
    const Expr r = Expr(2.0) * s.field[c.index(Block::Z, i)] - sum(ay) * w;
    for (int j = 0; j < n; ++j)
      g(c.index(Block::Z, i), c.index(Block::X, j)) =
          g(c.index(Block::Y, i), c.index(Block::X, j)) * w + r * c.y(j) * inv;
  }

  const Eigen::MatrixXd j1m = j1.evaluate(ctx.points.front()), j2m = j2.evaluate(ctx.points.front());
  for (std::size_t k = 0; k < ctx.points.size(); ++k) {
    const Point& p = ctx.points[k];
    Evaluator ev(p);
    const Eigen::VectorXd sv = s.field.evaluate(ev);
    const auto [num, res] = detail::solve_type1_entries(j1m, j2m, rhs.evaluate(ev), sv);
    const double scale = std::max(1.0, num.lpNorm<Eigen::Infinity>());
    if (!(res <= ctx.tol.abs * scale))
      throw NoSolution("J2 G = 2T + J2 + 4[J1,S] with G S = S is infeasible at sample point " + std::to_string(k) +
                       " (residual " + std::to_string(res) + ")");
    const double gap = (g.evaluate(ev) * sv - sv).lpNorm<Eigen::Infinity>();
    if (!(gap <= ctx.tol.abs * scale))
      throw ValidationFailed("closed-form completion violates G S = S by " + std::to_string(gap));
  }

  const Connection con{g, 1};
  auto post = [&](const Residual& r, const std::string& what) {
    if (!ctx.tol.accepts(r))
      throw ValidationFailed(what + " fails (residual " + std::to_string(r.max_abs) + ")");
  };
  const VerificationReport checks = validate_connection(g, 1, ctx);
  for (const auto& chk : checks.checks())
    if (!chk.pass) throw ValidationFailed(chk.anchor + " fails");
  post(difference(j2 * g, rhs, ctx.points), "J2 G=2T+J2+4[J1,S]");
  post(max_abs(bracket(make_C2(c), g), ctx.points), "[C2,G]=0");
  post(max_abs(bracket(make_C1(c), g), ctx.points), "[C1,G]=0");
  post(difference(associated_semispray(con).field, s.field, ctx.points), "hS'=S");
  post(difference(strong_torsion(con, s), t, ctx.points), "strong torsion = T");
  return con;
}

/// G = (2[J2, S] + T + I)/3, the unique homogeneous type-2 connection with
/// associated spray S and strong torsion T.
inline Connection catz_decompose_type2(const SemiSpray& s, const VectorForm1& t, const Context& ctx) {
  if (s.type != 2) throw TypeMismatch("catz_decompose_type2 needs a type-2 spray");
  const Chart& c = s.field.chart();
  require_same_chart(c, t.chart(), "catz_decompose_type2");
  detail::require(is_spray(s, ctx.points, ctx.tol), "[C2,S]=S");
  detail::require(is_semibasic(t, Fibration::Pi1, ctx.points, ctx.tol), "T pi1-semi-basic");
  detail::require(judge(max_abs(t(s.field), ctx.points), ctx.tol), "T(S)=0");
  const VectorForm1 g =
      Expr(1.0 / 3.0) * (Expr(2.0) * bracket(make_J2(c), s.field) + t + VectorForm1::identity(c));
  return make_connection(g, 2, ctx);
}

struct ConjugatePair {
  Connection gamma1, gamma2;
};

/// G1 = (2[J2,S] + 2[[J1,S],S] - I)/3 and G2 = (2[J2,S] + I)/3.
inline ConjugatePair conjugate_pair(const SemiSpray& s, const Context& ctx) {
  if (s.type != 2) throw PreconditionFailed("conjugate pair needs a type-2 spray");
  detail::require(is_spray(s, ctx.points, ctx.tol), "[C2,S]=S");
  const Chart& c = s.field.chart();
  const VectorForm1 id = VectorForm1::identity(c);
  const VectorForm1 j2s = bracket(make_J2(c), s.field);
  const VectorForm1 j1ss = bracket(bracket(make_J1(c), s.field), s.field);
  const VectorForm1 g1 = Expr(1.0 / 3.0) * (Expr(2.0) * j2s + Expr(2.0) * j1ss - id);
  const VectorForm1 g2 = Expr(1.0 / 3.0) * (Expr(2.0) * j2s + id);
  return {make_connection(g1, 1, ctx), make_connection(g2, 2, ctx)};
}

}  // namespace t2m
