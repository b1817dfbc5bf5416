#pragma once
// Linear connections given by chart coefficients, parallelism, fiber maps,
// regularity, and the nonlinear connections they induce.

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "t2m/connections.hpp"

namespace t2m {

/// D_X Y = X.grad(Y) + G(X, Y) with G(X, Y)^k = sum coef(k, i, j) X^i Y^j.
class LinearConnection {
 public:
  explicit LinearConnection(const Chart& chart, std::string domain = {})
      : chart_(chart), coef_(static_cast<std::size_t>(chart.dim() * chart.dim() * chart.dim())),
        domain_(std::move(domain)) {}

  const Chart& chart() const noexcept { return chart_; }
  int dim() const noexcept { return chart_.dim(); }
  const std::string& domain() const noexcept { return domain_; }
  void set_domain(std::string d) { domain_ = std::move(d); }

  const Expr& operator()(int k, int i, int j) const { return coef_[pos(k, i, j)]; }
  Expr& operator()(int k, int i, int j) {
    return coef_[pos(k, i, j)];
  }
  void set(int k, int i, int j, const Expr& e) {
    require_in_chart(e, chart_, "linear connection coefficient");
    coef_[pos(k, i, j)] = e;
  }
  std::span<const Expr> coefficients() const noexcept { return coef_; }

  /// G(X, Y), the non-derivative part.
  VectorField coefficient_map(const VectorField& x, const VectorField& y) const {
    require_same_chart(chart_, x.chart(), "linear connection");
    require_same_chart(chart_, y.chart(), "linear connection");
    const int d = dim();
    VectorField out(chart_);
    for (int k = 0; k < d; ++k) {
      std::vector<Expr> terms;
      for (int i = 0; i < d; ++i) {
        if (x[i].is_zero()) continue;
        for (int j = 0; j < d; ++j) {
          const Expr& g = (*this)(k, i, j);
          if (g.is_zero() || y[j].is_zero()) continue;
          terms.push_back(g * x[i] * y[j]);
        }
      }
      out[k] = sum(std::move(terms));
    }
    return out;
  }

 private:
  std::size_t pos(int k, int i, int j) const {
    const int d = dim();
    if (k < 0 || i < 0 || j < 0 || k >= d || i >= d || j >= d)
      throw ChartMismatch("linear connection index out of range");
    return static_cast<std::size_t>((k * d + i) * d + j);
  }

  Chart chart_;
  std::vector<Expr> coef_;
  std::string domain_;
};

inline VectorField covariant_derivative(const LinearConnection& d, const VectorField& x, const VectorField& y) {
  VectorField out = d.coefficient_map(x, y);
  for (int k = 0; k < d.dim(); ++k) out[k] = out[k] + x.apply(y[k]);
  return out;
}

/// The vector 1-form X -> D_X Y.
inline VectorForm1 covariant_differential(const LinearConnection& d, const VectorField& y) {
  require_same_chart(d.chart(), y.chart(), "covariant_differential");
  const int n = d.dim();
  VectorForm1 out(d.chart());
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      std::vector<Expr> terms{diff(y[k], i)};
      for (int j = 0; j < n; ++j)
        if (!d(k, i, j).is_zero() && !y[j].is_zero()) terms.push_back(d(k, i, j) * y[j]);
      out(k, i) = sum(std::move(terms));
    }
  return out;
}

/// Components (DK)(e_i, e_j)^k = D_{e_i}(K e_j)^k - (K D_{e_i} e_j)^k, listed
/// in (i, j, k) order.
inline std::vector<Expr> parallel_components(const LinearConnection& d, const VectorForm1& k) {
  require_same_chart(d.chart(), k.chart(), "parallel_check");
  const int n = d.dim();
  std::vector<Expr> out;
  out.reserve(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r) {
        std::vector<Expr> terms{diff(k(r, j), i)};
        for (int m = 0; m < n; ++m) {
          if (!d(r, i, m).is_zero() && !k(m, j).is_zero()) terms.push_back(d(r, i, m) * k(m, j));
          if (!k(r, m).is_zero() && !d(m, i, j).is_zero()) terms.push_back(-(k(r, m) * d(m, i, j)));
        }
        out.push_back(sum(std::move(terms)));
      }
  return out;
}

inline Residual parallel_check(const LinearConnection& d, const VectorForm1& k, std::span<const Point> points) {
  const std::vector<Expr> comps = parallel_components(d, k);
  return max_abs(std::span<const Expr>(comps), points);
}

/// Torsion T(e_i, e_j) = G(e_i, e_j) - G(e_j, e_i); coordinate fields commute.
inline VectorForm2 torsion(const LinearConnection& d) {
  const int n = d.dim();
  VectorForm2 out(d.chart());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      VectorField v(d.chart());
      for (int k = 0; k < n; ++k) v[k] = d(k, i, j) - d(k, j, i);
      out.set(i, j, v);
    }
  return out;
}

enum class Regularity { J1, J2 };

inline const char* to_string(Regularity k) { return k == Regularity::J1 ? "J1" : "J2"; }

namespace detail {

/// Rows/columns of the vertical block: z for J1 (pi1-vertical), (y, z) for J2.
inline std::vector<int> vertical_block(const Chart& c, Regularity kind) {
  std::vector<int> v;
  if (kind == Regularity::J2)
    for (int i = 0; i < c.n(); ++i) v.push_back(c.index(Block::Y, i));
  for (int i = 0; i < c.n(); ++i) v.push_back(c.index(Block::Z, i));
  return v;
}

inline VectorField liouville(const Chart& c, Regularity kind) {
  return kind == Regularity::J1 ? make_C1(c) : make_C2(c);
}

inline VectorForm1 structure(const Chart& c, Regularity kind) {
  return kind == Regularity::J1 ? make_J1(c) : make_J2(c);
}

}  // namespace detail

/// D C1 for kind J1, D C2 for kind J2.
inline VectorForm1 liouville_differential(const LinearConnection& d, Regularity kind) {
  return covariant_differential(d, detail::liouville(d.chart(), kind));
}

/// Largest entry of D C outside the vertical rows at a point.
inline double vertical_leak(const LinearConnection& d, Regularity kind, const Point& p) {
  const Eigen::MatrixXd dc = liouville_differential(d, kind).evaluate(p);
  const std::vector<int> rows = detail::vertical_block(d.chart(), kind);
  double leak = 0.0;
  for (int r = 0; r < d.dim(); ++r) {
    if (std::find(rows.begin(), rows.end(), r) != rows.end()) continue;
    leak = std::max(leak, dc.row(r).lpNorm<Eigen::Infinity>());
  }
  return leak;
}

/// phi (kind J1, n x n) or psi (kind J2, 2n x 2n) at a point: D C restricted
/// to the vertical block.
inline Eigen::MatrixXd fiber_map(const LinearConnection& d, Regularity kind, const Point& p,
                                 const Tolerance& tol = {}) {
  const double leak = vertical_leak(d, kind, p);
  if (!(leak <= tol.abs))
    throw PreconditionFailed(std::string("image of D") + (kind == Regularity::J1 ? "C1" : "C2") +
                             " leaves the vertical block (residual " + std::to_string(leak) + ")");
  const Eigen::MatrixXd dc = liouville_differential(d, kind).evaluate(p);
  const std::vector<int> v = detail::vertical_block(d.chart(), kind);
  const int m = static_cast<int>(v.size());
  Eigen::MatrixXd out(m, m);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) out(r, c) = dc(v[static_cast<std::size_t>(r)], v[static_cast<std::size_t>(c)]);
  return out;
}

struct FiberMaps {
  Eigen::MatrixXd phi, psi;
};

inline FiberMaps fiber_maps(const LinearConnection& d, const Point& p, const Tolerance& tol = {}) {
  return {fiber_map(d, Regularity::J1, p, tol), fiber_map(d, Regularity::J2, p, tol)};
}

/// Threshold on |det| separating invertible fiber maps from numerical noise.
inline constexpr double kRegularDet = 1e-8;

struct RegularityCertificate {
  Regularity kind = Regularity::J1;
  Residual parallel_residual;
  double min_abs_det = 0.0;
  double max_condition = 0.0;
  bool verdict = false;
  std::string note;
};

inline RegularityCertificate is_regular(const LinearConnection& d, Regularity kind, const Context& ctx) {
  RegularityCertificate cert;
  cert.kind = kind;
  cert.parallel_residual = parallel_check(d, detail::structure(d.chart(), kind), ctx.points);
  cert.min_abs_det = std::numeric_limits<double>::infinity();
  if (!ctx.tol.accepts(cert.parallel_residual)) {
    cert.note = std::string("D") + to_string(kind) + " != 0";
    cert.min_abs_det = 0.0;
    return cert;
  }
  for (const auto& p : ctx.points) {
    Eigen::MatrixXd m;
    try {
      m = fiber_map(d, kind, p, ctx.tol);
    } catch (const PreconditionFailed& e) {
      cert.note = e.what();
      cert.min_abs_det = 0.0;
      return cert;
    } catch (const DomainError& e) {
      cert.note = e.what();
      cert.min_abs_det = 0.0;
      return cert;
    }
    const double det = std::abs(m.determinant());
    cert.min_abs_det = std::min(cert.min_abs_det, det);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    const double cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
    cert.max_condition = std::max(cert.max_condition, cond);
  }
  cert.verdict = cert.min_abs_det > kRegularDet && std::isfinite(cert.max_condition);
  if (!cert.verdict) cert.note = std::string(kind == Regularity::J1 ? "phi" : "psi") + " is singular";
  return cert;
}

/// G2 = I - 2 phi^{-1} D C1 (kind J1, type 2) or G1 = I - 2 psi^{-1} D C2
/// (kind J2, type 1). phi^{-1} enters through solve nodes, so the result
/// can be differentiated further.
inline Connection induced_connection(const LinearConnection& d, Regularity kind, const Context& ctx) {
  const RegularityCertificate cert = is_regular(d, kind, ctx);
  if (!cert.verdict) throw NotRegular(std::string("not ") + to_string(kind) + "-regular: " + cert.note);
  const Chart& c = d.chart();
  const VectorForm1 dc = liouville_differential(d, kind);
  const std::vector<int> v = detail::vertical_block(c, kind);
  const int m = static_cast<int>(v.size());
  std::vector<Expr> mat;
  mat.reserve(static_cast<std::size_t>(m * m));
  for (int r : v)
    for (int col : v) mat.push_back(dc(r, col));
  VectorForm1 g = VectorForm1::identity(c);
  for (int col = 0; col < c.dim(); ++col) {
    std::vector<Expr> rhs;
    for (int r : v) rhs.push_back(dc(r, col));
    const std::vector<Expr> x = solve(m, mat, rhs);
    for (int r = 0; r < m; ++r) {
      const int row = v[static_cast<std::size_t>(r)];
      g(row, col) = g(row, col) - Expr(2.0) * x[static_cast<std::size_t>(r)];
    }
  }
  return make_connection(g, kind == Regularity::J1 ? 2 : 1, ctx);
}

struct HomogeneityCriterion {
  PredicateResult criterion;    // [C2, D C] = 0
  PredicateResult homogeneous;  // [C2, G] = 0
  bool agree() const { return criterion.holds == homogeneous.holds; }
};

inline HomogeneityCriterion homogeneity_criterion(const LinearConnection& d, Regularity kind, const Context& ctx) {
  const Connection con = induced_connection(d, kind, ctx);
  const VectorField c2 = make_C2(d.chart());
  return {judge(max_abs(bracket(c2, liouville_differential(d, kind)), ctx.points), ctx.tol),
          judge(max_abs(bracket(c2, con.gamma), ctx.points), ctx.tol)};
}

struct ObstructionResult {
  Residual phi_on_vertical;  // D_{J1 X} C1 over all X
  RegularityCertificate regularity;
};

/// For a torsion-free D with D J1 = 0, phi vanishes on the vertical fiber,
/// so D cannot be J1-regular.
inline ObstructionResult prop3_obstruction(const LinearConnection& d, const Context& ctx) {
  const Residual tor = max_abs(torsion(d), ctx.points);
  if (!ctx.tol.accepts(tor))
    throw PreconditionFailed("linear connection has torsion (residual " + std::to_string(tor.max_abs) + ")");
  const Residual par = parallel_check(d, make_J1(d.chart()), ctx.points);
  if (!ctx.tol.accepts(par))
    throw PreconditionFailed("D J1 != 0 (residual " + std::to_string(par.max_abs) + ")");
  const VectorForm1 dc1 = liouville_differential(d, Regularity::J1);
  return {max_abs(dc1 * make_J1(d.chart()), ctx.points), is_regular(d, Regularity::J1, ctx)};
}

struct StrongTorsionRelation {
  Connection gamma2;
  Connection gamma2_bar;
  SemiSpray spray;
  VectorForm1 torsion;
  Residual relation;     // T - 3(G2 - G2bar)
  Residual spray_fixed;  // G2 S - S and G2bar S - S
  bool torsion_free = false;
  std::optional<Residual> closed_form;  // D C1 - phi(I - [J2,S])/3, only when T = 0
};

inline StrongTorsionRelation prop4_relation(const LinearConnection& d, const Context& ctx) {
  const Chart& c = d.chart();
  const RegularityCertificate cert = is_regular(d, Regularity::J1, ctx);
  if (!cert.verdict) throw PreconditionFailed("D is not J1-regular: " + cert.note);
  const VectorForm1 dc1 = liouville_differential(d, Regularity::J1);
  const Residual crit = max_abs(bracket(make_C2(c), dc1), ctx.points);
  if (!ctx.tol.accepts(crit))
    throw PreconditionFailed("[C2, D C1] != 0 (residual " + std::to_string(crit.max_abs) + ")");

  const Connection g2 = induced_connection(d, Regularity::J1, ctx);
  const SemiSpray s = associated_semispray(g2);
  const VectorForm1 j2s = bracket(make_J2(c), s.field);
  const VectorForm1 id = VectorForm1::identity(c);
  const VectorForm1 bar = Expr(1.0 / 3.0) * (Expr(2.0) * j2s + id);
  const VectorForm1 t = strong_torsion_type2(g2);

  StrongTorsionRelation out{g2, Connection{bar, 2}, s, t, {}, {}, false, std::nullopt};
  out.relation = difference(t, Expr(3.0) * (g2.gamma - bar), ctx.points);
  out.spray_fixed = difference(g2.gamma(s.field), s.field, ctx.points);
  out.spray_fixed.merge(difference(bar(s.field), s.field, ctx.points));
  out.torsion_free = ctx.tol.accepts(max_abs(t, ctx.points));
  if (out.torsion_free) {
    // phi applied to the z block of (I - [J2,S])
    VectorForm1 pz(c);
    for (int i = 0; i < c.n(); ++i) pz(c.index(Block::Z, i), c.index(Block::Z, i)) = Expr(1.0);
    out.closed_form = difference(dc1, Expr(1.0 / 3.0) * (dc1 * pz * (id - j2s)), ctx.points);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Catalog.

inline LinearConnection flat_connection(const Chart& c) { return LinearConnection(c); }

/// Per index i: G(X, Y) has x_i component X_{z_i} Y_{x_i} / y_i and z_i
/// component X_{z_i} Y_{z_i} / y_i. J1-regular with phi = I, D J2 != 0.
inline LinearConnection sample_connection(const Chart& c) {
  LinearConnection d(c, "y nonzero");
  for (int i = 0; i < c.n(); ++i) {
    const int x = c.index(Block::X, i), z = c.index(Block::Z, i);
    const Expr inv = recip(c.y(i));
    d.set(x, z, x, inv);
    d.set(z, z, z, inv);
  }
  return d;
}

/// Two-parameter family: G(X, Y) = ((a X_z + b X_y) Y_x / y, 0, (a X_z + b X_y) Y_z / y)
/// per index. D J1 = 0 for every member; D C1 = (0, 0, (1 + b) X_y + a X_z).
inline LinearConnection family_connection(const Chart& c, double a, double b) {
  LinearConnection d(c, "y nonzero");
  for (int i = 0; i < c.n(); ++i) {
    const int x = c.index(Block::X, i), y = c.index(Block::Y, i), z = c.index(Block::Z, i);
    const Expr inv = recip(c.y(i));
    if (a != 0.0) {
      d.set(x, z, x, Expr(a) * inv);
      d.set(z, z, z, Expr(a) * inv);
    }
    if (b != 0.0) {
      d.set(x, y, x, Expr(b) * inv);
      d.set(z, y, z, Expr(b) * inv);
    }
  }
  return d;
}

/// Symmetric part of the coefficients: G(X, Y) + G(Y, X) over 2.
inline LinearConnection symmetrized(const LinearConnection& d) {
  LinearConnection out(d.chart(), d.domain());
  for (int k = 0; k < d.dim(); ++k)
    for (int i = 0; i < d.dim(); ++i)
      for (int j = 0; j < d.dim(); ++j) {
        const Expr e = Expr(0.5) * (d(k, i, j) + d(k, j, i));
        if (!e.is_zero()) out.set(k, i, j, e);
      }
  return out;
}

struct FamilySearch {
  bool found = false;
  double a = 0.0, b = 0.0;
  double residual = 0.0;  // of [C2, D C1] at the accepted member
  int tried = 0;
};

/// Grid search over the family for a J1-regular member with [C2, D C1] = 0;
/// a member is accepted only when the residual is within tolerance.
inline FamilySearch search_homogeneous_family(const Chart& c, const Context& ctx) {
  FamilySearch best;
  best.residual = std::numeric_limits<double>::infinity();
  for (int ia = -4; ia <= 4; ++ia)
    for (int ib = -4; ib <= 4; ++ib) {
      const double a = 0.5 * ia, b = 0.5 * ib;
      ++best.tried;
      const LinearConnection d = family_connection(c, a, b);
      if (!is_regular(d, Regularity::J1, ctx).verdict) continue;
      const Residual r = max_abs(bracket(make_C2(c), liouville_differential(d, Regularity::J1)), ctx.points);
      if (r.max_abs < best.residual) {
        best.residual = r.max_abs;
        best.a = a;
        best.b = b;
        best.found = ctx.tol.accepts(r);
      }
    }
  return best;
}

}  // namespace t2m
