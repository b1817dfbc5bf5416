#pragma once
// Brackets, exterior derivative, insertions and graded derivations on
// chart-level tensors.

#include <algorithm>
#include <vector>

#include "t2m/tensors.hpp"

namespace t2m {

/// Jacobian (DX)(r, m) = d_m X^r as a vector 1-form.
inline VectorForm1 jacobian(const VectorField& x) {
  VectorForm1 d(x.chart());
  for (int r = 0; r < x.dim(); ++r)
    for (int m = 0; m < x.dim(); ++m) d(r, m) = diff(x[r], m);
  return d;
}

/// [X, Y]^k = X^i d_i Y^k - Y^i d_i X^k.
inline VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  require_same_chart(x.chart(), y.chart(), "lie_bracket");
  VectorField r(x.chart());
  for (int k = 0; k < x.dim(); ++k) r[k] = x.apply(y[k]) - y.apply(x[k]);
  return r;
}

/// Lie derivative of a vector 1-form: [X, K](Y) = [X, KY] - K[X, Y].
inline VectorForm1 bracket(const VectorField& x, const VectorForm1& k) {
  require_same_chart(x.chart(), k.chart(), "bracket");
  const VectorForm1 dx = jacobian(x);
  VectorForm1 r(k.chart());
  for (int i = 0; i < k.dim(); ++i)
    for (int j = 0; j < k.dim(); ++j) r(i, j) = x.apply(k(i, j));
  return r + k * dx - dx * k;
}

/// [K, X] = -[X, K].
inline VectorForm1 bracket(const VectorForm1& k, const VectorField& x) { return -bracket(x, k); }

/// Lie derivative of a vector 2-form:
/// [X, L](Y, Z) = [X, L(Y, Z)] - L([X, Y], Z) - L(Y, [X, Z]).
inline VectorForm2 bracket(const VectorField& x, const VectorForm2& l) {
  require_same_chart(x.chart(), l.chart(), "bracket");
  const int d = l.dim();
  const VectorForm1 dx = jacobian(x);
  VectorForm2 r(l.chart());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      VectorField v = lie_bracket(x, l.value(i, j));
      for (int m = 0; m < d; ++m) {
        if (!dx(m, i).is_zero()) v = v + dx(m, i) * l.value(m, j);
        if (!dx(m, j).is_zero()) v = v + dx(m, j) * l.value(i, m);
      }
      r.set(i, j, v);
    }
  return r;
}

/// Frolicher-Nijenhuis bracket of two vector 1-forms. On coordinate fields
/// [e_i, e_j] = 0, which leaves
/// [K, L](e_i, e_j) = [Ke_i, Le_j] + [Le_i, Ke_j] - K([Le_i, e_j] + [e_i, Le_j])
///                    - L([Ke_i, e_j] + [e_i, Ke_j]).
inline VectorForm2 bracket(const VectorForm1& k, const VectorForm1& l) {
  require_same_chart(k.chart(), l.chart(), "bracket");
  const int d = k.dim();
  std::vector<VectorField> ke, le;
  for (int i = 0; i < d; ++i) {
    ke.push_back(k.column(i));
    le.push_back(l.column(i));
  }
  // [Ue_i, e_j] = -d_j(U e_i).
  auto partial = [](const VectorField& v, int j) {
    VectorField r(v.chart());
    for (int m = 0; m < v.dim(); ++m) r[m] = diff(v[m], j);
    return r;
  };
  VectorForm2 r(k.chart());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      VectorField v = lie_bracket(ke[i], le[j]) + lie_bracket(le[i], ke[j]);
      v = v + k(partial(le[i], j) - partial(le[j], i));
      v = v + l(partial(ke[i], j) - partial(ke[j], i));
      r.set(i, j, v);
    }
  return r;
}

/// Insertion of a vector field into the first slot of a vector 2-form:
/// (i_S t)(X) = t(S, X).
inline VectorForm1 insert(const VectorForm2& t, const VectorField& s) {
  require_same_chart(t.chart(), s.chart(), "insert");
  const int d = t.dim();
  VectorForm1 r(t.chart());
  for (int c = 0; c < d; ++c) {
    for (int k = 0; k < d; ++k) {
      std::vector<Expr> terms;
      for (int m = 0; m < d; ++m) {
        if (m == c || s[m].is_zero()) continue;
        Expr comp = t.component(k, m, c);
        if (!comp.is_zero()) terms.push_back(s[m] * comp);
      }
      r(k, c) = sum(std::move(terms));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Scalar forms.

/// Wedge product; the result degree must not exceed 3.
inline ScalarPForm wedge(const ScalarPForm& a, const ScalarPForm& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  const int p = a.degree(), q = b.degree();
  if (p + q > ScalarPForm::kMaxDegree) throw DegreeError("wedge: result degree exceeds 3");
  ScalarPForm r(a.chart(), p + q);
  for (std::size_t ia = 0; ia < a.size(); ++ia) {
    if (a.at(ia).is_zero()) continue;
    for (std::size_t ib = 0; ib < b.size(); ++ib) {
      if (b.at(ib).is_zero()) continue;
      std::vector<int> idx;
      for (int s = 0; s < p; ++s) idx.push_back(a.multi_indices()[ia][static_cast<std::size_t>(s)]);
      for (int s = 0; s < q; ++s) idx.push_back(b.multi_indices()[ib][static_cast<std::size_t>(s)]);
      std::vector<int> sorted = idx;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
      r.set(idx, r.coeff(idx) + a.at(ia) * b.at(ib));
    }
  }
  return r;
}

/// dx_k (k a coordinate index) as a 1-form.
inline ScalarPForm basis_form(const Chart& chart, int k) {
  ScalarPForm w(chart, 1);
  w.at(static_cast<std::size_t>(k)) = Expr(1.0);
  return w;
}

/// Exterior derivative, (dw)_{i0..ip} = sum_a (-1)^a d_{ia} w_{i0..^ia..ip}.
inline ScalarPForm exterior_derivative(const ScalarPForm& w) {
  const int p = w.degree();
  if (p >= ScalarPForm::kMaxDegree)
    throw DegreeError("exterior derivative of a " + std::to_string(p) + "-form exceeds degree 3");
  ScalarPForm r(w.chart(), p + 1);
  for (std::size_t pos = 0; pos < r.size(); ++pos) {
    const auto& ix = r.multi_indices()[pos];
    std::vector<Expr> terms;
    for (int a = 0; a <= p; ++a) {
      std::vector<int> rest;
      for (int s = 0; s <= p; ++s)
        if (s != a) rest.push_back(ix[static_cast<std::size_t>(s)]);
      Expr c = diff(w.coeff(rest), ix[static_cast<std::size_t>(a)]);
      if (c.is_zero()) continue;
      terms.push_back(a % 2 == 0 ? c : -c);
    }
    r.at(pos) = sum(std::move(terms));
  }
  return r;
}

/// i_X w: contraction of a vector field into the first slot.
inline ScalarPForm interior(const VectorField& x, const ScalarPForm& w) {
  require_same_chart(x.chart(), w.chart(), "interior product");
  const int p = w.degree();
  if (p == 0) throw DegreeError("interior product of a 0-form");
  ScalarPForm r(w.chart(), p - 1);
  for (std::size_t pos = 0; pos < r.size(); ++pos) {
    const auto& ix = r.multi_indices()[pos];
    std::vector<Expr> terms;
    for (int k = 0; k < x.dim(); ++k) {
      if (x[k].is_zero()) continue;
      std::vector<int> idx{k};
      for (int s = 0; s < p - 1; ++s) idx.push_back(ix[static_cast<std::size_t>(s)]);
      Expr c = w.coeff(idx);
      if (!c.is_zero()) terms.push_back(x[k] * c);
    }
    r.at(pos) = sum(std::move(terms));
  }
  return r;
}

/// i_K w(X_1..X_p) = sum_a w(X_1, .., K X_a, .., X_p).
inline ScalarPForm interior(const VectorForm1& k, const ScalarPForm& w) {
  require_same_chart(k.chart(), w.chart(), "interior product");
  const int p = w.degree();
  if (p == 0) throw DegreeError("interior product of a 0-form");
  ScalarPForm r(w.chart(), p);
  for (std::size_t pos = 0; pos < r.size(); ++pos) {
    const auto& ix = r.multi_indices()[pos];
    std::vector<Expr> terms;
    for (int a = 0; a < p; ++a) {
      const int col = ix[static_cast<std::size_t>(a)];
      for (int m = 0; m < k.dim(); ++m) {
        if (k(m, col).is_zero()) continue;
        std::vector<int> idx(ix.begin(), ix.begin() + p);
        idx[static_cast<std::size_t>(a)] = m;
        Expr c = w.coeff(idx);
        if (!c.is_zero()) terms.push_back(k(m, col) * c);
      }
    }
    r.at(pos) = sum(std::move(terms));
  }
  return r;
}

/// Lie derivative d_X = i_X d + d i_X, computed with the coordinate formula
/// (L_X w)_I = X^k d_k w_I + sum_a (d_{ia} X^k) w_{..k..}, valid for every p <= 3.
inline ScalarPForm derivation(const VectorField& x, const ScalarPForm& w) {
  require_same_chart(x.chart(), w.chart(), "d_X");
  const int p = w.degree();
  ScalarPForm r(w.chart(), p);
  for (std::size_t pos = 0; pos < r.size(); ++pos) {
    const auto& ix = r.multi_indices()[pos];
    std::vector<Expr> terms{x.apply(w.at(pos))};
    for (int a = 0; a < p; ++a) {
      const int col = ix[static_cast<std::size_t>(a)];
      for (int m = 0; m < x.dim(); ++m) {
        Expr dxm = diff(x[m], col);
        if (dxm.is_zero()) continue;
        std::vector<int> idx(ix.begin(), ix.begin() + p);
        idx[static_cast<std::size_t>(a)] = m;
        Expr c = w.coeff(idx);
        if (!c.is_zero()) terms.push_back(dxm * c);
      }
    }
    r.at(pos) = sum(std::move(terms));
  }
  return r;
}

/// d_K = i_K d - d i_K for a vector 1-form K (on functions d_K f = i_K df).
inline ScalarPForm derivation(const VectorForm1& k, const ScalarPForm& w) {
  require_same_chart(k.chart(), w.chart(), "d_K");
  if (w.degree() == 0) return interior(k, exterior_derivative(w));
  if (w.degree() >= ScalarPForm::kMaxDegree)
    throw DegreeError("d_K of a 3-form exceeds degree 3");
  return interior(k, exterior_derivative(w)) - exterior_derivative(interior(k, w));
}

}  // namespace t2m
