#pragma once
// Chart-level tensor objects on T2M: vector fields, scalar p-forms (p <= 3)
// and tangent-valued l-forms (l <= 2), all with expression coefficients.

#include <Eigen/Dense>

#include <array>
#include <span>
#include <variant>
#include <vector>

#include "t2m/chart.hpp"
#include "t2m/expr.hpp"

namespace t2m {

using Point = Eigen::VectorXd;

// ---------------------------------------------------------------------------

class VectorField {
 public:
  explicit VectorField(const Chart& chart)
      : chart_(chart), c_(static_cast<std::size_t>(chart.dim())) {}

  VectorField(const Chart& chart, std::vector<Expr> components)
      : chart_(chart), c_(std::move(components)) {
    if (c_.size() != static_cast<std::size_t>(chart.dim()))
      throw ChartMismatch("vector field needs " + std::to_string(chart.dim()) + " components, got " +
                          std::to_string(c_.size()));
    for (const auto& e : c_) require_in_chart(e, chart, "vector field");
  }

  /// The constant coordinate field d/du_k.
  static VectorField basis(const Chart& chart, int k) {
    VectorField e(chart);
    e[k] = Expr(1.0);
    return e;
  }

  const Chart& chart() const noexcept { return chart_; }
  int dim() const noexcept { return chart_.dim(); }

  const Expr& operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  Expr& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }
  std::span<const Expr> coefficients() const noexcept { return c_; }

  bool is_zero() const {
    for (const auto& e : c_)
      if (!e.is_zero()) return false;
    return true;
  }

  /// X f = sum_k X^k d_k f.
  Expr apply(const Expr& f) const {
    std::vector<Expr> terms;
    for (int k = 0; k < dim(); ++k) {
      if ((*this)[k].is_zero()) continue;
      Expr d = diff(f, k);
      if (!d.is_zero()) terms.push_back((*this)[k] * d);
    }
    return sum(std::move(terms));
  }

  Eigen::VectorXd evaluate(Evaluator& ev) const {
    Eigen::VectorXd v(dim());
    for (int k = 0; k < dim(); ++k) v(k) = ev((*this)[k]);
    return v;
  }

  Eigen::VectorXd evaluate(const Point& p) const {
    Evaluator ev(p);
    return evaluate(ev);
  }

  friend VectorField operator+(const VectorField& a, const VectorField& b) {
    require_same_chart(a.chart_, b.chart_, "vector field sum");
    VectorField r(a.chart_);
    for (int k = 0; k < a.dim(); ++k) r[k] = a[k] + b[k];
    return r;
  }
  friend VectorField operator-(const VectorField& a, const VectorField& b) {
    require_same_chart(a.chart_, b.chart_, "vector field difference");
    VectorField r(a.chart_);
    for (int k = 0; k < a.dim(); ++k) r[k] = a[k] - b[k];
    return r;
  }
  friend VectorField operator-(const VectorField& a) {
    VectorField r(a.chart_);
    for (int k = 0; k < a.dim(); ++k) r[k] = -a[k];
    return r;
  }
  friend VectorField operator*(const Expr& f, const VectorField& a) {
    VectorField r(a.chart_);
    for (int k = 0; k < a.dim(); ++k) r[k] = f * a[k];
    return r;
  }

 private:
  Chart chart_;
  std::vector<Expr> c_;
};

// ---------------------------------------------------------------------------

/// Vector 1-form: a field of endomorphisms, stored as a dim x dim matrix
/// acting on column vectors, K(X)^r = sum_c K(r, c) X^c.
class VectorForm1 {
 public:
  explicit VectorForm1(const Chart& chart)
      : chart_(chart), m_(static_cast<std::size_t>(chart.dim() * chart.dim())) {}

  VectorForm1(const Chart& chart, std::vector<Expr> row_major) : chart_(chart), m_(std::move(row_major)) {
    if (m_.size() != static_cast<std::size_t>(chart.dim() * chart.dim()))
      throw ChartMismatch("vector 1-form needs a " + std::to_string(chart.dim()) + "x" +
                          std::to_string(chart.dim()) + " matrix");
    for (const auto& e : m_) require_in_chart(e, chart, "vector 1-form");
  }

  static VectorForm1 identity(const Chart& chart) {
    VectorForm1 k(chart);
    for (int i = 0; i < chart.dim(); ++i) k(i, i) = Expr(1.0);
    return k;
  }

  static VectorForm1 constant(const Chart& chart, const Eigen::MatrixXd& m) {
    if (m.rows() != chart.dim() || m.cols() != chart.dim())
      throw ChartMismatch("constant vector 1-form: matrix size does not match chart");
    VectorForm1 k(chart);
    for (int r = 0; r < chart.dim(); ++r)
      for (int c = 0; c < chart.dim(); ++c) k(r, c) = Expr(m(r, c));
    return k;
  }

  const Chart& chart() const noexcept { return chart_; }
  int dim() const noexcept { return chart_.dim(); }

  const Expr& operator()(int r, int c) const { return m_[static_cast<std::size_t>(r * dim() + c)]; }
  Expr& operator()(int r, int c) { return m_[static_cast<std::size_t>(r * dim() + c)]; }
  std::span<const Expr> coefficients() const noexcept { return m_; }

  /// K(X).
  VectorField operator()(const VectorField& x) const {
    require_same_chart(chart_, x.chart(), "vector 1-form application");
    VectorField r(chart_);
    for (int i = 0; i < dim(); ++i) {
      std::vector<Expr> terms;
      for (int c = 0; c < dim(); ++c)
        if (!(*this)(i, c).is_zero() && !x[c].is_zero()) terms.push_back((*this)(i, c) * x[c]);
      r[i] = sum(std::move(terms));
    }
    return r;
  }

  /// K(d/du_c).
  VectorField column(int c) const {
    VectorField r(chart_);
    for (int i = 0; i < dim(); ++i) r[i] = (*this)(i, c);
    return r;
  }

  void set_column(int c, const VectorField& v) {
    for (int i = 0; i < dim(); ++i) (*this)(i, c) = v[i];
  }

  Eigen::MatrixXd evaluate(Evaluator& ev) const {
    Eigen::MatrixXd out(dim(), dim());
    for (int r = 0; r < dim(); ++r)
      for (int c = 0; c < dim(); ++c) out(r, c) = ev((*this)(r, c));
    return out;
  }

  Eigen::MatrixXd evaluate(const Point& p) const {
    Evaluator ev(p);
    return evaluate(ev);
  }

  /// Composition K o L.
  friend VectorForm1 operator*(const VectorForm1& k, const VectorForm1& l) {
    require_same_chart(k.chart_, l.chart_, "vector 1-form composition");
    const int d = k.dim();
    VectorForm1 r(k.chart_);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        std::vector<Expr> terms;
        for (int m = 0; m < d; ++m)
          if (!k(i, m).is_zero() && !l(m, j).is_zero()) terms.push_back(k(i, m) * l(m, j));
        r(i, j) = sum(std::move(terms));
      }
    return r;
  }

  friend VectorForm1 operator+(const VectorForm1& a, const VectorForm1& b) {
    require_same_chart(a.chart_, b.chart_, "vector 1-form sum");
    VectorForm1 r(a.chart_);
    for (std::size_t i = 0; i < a.m_.size(); ++i) r.m_[i] = a.m_[i] + b.m_[i];
    return r;
  }
  friend VectorForm1 operator-(const VectorForm1& a, const VectorForm1& b) {
    require_same_chart(a.chart_, b.chart_, "vector 1-form difference");
    VectorForm1 r(a.chart_);
    for (std::size_t i = 0; i < a.m_.size(); ++i) r.m_[i] = a.m_[i] - b.m_[i];
    return r;
  }
  friend VectorForm1 operator-(const VectorForm1& a) {
    VectorForm1 r(a.chart_);
    for (std::size_t i = 0; i < a.m_.size(); ++i) r.m_[i] = -a.m_[i];
    return r;
  }
  friend VectorForm1 operator*(const Expr& f, const VectorForm1& a) {
    VectorForm1 r(a.chart_);
    for (std::size_t i = 0; i < a.m_.size(); ++i) r.m_[i] = f * a.m_[i];
    return r;
  }

 private:
  Chart chart_;
  std::vector<Expr> m_;
};

// ---------------------------------------------------------------------------

namespace detail {

inline int pair_count(int d) { return d * (d - 1) / 2; }

/// Position of the pair (i, j), i < j, in lexicographic order.
inline int pair_position(int d, int i, int j) { return i * d - i * (i + 1) / 2 + (j - i - 1); }

}  // namespace detail

/// Vector 2-form: an alternating bilinear map into tangent vectors, stored
/// on coordinate pairs i < j.
class VectorForm2 {
 public:
  explicit VectorForm2(const Chart& chart)
      : chart_(chart),
        data_(static_cast<std::size_t>(detail::pair_count(chart.dim()) * chart.dim())) {}

  const Chart& chart() const noexcept { return chart_; }
  int dim() const noexcept { return chart_.dim(); }
  std::span<const Expr> coefficients() const noexcept { return data_; }

  /// k-th component of L(d/du_i, d/du_j).
  Expr component(int k, int i, int j) const {
    if (i == j) return Expr();
    if (i < j) return slot(i, j, k);
    return -slot(j, i, k);
  }

  VectorField value(int i, int j) const {
    VectorField v(chart_);
    for (int k = 0; k < dim(); ++k) v[k] = component(k, i, j);
    return v;
  }

  /// Sets L(d/du_i, d/du_j) = v, and thereby L(d/du_j, d/du_i) = -v.
  void set(int i, int j, const VectorField& v) {
    if (i == j) throw DegreeError("vector 2-form is alternating: L(e_i, e_i) is fixed at 0");
    for (int k = 0; k < dim(); ++k) {
      if (i < j)
        slot(i, j, k) = v[k];
      else
        slot(j, i, k) = -v[k];
    }
  }

  /// L(X, Y) at the evaluator's point.
  Eigen::VectorXd evaluate(Evaluator& ev, const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim());
    for (int i = 0; i < dim(); ++i)
      for (int j = i + 1; j < dim(); ++j) {
        const double w = x(i) * y(j) - x(j) * y(i);
        if (w == 0.0) continue;
        for (int k = 0; k < dim(); ++k) out(k) += w * ev(slot(i, j, k));
      }
    return out;
  }

  friend VectorForm2 operator+(const VectorForm2& a, const VectorForm2& b) {
    require_same_chart(a.chart_, b.chart_, "vector 2-form sum");
    VectorForm2 r(a.chart_);
    for (std::size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = a.data_[i] + b.data_[i];
    return r;
  }
  friend VectorForm2 operator-(const VectorForm2& a, const VectorForm2& b) {
    require_same_chart(a.chart_, b.chart_, "vector 2-form difference");
    VectorForm2 r(a.chart_);
    for (std::size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = a.data_[i] - b.data_[i];
    return r;
  }
  friend VectorForm2 operator*(const Expr& f, const VectorForm2& a) {
    VectorForm2 r(a.chart_);
    for (std::size_t i = 0; i < a.data_.size(); ++i) r.data_[i] = f * a.data_[i];
    return r;
  }

 private:
  Expr& slot(int i, int j, int k) {
    return data_[static_cast<std::size_t>(detail::pair_position(dim(), i, j) * dim() + k)];
  }
  const Expr& slot(int i, int j, int k) const {
    return data_[static_cast<std::size_t>(detail::pair_position(dim(), i, j) * dim() + k)];
  }

  Chart chart_;
  std::vector<Expr> data_;
};

/// K o L for a vector 1-form K and a vector 2-form L.
inline VectorForm2 compose(const VectorForm1& k, const VectorForm2& l) {
  require_same_chart(k.chart(), l.chart(), "compose");
  VectorForm2 r(l.chart());
  for (int i = 0; i < l.dim(); ++i)
    for (int j = i + 1; j < l.dim(); ++j) r.set(i, j, k(l.value(i, j)));
  return r;
}

// ---------------------------------------------------------------------------

/// Scalar p-form, p in {0, 1, 2, 3}. Only strictly increasing index tuples
/// are stored, so antisymmetry holds by construction.
class ScalarPForm {
 public:
  static constexpr int kMaxDegree = 3;
  using MultiIndex = std::array<int, kMaxDegree>;

  ScalarPForm(const Chart& chart, int degree) : chart_(chart), degree_(degree) {
    if (degree < 0 || degree > kMaxDegree)
      throw DegreeError("scalar forms of degree " + std::to_string(degree) + " are not supported");
    build_indices();
    c_.resize(indices_.size());
  }

  static ScalarPForm function(const Chart& chart, const Expr& f) {
    require_in_chart(f, chart, "0-form");
    ScalarPForm w(chart, 0);
    w.c_[0] = f;
    return w;
  }

  /// df for a function f.
  static ScalarPForm differential(const Chart& chart, const Expr& f) {
    ScalarPForm w(chart, 1);
    for (int k = 0; k < chart.dim(); ++k) w.c_[static_cast<std::size_t>(k)] = diff(f, k);
    return w;
  }

  const Chart& chart() const noexcept { return chart_; }
  int dim() const noexcept { return chart_.dim(); }
  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return c_.size(); }
  std::span<const Expr> coefficients() const noexcept { return c_; }
  const std::vector<MultiIndex>& multi_indices() const noexcept { return indices_; }

  const Expr& at(std::size_t pos) const { return c_[pos]; }
  Expr& at(std::size_t pos) { return c_[pos]; }

  /// The 0-form's value.
  const Expr& scalar() const {
    if (degree_ != 0) throw DegreeError("scalar() requires a 0-form");
    return c_[0];
  }

  /// omega(d/du_{i1}, ..., d/du_{ip}) for any index order.
  Expr coeff(std::span<const int> idx) const {
    auto [pos, sign] = locate(idx);
    if (pos < 0) return Expr();
    const Expr& e = c_[static_cast<std::size_t>(pos)];
    return sign > 0 ? e : -e;
  }
  Expr coeff(std::initializer_list<int> idx) const {
    return coeff(std::span<const int>(idx.begin(), idx.size()));
  }

  /// Sets omega(d/du_{i1}, ..., d/du_{ip}) = value, sign-adjusting to the
  /// stored increasing order.
  void set(std::span<const int> idx, const Expr& value) {
    require_in_chart(value, chart_, "scalar form");
    auto [pos, sign] = locate(idx);
    if (pos < 0) throw DegreeError("alternating form: repeated index");
    c_[static_cast<std::size_t>(pos)] = sign > 0 ? value : -value;
  }
  void set(std::initializer_list<int> idx, const Expr& value) {
    set(std::span<const int>(idx.begin(), idx.size()), value);
  }
  void add(std::initializer_list<int> idx, const Expr& value) {
    set(idx, coeff(idx) + value);
  }

  /// omega(v_1, ..., v_p) at the evaluator's point.
  double evaluate(Evaluator& ev, std::span<const Eigen::VectorXd> args) const {
    if (static_cast<int>(args.size()) != degree_)
      throw DegreeError("a " + std::to_string(degree_) + "-form needs " + std::to_string(degree_) +
                        " arguments");
    double total = 0.0;
    for (std::size_t pos = 0; pos < indices_.size(); ++pos) {
      if (c_[pos].is_zero()) continue;
      const auto& ix = indices_[pos];
      double det = 1.0;
      switch (degree_) {
        case 0:
          det = 1.0;
          break;
        case 1:
          det = args[0](ix[0]);
          break;
        case 2:
          det = args[0](ix[0]) * args[1](ix[1]) - args[0](ix[1]) * args[1](ix[0]);
          break;
        case 3: {
          Eigen::Matrix3d m;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) m(a, b) = args[static_cast<std::size_t>(b)](ix[static_cast<std::size_t>(a)]);
          det = m.determinant();
          break;
        }
      }
      if (det != 0.0) total += det * ev(c_[pos]);
    }
    return total;
  }

  double evaluate(const Point& p, std::span<const Eigen::VectorXd> args) const {
    Evaluator ev(p);
    return evaluate(ev, args);
  }

  /// Skew matrix W_ij = omega(d/du_i, d/du_j) of a 2-form.
  Eigen::MatrixXd matrix(Evaluator& ev) const {
    if (degree_ != 2) throw DegreeError("matrix() requires a 2-form");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim(), dim());
    for (std::size_t pos = 0; pos < indices_.size(); ++pos) {
      const double v = ev(c_[pos]);
      w(indices_[pos][0], indices_[pos][1]) = v;
      w(indices_[pos][1], indices_[pos][0]) = -v;
    }
    return w;
  }

  /// Components omega_k of a 1-form.
  Eigen::VectorXd covector(Evaluator& ev) const {
    if (degree_ != 1) throw DegreeError("covector() requires a 1-form");
    Eigen::VectorXd v(dim());
    for (int k = 0; k < dim(); ++k) v(k) = ev(c_[static_cast<std::size_t>(k)]);
    return v;
  }

  friend ScalarPForm operator+(const ScalarPForm& a, const ScalarPForm& b) {
    a.require_compatible(b, "scalar form sum");
    ScalarPForm r(a.chart_, a.degree_);
    for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = a.c_[i] + b.c_[i];
    return r;
  }
  friend ScalarPForm operator-(const ScalarPForm& a, const ScalarPForm& b) {
    a.require_compatible(b, "scalar form difference");
    ScalarPForm r(a.chart_, a.degree_);
    for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = a.c_[i] - b.c_[i];
    return r;
  }
  friend ScalarPForm operator*(const Expr& f, const ScalarPForm& a) {
    ScalarPForm r(a.chart_, a.degree_);
    for (std::size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = f * a.c_[i];
    return r;
  }

 private:
  void require_compatible(const ScalarPForm& b, const char* what) const {
    require_same_chart(chart_, b.chart_, what);
    if (degree_ != b.degree_) throw DegreeError(std::string(what) + ": degrees differ");
  }

  void build_indices() {
    const int d = dim();
    stride_ = 1;
    for (int k = 0; k < degree_; ++k) stride_ *= d;
    position_.assign(static_cast<std::size_t>(stride_), -1);
    MultiIndex ix{0, 0, 0};
    auto emit = [&] {
      int key = 0;
      for (int k = 0; k < degree_; ++k) key = key * d + ix[static_cast<std::size_t>(k)];
      position_[static_cast<std::size_t>(key)] = static_cast<int>(indices_.size());
      indices_.push_back(ix);
    };
    if (degree_ == 0) {
      indices_.push_back(ix);
      position_[0] = 0;
      return;
    }
    for (int a = 0; a < d; ++a) {
      ix[0] = a;
      if (degree_ == 1) {
        emit();
        continue;
      }
      for (int b = a + 1; b < d; ++b) {
        ix[1] = b;
        if (degree_ == 2) {
          emit();
          continue;
        }
        for (int c = b + 1; c < d; ++c) {
          ix[2] = c;
          emit();
        }
      }
    }
  }

  /// (position, sign) of an index tuple; position -1 when an index repeats.
  std::pair<int, int> locate(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != degree_)
      throw DegreeError("index tuple length does not match form degree");
    MultiIndex s{0, 0, 0};
    for (int k = 0; k < degree_; ++k) {
      const int v = idx[static_cast<std::size_t>(k)];
      if (v < 0 || v >= dim()) throw ChartMismatch("form index outside chart");
      s[static_cast<std::size_t>(k)] = v;
    }
    int sign = 1;
    for (int a = 0; a < degree_; ++a)
      for (int b = 0; b + 1 < degree_ - a; ++b)
        if (s[static_cast<std::size_t>(b)] > s[static_cast<std::size_t>(b + 1)]) {
          std::swap(s[static_cast<std::size_t>(b)], s[static_cast<std::size_t>(b + 1)]);
          sign = -sign;
        }
    for (int k = 0; k + 1 < degree_; ++k)
      if (s[static_cast<std::size_t>(k)] == s[static_cast<std::size_t>(k + 1)]) return {-1, 0};
    int key = 0;
    for (int k = 0; k < degree_; ++k) key = key * dim() + s[static_cast<std::size_t>(k)];
    return {position_[static_cast<std::size_t>(key)], sign};
  }

  Chart chart_;
  int degree_;
  std::vector<MultiIndex> indices_;
  std::vector<int> position_;
  int stride_ = 1;
  std::vector<Expr> c_;
};

// ---------------------------------------------------------------------------

/// Tangent-valued l-form, l in {0, 1, 2}, for the degree-dispatched API.
using VectorLForm = std::variant<VectorField, VectorForm1, VectorForm2>;

inline int degree(const VectorLForm& f) { return static_cast<int>(f.index()); }

inline const Chart& chart_of(const VectorLForm& f) {
  return std::visit([](const auto& v) -> const Chart& { return v.chart(); }, f);
}

}  // namespace t2m
