#pragma once
// Scalar expressions over the 3n chart coordinates of T2M.
//
// Expressions are immutable DAG nodes, hash-consed into a process-lifetime
// arena: two structurally identical expressions are the same node, so
// identity comparison is O(1) and evaluation caches are shared between
// independently built objects. Differentiation is exact and symbolic, with
// one memoized derivative per (node, variable).
//
// Besides the usual arithmetic primitives there is a `Solve` node: component k
// of x(p) = A(p)^{-1} b(p) for an expression matrix A and right-hand side b.
// Its derivative is again a solve against the same matrix,
//     dx = A^{-1} (db - (dA) x),
// so quantities defined by pointwise linear solves stay differentiable to any
// order without finite differences.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "t2m/errors.hpp"

namespace t2m {

enum class Op : std::uint8_t { Const, Coord, Add, Mul, Pow, Recip, Sqrt, Exp, Solve };

namespace detail {
struct Node;
struct SystemMatrix;
struct LinearSystem;
class Arena;
}  // namespace detail

class Expr {
 public:
  /// The constant 0.
  Expr() noexcept;
  Expr(double c);  // NOLINT(google-explicit-constructor)

  Op op() const noexcept;
  /// Constant value, or the exponent of a `Pow` node.
  double value() const noexcept;
  /// Coordinate index of a `Coord` node, component of a `Solve` node.
  int index() const noexcept;
  std::span<const Expr> args() const noexcept;
  const detail::LinearSystem* system() const noexcept;
  /// Largest coordinate index referenced, -1 for constants.
  int max_coord() const noexcept;
  std::uint64_t id() const noexcept;

  bool is_constant() const noexcept { return op() == Op::Const; }
  bool is_constant(double c) const noexcept { return is_constant() && value() == c; }
  bool is_zero() const noexcept { return is_constant(0.0); }

  const detail::Node* node() const noexcept { return n_; }

  friend bool operator==(const Expr& a, const Expr& b) noexcept { return a.n_ == b.n_; }

 private:
  explicit Expr(const detail::Node* n) noexcept : n_(n) {}
  const detail::Node* n_;

  friend class detail::Arena;
};

namespace detail {

struct Node {
  Op op;
  double value;
  int index;
  std::vector<Expr> args;
  const LinearSystem* system;
  int max_coord;
  std::uint64_t id;
  // Memoized partial derivatives; guarded by the arena mutex.
  mutable std::vector<std::pair<int, Expr>> derivs;
};

struct SystemMatrix {
  int m;
  std::vector<Expr> a;  // row-major m x m
  int max_coord;
  std::uint64_t id;

  const Expr& at(int r, int c) const { return a[static_cast<std::size_t>(r * m + c)]; }
};

struct LinearSystem {
  const SystemMatrix* matrix;
  std::vector<Expr> rhs;
  int max_coord;
  std::uint64_t id;
  // Derived systems d/dx_j; nullptr entry means the derivative vanishes.
  mutable std::vector<std::pair<int, const LinearSystem*>> derivs;
};

inline std::size_t hash_mix(std::size_t h, std::size_t v) noexcept {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

struct NodeHash {
  std::size_t operator()(const Node* n) const noexcept {
    std::size_t h = static_cast<std::size_t>(n->op);
    h = hash_mix(h, std::bit_cast<std::uint64_t>(n->value));
    h = hash_mix(h, static_cast<std::size_t>(n->index));
    h = hash_mix(h, reinterpret_cast<std::size_t>(n->system));
    for (const auto& a : n->args) h = hash_mix(h, reinterpret_cast<std::size_t>(a.node()));
    return h;
  }
};

struct NodeEq {
  bool operator()(const Node* a, const Node* b) const noexcept {
    return a->op == b->op &&
           std::bit_cast<std::uint64_t>(a->value) == std::bit_cast<std::uint64_t>(b->value) &&
           a->index == b->index && a->system == b->system && a->args == b->args;
  }
};

struct ExprVecHash {
  std::size_t operator()(const std::vector<Expr>& v) const noexcept {
    std::size_t h = v.size();
    for (const auto& e : v) h = hash_mix(h, reinterpret_cast<std::size_t>(e.node()));
    return h;
  }
};

struct SystemKey {
  const SystemMatrix* matrix;
  std::vector<Expr> rhs;
  bool operator==(const SystemKey&) const = default;
};

struct SystemKeyHash {
  std::size_t operator()(const SystemKey& k) const noexcept {
    return hash_mix(ExprVecHash{}(k.rhs), reinterpret_cast<std::size_t>(k.matrix));
  }
};

/// Owner of every expression node. Nodes are never freed.
class Arena {
 public:
  static Arena& instance() {
    static Arena arena;
    return arena;
  }

  Expr intern(Op op, double value, int index, std::vector<Expr> args,
              const LinearSystem* system = nullptr) {
    int mc = -1;
    if (op == Op::Coord) mc = index;
    for (const auto& a : args) mc = std::max(mc, a.max_coord());
    if (system != nullptr) mc = std::max(mc, system->max_coord);
    Node probe{op, value, index, std::move(args), system, mc, 0, {}};
    std::lock_guard lock(mutex_);
    if (auto it = nodes_.find(&probe); it != nodes_.end()) return Expr(*it);
    probe.id = next_id_++;
    storage_.push_back(std::move(probe));
    const Node* n = &storage_.back();
    nodes_.insert(n);
    return Expr(n);
  }

  const SystemMatrix* intern_matrix(int m, std::vector<Expr> a) {
    std::lock_guard lock(mutex_);
    if (auto it = matrices_.find(a); it != matrices_.end()) return it->second;
    int mc = -1;
    for (const auto& e : a) mc = std::max(mc, e.max_coord());
    matrix_storage_.push_back(SystemMatrix{m, a, mc, next_id_++});
    const SystemMatrix* p = &matrix_storage_.back();
    matrices_.emplace(std::move(a), p);
    return p;
  }

  const LinearSystem* intern_system(const SystemMatrix* matrix, std::vector<Expr> rhs) {
    SystemKey key{matrix, std::move(rhs)};
    std::lock_guard lock(mutex_);
    if (auto it = systems_.find(key); it != systems_.end()) return it->second;
    int mc = matrix->max_coord;
    for (const auto& e : key.rhs) mc = std::max(mc, e.max_coord());
    system_storage_.push_back(LinearSystem{matrix, key.rhs, mc, next_id_++, {}});
    const LinearSystem* p = &system_storage_.back();
    systems_.emplace(std::move(key), p);
    return p;
  }

  std::mutex& mutex() { return mutex_; }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return storage_.size();
  }

 private:
  Arena() = default;

  mutable std::mutex mutex_;
  std::deque<Node> storage_;
  std::unordered_set<const Node*, NodeHash, NodeEq> nodes_;
  std::deque<SystemMatrix> matrix_storage_;
  std::unordered_map<std::vector<Expr>, const SystemMatrix*, ExprVecHash> matrices_;
  std::deque<LinearSystem> system_storage_;
  std::unordered_map<SystemKey, const LinearSystem*, SystemKeyHash> systems_;
  std::uint64_t next_id_ = 1;
};

inline Expr make_const(double c) {
  if (std::isnan(c)) throw DomainError("NaN constant");
  if (c == 0.0) c = 0.0;  // fold -0.0
  return Arena::instance().intern(Op::Const, c, 0, {});
}

}  // namespace detail

inline Expr::Expr() noexcept : n_(nullptr) {
  static const detail::Node* const zero = detail::make_const(0.0).node();
  n_ = zero;
}
inline Expr::Expr(double c) : n_(detail::make_const(c).node()) {}
inline Op Expr::op() const noexcept { return n_->op; }
inline double Expr::value() const noexcept { return n_->value; }
inline int Expr::index() const noexcept { return n_->index; }
inline std::span<const Expr> Expr::args() const noexcept { return n_->args; }
inline const detail::LinearSystem* Expr::system() const noexcept { return n_->system; }
inline int Expr::max_coord() const noexcept { return n_->max_coord; }
inline std::uint64_t Expr::id() const noexcept { return n_->id; }

// ---------------------------------------------------------------------------
// Raw construction: no simplification. Used by the JSON loader so that a
// document's structure survives a load/save cycle unchanged.
namespace raw {

inline Expr constant(double c) {
  if (std::isnan(c)) throw DomainError("NaN constant");
  return detail::Arena::instance().intern(Op::Const, c, 0, {});
}

inline Expr coord(int k) {
  if (k < 0) throw ChartMismatch("negative coordinate index");
  return detail::Arena::instance().intern(Op::Coord, 0.0, k, {});
}

inline Expr make(Op op, std::vector<Expr> args, double value = 0.0) {
  switch (op) {
    case Op::Add:
    case Op::Mul:
      if (args.empty()) throw DegreeError("add/mul need at least one argument");
      break;
    case Op::Pow:
    case Op::Recip:
    case Op::Sqrt:
    case Op::Exp:
      if (args.size() != 1) throw DegreeError("unary primitive needs exactly one argument");
      break;
    default:
      throw DegreeError("raw::make only builds compound nodes");
  }
  if (op != Op::Pow) value = 0.0;
  return detail::Arena::instance().intern(op, value, 0, std::move(args));
}

inline Expr solve_component(int m, std::vector<Expr> matrix, std::vector<Expr> rhs, int k) {
  if (m <= 0 || matrix.size() != static_cast<std::size_t>(m * m) ||
      rhs.size() != static_cast<std::size_t>(m) || k < 0 || k >= m)
    throw DegreeError("malformed linear system");
  auto& arena = detail::Arena::instance();
  const auto* mat = arena.intern_matrix(m, std::move(matrix));
  const auto* sys = arena.intern_system(mat, std::move(rhs));
  return arena.intern(Op::Solve, 0.0, k, {}, sys);
}

}  // namespace raw

// ---------------------------------------------------------------------------
// Simplifying builders.

inline Expr coord(int k) { return raw::coord(k); }

inline Expr product(std::vector<Expr> factors);

namespace detail {

/// Total structural order on interned nodes. Equal structure means equal
/// pointer, so the recursion only follows the first differing argument.
inline bool structural_less(const Expr& a, const Expr& b) {
  if (a == b) return false;
  if (a.op() != b.op()) return a.op() < b.op();
  if (a.max_coord() != b.max_coord()) return a.max_coord() < b.max_coord();
  if (a.value() != b.value()) return a.value() < b.value();
  if (a.index() != b.index()) return a.index() < b.index();
  if (a.op() == Op::Solve) return a.system()->id < b.system()->id;
  const auto x = a.args(), y = b.args();
  if (x.size() != y.size()) return x.size() < y.size();
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) return structural_less(x[i], y[i]);
  return false;
}

inline void canonical_order(std::vector<Expr>& v) {
  std::sort(v.begin(), v.end(), structural_less);
}

}  // namespace detail

inline Expr sum(std::vector<Expr> terms) {
  double constant = 0.0;
  std::vector<std::pair<Expr, double>> collected;  // (base, coefficient), first-seen order
  std::unordered_map<const detail::Node*, std::size_t> where;

  auto add_term = [&](const Expr& base, double coef) {
    auto [it, fresh] = where.emplace(base.node(), collected.size());
    if (fresh)
      collected.emplace_back(base, coef);
    else
      collected[it->second].second += coef;
  };
  // Scaled sums are distributed so that a - a cancels for sums a.
  std::function<void(const Expr&, double)> visit = [&](const Expr& t, double scale) {
    switch (t.op()) {
      case Op::Const:
        constant += scale * t.value();
        return;
      case Op::Add:
        for (const auto& a : t.args()) visit(a, scale);
        return;
      case Op::Mul:
        if (t.args().front().is_constant()) {
          const double c = t.args().front().value();
          auto rest = t.args().subspan(1);
          if (rest.size() == 1) {
            visit(rest.front(), scale * c);
            return;
          }
          Expr base = detail::Arena::instance().intern(Op::Mul, 0.0, 0,
                                                       std::vector<Expr>(rest.begin(), rest.end()));
          add_term(base, scale * c);
          return;
        }
        add_term(t, scale);
        return;
      default:
        add_term(t, scale);
    }
  };
  for (const auto& t : terms) visit(t, 1.0);

  std::vector<Expr> out;
  for (const auto& [base, coef] : collected) {
    if (coef == 0.0) continue;
    out.push_back(coef == 1.0 ? base : product({Expr(coef), base}));
  }
  detail::canonical_order(out);
  if (constant != 0.0) out.push_back(Expr(constant));
  if (out.empty()) return Expr();
  if (out.size() == 1) return out.front();
  return detail::Arena::instance().intern(Op::Add, 0.0, 0, std::move(out));
}

inline bool is_integral(double v) { return std::isfinite(v) && std::floor(v) == v; }

inline Expr pow(const Expr& base, double exponent);

inline Expr product(std::vector<Expr> factors) {
  double coef = 1.0;
  std::vector<std::pair<Expr, double>> collected;  // (base, integral power)
  std::unordered_map<const detail::Node*, std::size_t> where;
  std::vector<Expr> others;  // non-integral powers, kept as they are

  std::function<void(const Expr&)> visit = [&](const Expr& f) {
    switch (f.op()) {
      case Op::Const:
        coef *= f.value();
        return;
      case Op::Mul:
        for (const auto& a : f.args()) visit(a);
        return;
      case Op::Pow:
        if (!is_integral(f.value())) {
          others.push_back(f);
          return;
        }
        [[fallthrough]];
      default: {
        Expr base = f.op() == Op::Pow ? f.args().front() : f;
        double p = f.op() == Op::Pow ? f.value() : 1.0;
        auto [it, fresh] = where.emplace(base.node(), collected.size());
        if (fresh)
          collected.emplace_back(base, p);
        else
          collected[it->second].second += p;
      }
    }
  };
  for (const auto& f : factors) visit(f);
  if (coef == 0.0) return Expr();

  std::vector<Expr> out;
  for (const auto& [base, p] : collected) {
    if (p == 0.0) continue;
    out.push_back(p == 1.0 ? base
                           : detail::Arena::instance().intern(Op::Pow, p, 0, {base}));
  }
  for (const auto& o : others) out.push_back(o);
  detail::canonical_order(out);
  if (coef != 1.0) out.insert(out.begin(), Expr(coef));
  if (out.empty()) return Expr(coef);
  if (out.size() == 1) return out.front();
  return detail::Arena::instance().intern(Op::Mul, 0.0, 0, std::move(out));
}

inline Expr pow(const Expr& base, double exponent) {
  if (exponent == 0.0) return Expr(1.0);
  if (exponent == 1.0) return base;
  if (base.is_constant()) {
    const double b = base.value();
    const bool bad = (b < 0.0 && !is_integral(exponent)) || (b == 0.0 && exponent < 0.0);
    if (!bad) return Expr(std::pow(b, exponent));
  }
  if (base.op() == Op::Pow && is_integral(base.value()) && is_integral(exponent))
    return pow(base.args().front(), base.value() * exponent);
  if (base.op() == Op::Mul && is_integral(exponent)) {
    std::vector<Expr> fs;
    for (const auto& f : base.args()) fs.push_back(pow(f, exponent));
    return product(std::move(fs));
  }
  return detail::Arena::instance().intern(Op::Pow, exponent, 0, {base});
}

inline Expr recip(const Expr& e) { return pow(e, -1.0); }

inline Expr sqrt(const Expr& e) {
  if (e.is_constant() && e.value() >= 0.0) return Expr(std::sqrt(e.value()));
  return detail::Arena::instance().intern(Op::Sqrt, 0.0, 0, {e});
}

inline Expr exp(const Expr& e) {
  if (e.is_constant()) return Expr(std::exp(e.value()));
  return detail::Arena::instance().intern(Op::Exp, 0.0, 0, {e});
}

inline Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return sum({a, b});
}
inline Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr();
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  return product({a, b});
}
inline Expr operator-(const Expr& a) { return a.is_zero() ? a : product({Expr(-1.0), a}); }
inline Expr operator-(const Expr& a, const Expr& b) { return b.is_zero() ? a : a + (-b); }
inline Expr operator/(const Expr& a, const Expr& b) { return a * recip(b); }
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

/// Solution of the m x m system `matrix * x = rhs` as m expressions.
inline std::vector<Expr> solve(int m, std::vector<Expr> matrix, std::vector<Expr> rhs) {
  if (matrix.size() != static_cast<std::size_t>(m * m) || rhs.size() != static_cast<std::size_t>(m))
    throw DegreeError("solve: matrix/rhs size mismatch");
  if (std::all_of(rhs.begin(), rhs.end(), [](const Expr& e) { return e.is_zero(); }))
    return std::vector<Expr>(static_cast<std::size_t>(m));
  if (m == 1) return {rhs[0] / matrix[0]};
  std::vector<Expr> out;
  out.reserve(static_cast<std::size_t>(m));
  auto& arena = detail::Arena::instance();
  const auto* mat = arena.intern_matrix(m, std::move(matrix));
  const auto* sys = arena.intern_system(mat, std::move(rhs));
  for (int k = 0; k < m; ++k) out.push_back(arena.intern(Op::Solve, 0.0, k, {}, sys));
  return out;
}

// ---------------------------------------------------------------------------
// Differentiation.

inline Expr diff(const Expr& e, int var);

namespace detail {

template <class Cache, class Value>
bool cache_lookup(const Cache& cache, int var, Value& out) {
  std::lock_guard lock(Arena::instance().mutex());
  for (const auto& [v, d] : cache)
    if (v == var) {
      out = d;
      return true;
    }
  return false;
}

template <class Cache, class Value>
void cache_store(Cache& cache, int var, const Value& d) {
  std::lock_guard lock(Arena::instance().mutex());
  for (const auto& entry : cache)
    if (entry.first == var) return;
  cache.emplace_back(var, d);
}

inline const LinearSystem* diff_system(const LinearSystem* sys, int var) {
  const LinearSystem* cached = nullptr;
  if (cache_lookup(sys->derivs, var, cached)) return cached;
  const SystemMatrix* mat = sys->matrix;
  const int m = mat->m;
  std::vector<Expr> x;
  x.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) x.push_back(Arena::instance().intern(Op::Solve, 0.0, k, {}, sys));
  std::vector<Expr> rhs;
  bool all_zero = true;
  for (int i = 0; i < m; ++i) {
    std::vector<Expr> terms{diff(sys->rhs[static_cast<std::size_t>(i)], var)};
    for (int k = 0; k < m; ++k) {
      Expr da = diff(mat->at(i, k), var);
      if (!da.is_zero()) terms.push_back(-(da * x[static_cast<std::size_t>(k)]));
    }
    Expr r = sum(std::move(terms));
    all_zero = all_zero && r.is_zero();
    rhs.push_back(r);
  }
  const LinearSystem* out = all_zero ? nullptr : Arena::instance().intern_system(mat, std::move(rhs));
  cache_store(sys->derivs, var, out);
  return out;
}

inline Expr diff_uncached(const Expr& e, int var) {
  switch (e.op()) {
    case Op::Const:
      return Expr();
    case Op::Coord:
      return Expr(e.index() == var ? 1.0 : 0.0);
    case Op::Add: {
      std::vector<Expr> terms;
      for (const auto& a : e.args()) terms.push_back(diff(a, var));
      return sum(std::move(terms));
    }
    case Op::Mul: {
      auto args = e.args();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < args.size(); ++i) {
        Expr d = diff(args[i], var);
        if (d.is_zero()) continue;
        std::vector<Expr> fs{d};
        for (std::size_t j = 0; j < args.size(); ++j)
          if (j != i) fs.push_back(args[j]);
        terms.push_back(product(std::move(fs)));
      }
      return sum(std::move(terms));
    }
    case Op::Pow: {
      const Expr& b = e.args().front();
      Expr db = diff(b, var);
      if (db.is_zero()) return Expr();
      return product({Expr(e.value()), pow(b, e.value() - 1.0), db});
    }
    case Op::Recip: {
      const Expr& b = e.args().front();
      Expr db = diff(b, var);
      if (db.is_zero()) return Expr();
      return product({Expr(-1.0), e, e, db});
    }
    case Op::Sqrt: {
      const Expr& b = e.args().front();
      Expr db = diff(b, var);
      if (db.is_zero()) return Expr();
      return product({Expr(0.5), db, recip(e)});
    }
    case Op::Exp: {
      Expr db = diff(e.args().front(), var);
      if (db.is_zero()) return Expr();
      return e * db;
    }
    case Op::Solve: {
      const LinearSystem* d = diff_system(e.system(), var);
      if (d == nullptr) return Expr();
      return Arena::instance().intern(Op::Solve, 0.0, e.index(), {}, d);
    }
  }
  return Expr();
}

}  // namespace detail

/// Exact partial derivative with respect to chart coordinate `var`.
inline Expr diff(const Expr& e, int var) {
  // max_coord bounds every coordinate the expression (or its system) depends on
  if (e.max_coord() < var) return Expr();
  Expr cached;
  if (detail::cache_lookup(e.node()->derivs, var, cached)) return cached;
  Expr d = detail::diff_uncached(e, var);
  detail::cache_store(e.node()->derivs, var, d);
  return d;
}

// ---------------------------------------------------------------------------
// Numeric evaluation.

/// Evaluates expressions at one fixed point, sharing a value cache across
/// calls. Not thread-safe; use one evaluator per thread.
class Evaluator {
 public:
  explicit Evaluator(std::span<const double> point) : point_(point.begin(), point.end()) {}
  explicit Evaluator(const Eigen::VectorXd& point)
      : point_(point.data(), point.data() + point.size()) {}

  double operator()(const Expr& e) { return eval(e); }

  std::span<const double> point() const noexcept { return point_; }

 private:
  double eval(const Expr& e) {
    switch (e.op()) {
      case Op::Const:
        return e.value();
      case Op::Coord:
        if (static_cast<std::size_t>(e.index()) >= point_.size())
          throw ChartMismatch("coordinate index " + std::to_string(e.index()) +
                              " outside a point of dimension " + std::to_string(point_.size()));
        return point_[static_cast<std::size_t>(e.index())];
      default:
        break;
    }
    if (auto it = values_.find(e.node()); it != values_.end()) return it->second;
    double v = 0.0;
    switch (e.op()) {
      case Op::Add:
        for (const auto& a : e.args()) v += eval(a);
        break;
      case Op::Mul:
        v = 1.0;
        for (const auto& a : e.args()) v *= eval(a);
        break;
      case Op::Pow: {
        const double b = eval(e.args().front());
        const double p = e.value();
        if (b < 0.0 && !is_integral(p)) throw DomainError("pow: negative base with fractional exponent");
        if (b == 0.0 && p < 0.0) throw DomainError("pow: zero base with negative exponent");
        v = std::pow(b, p);
        break;
      }
      case Op::Recip: {
        const double b = eval(e.args().front());
        if (b == 0.0) throw DomainError("reciprocal of zero");
        v = 1.0 / b;
        break;
      }
      case Op::Sqrt: {
        const double b = eval(e.args().front());
        if (b < 0.0) throw DomainError("sqrt of a negative number");
        v = std::sqrt(b);
        break;
      }
      case Op::Exp:
        v = std::exp(eval(e.args().front()));
        break;
      case Op::Solve:
        v = solution(e.system())(e.index());
        break;
      default:
        break;
    }
    if (!std::isfinite(v)) throw DomainError("non-finite value during evaluation");
    values_.emplace(e.node(), v);
    return v;
  }

  const Eigen::VectorXd& solution(const detail::LinearSystem* sys) {
    if (auto it = solutions_.find(sys); it != solutions_.end()) return it->second;
    const auto& lu = factor(sys->matrix);
    Eigen::VectorXd b(sys->matrix->m);
    for (int i = 0; i < sys->matrix->m; ++i) b(i) = eval(sys->rhs[static_cast<std::size_t>(i)]);
    return solutions_.emplace(sys, lu.solve(b)).first->second;
  }

  const Eigen::FullPivLU<Eigen::MatrixXd>& factor(const detail::SystemMatrix* mat) {
    if (auto it = factors_.find(mat); it != factors_.end()) return it->second;
    Eigen::MatrixXd a(mat->m, mat->m);
    for (int r = 0; r < mat->m; ++r)
      for (int c = 0; c < mat->m; ++c) a(r, c) = eval(mat->at(r, c));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) throw DomainError("singular linear system");
    return factors_.emplace(mat, std::move(lu)).first->second;
  }

  std::vector<double> point_;
  std::unordered_map<const detail::Node*, double> values_;
  std::unordered_map<const detail::LinearSystem*, Eigen::VectorXd> solutions_;
  std::unordered_map<const detail::SystemMatrix*, Eigen::FullPivLU<Eigen::MatrixXd>> factors_;
};

inline double evaluate(const Expr& e, std::span<const double> point) {
  Evaluator ev(point);
  return ev(e);
}

// ---------------------------------------------------------------------------
// Printing.

/// Infix rendering; coordinates are labelled x1..xn, y1..yn, z1..zn for a
/// chart over an n-dimensional base.
inline std::string to_string(const Expr& e, int n) {
  auto label = [n](int k) {
    const char block = "xyz"[std::min(k / std::max(n, 1), 2)];
    return std::string(1, block) + std::to_string(k % std::max(n, 1) + 1);
  };
  std::function<std::string(const Expr&)> rec = [&](const Expr& x) -> std::string {
    std::ostringstream os;
    switch (x.op()) {
      case Op::Const:
        os << x.value();
        break;
      case Op::Coord:
        os << label(x.index());
        break;
      case Op::Add:
      case Op::Mul: {
        os << '(';
        const char* sep = x.op() == Op::Add ? " + " : "*";
        bool first = true;
        for (const auto& a : x.args()) {
          if (!first) os << sep;
          os << rec(a);
          first = false;
        }
        os << ')';
        break;
      }
      case Op::Pow:
        os << rec(x.args().front()) << '^' << x.value();
        break;
      case Op::Recip:
        os << "1/" << rec(x.args().front());
        break;
      case Op::Sqrt:
        os << "sqrt(" << rec(x.args().front()) << ')';
        break;
      case Op::Exp:
        os << "exp(" << rec(x.args().front()) << ')';
        break;
      case Op::Solve:
        os << "solve#" << x.system()->id << '[' << x.index() << ']';
        break;
    }
    return os.str();
  };
  return rec(e);
}

}  // namespace t2m
