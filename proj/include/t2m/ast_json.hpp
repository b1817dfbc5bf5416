#pragma once
// JSON documents for expressions, semi-sprays, nonlinear connections, linear
// connections and 2-forms. Loading keeps the node structure as written, so
// save(load(doc)) reproduces doc and load(save(e)) returns the same node.

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "t2m/finsler.hpp"
#include "t2m/linear_connections.hpp"

namespace t2m {

using Json = nlohmann::ordered_json;

namespace detail {

/// Appends one reference token to a JSON pointer, escaping '~' and '/'.
inline std::string ptr_join(const std::string& base, const std::string& token) {
  std::string out = base + "/";
  for (char ch : token) {
    if (ch == '~') out += "~0";
    else if (ch == '/') out += "~1";
    else out += ch;
  }
  return out;
}

inline std::string ptr_join(const std::string& base, std::size_t k) { return base + "/" + std::to_string(k); }

[[noreturn]] inline void schema_fail(const std::string& ptr, const std::string& what) {
  throw SchemaError(ptr.empty() ? "/" : ptr, what);
}

inline const Json& member(const Json& j, const std::string& key, const std::string& ptr) {
  if (!j.is_object()) schema_fail(ptr, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) schema_fail(ptr, "missing key \"" + key + "\"");
  return *it;
}

inline void only_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& ptr) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) schema_fail(ptr_join(ptr, it.key()), "unexpected key \"" + it.key() + "\"");
  }
}

inline double number(const Json& j, const std::string& ptr) {
  if (!j.is_number()) schema_fail(ptr, "expected a number");
  return j.get<double>();
}

inline long long integer(const Json& j, const std::string& ptr) {
  if (!j.is_number_integer()) schema_fail(ptr, "expected an integer");
  return j.get<long long>();
}

inline const std::string& string_value(const Json& j, const std::string& ptr) {
  if (!j.is_string()) schema_fail(ptr, "expected a string");
  return j.get_ref<const std::string&>();
}

inline const Json& array_of(const Json& j, std::size_t size, const std::string& ptr) {
  if (!j.is_array()) schema_fail(ptr, "expected an array");
  if (size != 0 && j.size() != size)
    schema_fail(ptr, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
  return j;
}

inline const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Coord: return "coord";
    case Op::Add: return "add";
    case Op::Mul: return "mul";
    case Op::Pow: return "pow";
    case Op::Recip: return "recip";
    case Op::Sqrt: return "sqrt";
    case Op::Exp: return "exp";
    case Op::Solve: return "solve";
  }
  return "?";
}

inline Json coord_index(const Chart& c, int k) {
  Json idx;
  idx["block"] = std::string(1, "xyz"[k / c.n()]);
  idx["i"] = k % c.n() + 1;
  return idx;
}

/// Parses a label such as "y2" into a coordinate index.
inline int parse_label(const Chart& c, const std::string& s, const std::string& ptr) {
  if (s.size() < 2 || (s[0] != 'x' && s[0] != 'y' && s[0] != 'z')) schema_fail(ptr, "bad coordinate label \"" + s + "\"");
  int i = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k] < '0' || s[k] > '9' || i > 1000000) schema_fail(ptr, "bad coordinate label \"" + s + "\"");
    i = 10 * i + (s[k] - '0');
  }
  if (i < 1 || i > c.n()) schema_fail(ptr, "coordinate label \"" + s + "\" outside a chart with n=" + std::to_string(c.n()));
  const int block = s[0] == 'x' ? 0 : (s[0] == 'y' ? 1 : 2);
  return block * c.n() + i - 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Expressions.

inline Json expr_to_json(const Expr& e, const Chart& c) {
  Json j;
  j["op"] = detail::op_name(e.op());
  switch (e.op()) {
    case Op::Const:
      if (!std::isfinite(e.value())) throw DomainError("cannot serialize a non-finite constant");
      j["value"] = e.value();
      break;
    case Op::Coord:
      if (e.index() >= c.dim()) throw ChartMismatch("coordinate " + std::to_string(e.index()) + " outside chart");
      j["index"] = detail::coord_index(c, e.index());
      break;
    case Op::Solve: {
      const auto* sys = e.system();
      const int m = sys->matrix->m;
      Json mat = Json::array();
      for (int r = 0; r < m; ++r) {
        Json row = Json::array();
        for (int col = 0; col < m; ++col) row.push_back(expr_to_json(sys->matrix->at(r, col), c));
        mat.push_back(std::move(row));
      }
      Json rhs = Json::array();
      for (const auto& b : sys->rhs) rhs.push_back(expr_to_json(b, c));
      j["matrix"] = std::move(mat);
      j["rhs"] = std::move(rhs);
      j["component"] = e.index() + 1;
      break;
    }
    default: {
      Json args = Json::array();
      for (const auto& a : e.args()) args.push_back(expr_to_json(a, c));
      j["args"] = std::move(args);
      if (e.op() == Op::Pow) j["value"] = e.value();
    }
  }
  return j;
}

/// Throws SchemaError naming the offending node by JSON pointer.
inline Expr expr_from_json(const Json& j, const Chart& c, const std::string& ptr = "") {
  using namespace detail;
  if (!j.is_object()) schema_fail(ptr, "expression node must be an object");
  const std::string& op = string_value(member(j, "op", ptr), ptr_join(ptr, "op"));
  auto args_of = [&](std::size_t arity) {
    const std::string ap = ptr_join(ptr, "args");
    const Json& a = array_of(member(j, "args", ptr), arity, ap);
    if (a.empty()) schema_fail(ap, "\"" + op + "\" needs at least one argument");
    std::vector<Expr> out;
    for (std::size_t k = 0; k < a.size(); ++k) out.push_back(expr_from_json(a[k], c, ptr_join(ap, k)));
    return out;
  };
  try {
    if (op == "const") {
      only_keys(j, {"op", "value"}, ptr);
      return raw::constant(number(member(j, "value", ptr), ptr_join(ptr, "value")));
    }
    if (op == "coord") {
      only_keys(j, {"op", "index"}, ptr);
      const std::string ip = ptr_join(ptr, "index");
      const Json& idx = member(j, "index", ptr);
      only_keys(idx, {"block", "i"}, ip);
      const std::string& b = string_value(member(idx, "block", ip), ptr_join(ip, "block"));
      if (b != "x" && b != "y" && b != "z") schema_fail(ptr_join(ip, "block"), "block must be x, y or z");
      const long long i = integer(member(idx, "i", ip), ptr_join(ip, "i"));
      if (i < 1 || i > c.n()) schema_fail(ptr_join(ip, "i"), "index " + std::to_string(i) + " outside 1.." + std::to_string(c.n()));
      const int block = b == "x" ? 0 : (b == "y" ? 1 : 2);
      return raw::coord(block * c.n() + static_cast<int>(i) - 1);
    }
    if (op == "add" || op == "mul") {
      only_keys(j, {"op", "args"}, ptr);
      return raw::make(op == "add" ? Op::Add : Op::Mul, args_of(0));
    }
    if (op == "pow") {
      only_keys(j, {"op", "args", "value"}, ptr);
      const double v = number(member(j, "value", ptr), ptr_join(ptr, "value"));
      return raw::make(Op::Pow, args_of(1), v);
    }
    if (op == "recip" || op == "sqrt" || op == "exp") {
      only_keys(j, {"op", "args"}, ptr);
      return raw::make(op == "recip" ? Op::Recip : (op == "sqrt" ? Op::Sqrt : Op::Exp), args_of(1));
    }
    if (op == "solve") {
      only_keys(j, {"op", "matrix", "rhs", "component"}, ptr);
      const std::string mp = ptr_join(ptr, "matrix"), rp = ptr_join(ptr, "rhs");
      const Json& rhs = array_of(member(j, "rhs", ptr), 0, rp);
      const std::size_t m = rhs.size();
      if (m == 0) schema_fail(rp, "empty right-hand side");
      const Json& mat = array_of(member(j, "matrix", ptr), m, mp);
      std::vector<Expr> a, b;
      for (std::size_t r = 0; r < m; ++r) {
        const Json& row = array_of(mat[r], m, ptr_join(mp, r));
        for (std::size_t col = 0; col < m; ++col)
          a.push_back(expr_from_json(row[col], c, ptr_join(ptr_join(mp, r), col)));
      }
      for (std::size_t r = 0; r < m; ++r) b.push_back(expr_from_json(rhs[r], c, ptr_join(rp, r)));
      const long long k = integer(member(j, "component", ptr), ptr_join(ptr, "component"));
      if (k < 1 || k > static_cast<long long>(m)) schema_fail(ptr_join(ptr, "component"), "component outside 1.." + std::to_string(m));
      return raw::solve_component(static_cast<int>(m), std::move(a), std::move(b), static_cast<int>(k) - 1);
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    schema_fail(ptr, e.what());
  }
  schema_fail(ptr_join(ptr, "op"), "unknown op \"" + op + "\"");
}

// ---------------------------------------------------------------------------
// Domain predicates. Only predicates the sampler can honour are accepted.

inline bool valid_domain(const std::string& d) { return d.empty() || d == "all" || d == "y nonzero"; }

inline void require_domain(const std::string& d, const std::string& ptr) {
  if (!valid_domain(d)) detail::schema_fail(ptr, "unknown domain predicate \"" + d + "\" (use \"all\" or \"y nonzero\")");
}

inline Chart chart_from_json(const Json& j, const std::string& ptr) {
  const long long n = detail::integer(detail::member(j, "n", ptr), detail::ptr_join(ptr, "n"));
  if (n < 1 || n > 8) detail::schema_fail(detail::ptr_join(ptr, "n"), "n must be in 1..8");
  return Chart(static_cast<int>(n));
}

inline void require_kind(const Json& j, const char* kind, const std::string& ptr) {
  const std::string& k = detail::string_value(detail::member(j, "kind", ptr), detail::ptr_join(ptr, "kind"));
  if (k != kind) detail::schema_fail(detail::ptr_join(ptr, "kind"), std::string("expected kind \"") + kind + "\", got \"" + k + "\"");
}

// ---------------------------------------------------------------------------
// Semi-sprays: the full field, 3n expressions.

inline Json spray_to_json(const SemiSpray& s) {
  Json j;
  j["type"] = s.type;
  Json f = Json::array();
  for (const auto& e : s.field.coefficients()) f.push_back(expr_to_json(e, s.field.chart()));
  j["field"] = std::move(f);
  return j;
}

inline SemiSpray spray_from_json(const Json& j, const Chart& c, const std::string& ptr) {
  using namespace detail;
  if (!j.is_object()) schema_fail(ptr, "expected an object");
  only_keys(j, {"type", "field"}, ptr);
  const long long type = integer(member(j, "type", ptr), ptr_join(ptr, "type"));
  if (type != 1 && type != 2) schema_fail(ptr_join(ptr, "type"), "semi-spray type must be 1 or 2");
  const std::string fp = ptr_join(ptr, "field");
  const Json& f = array_of(member(j, "field", ptr), static_cast<std::size_t>(c.dim()), fp);
  std::vector<Expr> comp;
  for (std::size_t k = 0; k < f.size(); ++k) comp.push_back(expr_from_json(f[k], c, ptr_join(fp, k)));
  try {
    return make_semispray(static_cast<int>(type), VectorField(c, comp));
  } catch (const ConstraintError& e) {
    schema_fail(fp, e.what());
  }
}

// ---------------------------------------------------------------------------
// Nonlinear connections: 3n x 3n matrix with a conn_type tag.

inline Json connection_to_json(const Connection& con) {
  const Chart& c = con.gamma.chart();
  Json j;
  j["kind"] = "connection";
  j["n"] = c.n();
  j["conn_type"] = con.type;
  Json m = Json::array();
  for (int r = 0; r < c.dim(); ++r) {
    Json row = Json::array();
    for (int col = 0; col < c.dim(); ++col) row.push_back(expr_to_json(con.gamma(r, col), c));
    m.push_back(std::move(row));
  }
  j["matrix"] = std::move(m);
  return j;
}

/// Parses without validating; validate_connection reports the relations.
inline Connection connection_from_json(const Json& j, const std::string& ptr = "") {
  using namespace detail;
  if (!j.is_object()) schema_fail(ptr, "expected an object");
  only_keys(j, {"kind", "n", "conn_type", "matrix"}, ptr);
  require_kind(j, "connection", ptr);
  const Chart c = chart_from_json(j, ptr);
  const long long type = integer(member(j, "conn_type", ptr), ptr_join(ptr, "conn_type"));
  if (type != 1 && type != 2) schema_fail(ptr_join(ptr, "conn_type"), "conn_type must be 1 or 2");
  const std::string mp = ptr_join(ptr, "matrix");
  const auto d = static_cast<std::size_t>(c.dim());
  const Json& m = array_of(member(j, "matrix", ptr), d, mp);
  VectorForm1 g(c);
  for (std::size_t r = 0; r < d; ++r) {
    const Json& row = array_of(m[r], d, ptr_join(mp, r));
    for (std::size_t col = 0; col < d; ++col)
      g(static_cast<int>(r), static_cast<int>(col)) = expr_from_json(row[col], c, ptr_join(ptr_join(mp, r), col));
  }
  return {g, static_cast<int>(type)};
}

// ---------------------------------------------------------------------------
// Linear connections: coefficients[k][i][j] for the component k of D_{e_i} e_j.

inline Json linear_to_json(const LinearConnection& d) {
  const Chart& c = d.chart();
  Json j;
  j["kind"] = "linear";
  j["n"] = c.n();
  j["domain"] = d.domain().empty() ? "all" : d.domain();
  Json co = Json::array();
  for (int k = 0; k < c.dim(); ++k) {
    Json a = Json::array();
    for (int i = 0; i < c.dim(); ++i) {
      Json b = Json::array();
      for (int jj = 0; jj < c.dim(); ++jj) b.push_back(expr_to_json(d(k, i, jj), c));
      a.push_back(std::move(b));
    }
    co.push_back(std::move(a));
  }
  j["coefficients"] = std::move(co);
  return j;
}

inline LinearConnection linear_from_json(const Json& j, const std::string& ptr = "") {
  using namespace detail;
  if (!j.is_object()) schema_fail(ptr, "expected an object");
  only_keys(j, {"kind", "n", "domain", "coefficients"}, ptr);
  require_kind(j, "linear", ptr);
  const Chart c = chart_from_json(j, ptr);
  const std::string& dom = string_value(member(j, "domain", ptr), ptr_join(ptr, "domain"));
  require_domain(dom, ptr_join(ptr, "domain"));
  LinearConnection d(c, dom == "all" ? "" : dom);
  const auto n3 = static_cast<std::size_t>(c.dim());
  const std::string cp = ptr_join(ptr, "coefficients");
  const Json& co = array_of(member(j, "coefficients", ptr), n3, cp);
  for (std::size_t k = 0; k < n3; ++k) {
    const std::string kp = ptr_join(cp, k);
    const Json& a = array_of(co[k], n3, kp);
    for (std::size_t i = 0; i < n3; ++i) {
      const std::string ip = ptr_join(kp, i);
      const Json& b = array_of(a[i], n3, ip);
      for (std::size_t jj = 0; jj < n3; ++jj)
        d(static_cast<int>(k), static_cast<int>(i), static_cast<int>(jj)) = expr_from_json(b[jj], c, ptr_join(ip, jj));
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// 2-forms: coefficients keyed "a,b" with Omega(d/da, d/db); each unordered
// pair may appear once, and the opposite order stores the negated value.

inline Json finsler_to_json(const FinslerianForm& f) {
  const ScalarPForm& w = f.omega;
  const Chart& c = w.chart();
  Json j;
  j["kind"] = "finsler";
  j["n"] = c.n();
  j["domain"] = f.domain.empty() ? "all" : f.domain;
  Json co = Json::object();
  for (std::size_t pos = 0; pos < w.size(); ++pos) {
    if (w.at(pos).is_zero()) continue;
    const auto& ix = w.multi_indices()[pos];
    co[c.label(ix[0]) + "," + c.label(ix[1])] = expr_to_json(w.at(pos), c);
  }
  j["coefficients"] = std::move(co);
  return j;
}

inline FinslerianForm finsler_from_json(const Json& j, const std::string& ptr = "") {
  using namespace detail;
  if (!j.is_object()) schema_fail(ptr, "expected an object");
  only_keys(j, {"kind", "n", "domain", "coefficients"}, ptr);
  require_kind(j, "finsler", ptr);
  const Chart c = chart_from_json(j, ptr);
  const std::string& dom = string_value(member(j, "domain", ptr), ptr_join(ptr, "domain"));
  require_domain(dom, ptr_join(ptr, "domain"));
  const std::string cp = ptr_join(ptr, "coefficients");
  const Json& co = member(j, "coefficients", ptr);
  if (!co.is_object()) schema_fail(cp, "expected an object keyed by coordinate pairs");
  ScalarPForm w(c, 2);
  std::vector<bool> seen(w.size(), false);
  for (auto it = co.begin(); it != co.end(); ++it) {
    const std::string kp = ptr_join(cp, it.key());
    const auto comma = it.key().find(',');
    if (comma == std::string::npos) schema_fail(kp, "key must be a pair \"a,b\" of coordinate labels");
    const int a = parse_label(c, it.key().substr(0, comma), kp);
    const int b = parse_label(c, it.key().substr(comma + 1), kp);
    if (a == b) schema_fail(kp, "repeated coordinate in an alternating form");
    const std::size_t pos = static_cast<std::size_t>(pair_position(c.dim(), std::min(a, b), std::max(a, b)));
    if (seen[pos]) schema_fail(kp, "pair given twice");
    seen[pos] = true;
    const Expr e = expr_from_json(it.value(), c, kp);
    // Stored as written in increasing order; a reversed key negates.
    w.at(pos) = a < b ? e : -e;
  }
  return {w, dom == "all" ? "" : dom};
}

}  // namespace t2m
