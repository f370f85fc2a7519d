#include "qbc/lang/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace qbc {

std::string binding_str(const Binding& b) {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : b) {
    if (!first) s += ", ";
    first = false;
    s += k + "=" + v;
  }
  return s + "}";
}

Value Value::scalar(cplx c) {
  Value v;
  v.s = c;
  return v;
}

Value Value::op(Matrix m) {
  Value v;
  v.is_scalar = false;
  v.m = std::move(m);
  return v;
}

Value Value::on(Matrix m, std::vector<int> support) {
  Value v = op(std::move(m));
  v.attached = true;
  v.support = std::move(support);
  return v;
}

// ----------------------------------------------------------------- gates

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

Matrix m2(cplx a, cplx b, cplx c, cplx d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

bool is_literal_label(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-';
  });
}

const std::set<std::string> kConstants{"I", "pi", "H", "X", "Y", "Z", "S", "T", "CNOT", "SWAP", "CZ"};
const std::set<std::string> kFunctions{
    "proj",   "adj",     "kron",       "kronpow", "normalize", "uniform", "solutions", "marked",
    "unmarked", "phase_oracle", "oracle", "msr", "sqrtm",  "tr",       "basis",     "id",
    "CRz",    "Rz",      "QFT",        "sqrt",    "sin",       "cos",     "tan",       "exp",
    "log",    "arcsin",  "arccos",     "arctan",  "abs",       "min",     "max",       "floor",
    "ceil",   "round",   "real",       "imag",    "conj",      "select",  "transpose", "ket",
    "bra"};

}  // namespace

std::optional<Matrix> named_gate(const std::string& name) {
  const double r = 1.0 / std::sqrt(2.0);
  if (name == "H") return m2(r, r, r, -r);
  if (name == "X") return m2(0, 1, 1, 0);
  if (name == "Y") return m2(0, -kI, kI, 0);
  if (name == "Z") return m2(1, 0, 0, -1);
  if (name == "S") return m2(1, 0, 0, kI);
  if (name == "T") return m2(1, 0, 0, std::exp(kI * (kPi / 4)));
  if (name == "CNOT") {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
    return m;
  }
  if (name == "SWAP") {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
    return m;
  }
  if (name == "CZ") {
    Matrix m = identity(4);
    m(3, 3) = -1;
    return m;
  }
  return std::nullopt;
}

Matrix rz_gate(int k) {
  return m2(1, 0, 0, std::exp(kI * (2 * kPi / std::pow(2.0, k))));
}

Matrix crz_gate(int k) {
  Matrix m = identity(4);
  m(3, 3) = std::exp(kI * (2 * kPi / std::pow(2.0, k)));
  return m;
}

Matrix qft_matrix(int k) {
  if (k < 0 || k > 12) throw EvalError("QFT size out of range");
  const std::size_t n = std::size_t{1} << k;
  Matrix m(n, n);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      m(x, y) = s * std::exp(kI * (2 * kPi * static_cast<double>((x * y) % n) / static_cast<double>(n)));
  return m;
}

// -------------------------------------------------------------- alignment

namespace {

/// Operator on `s` (square) or vector over `s`, re-expressed over the list `u`
/// which must contain every element of s.
Matrix extend_to(const Matrix& m, const std::vector<int>& s, const std::vector<int>& u,
                 const VariableRegistry& reg) {
  std::vector<int> rest;
  for (int v : u)
    if (std::find(s.begin(), s.end(), v) == s.end()) rest.push_back(v);
  for (int v : s)
    if (std::find(u.begin(), u.end(), v) == u.end()) throw ShapeError("support not contained in target");
  std::vector<int> from = s;
  from.insert(from.end(), rest.begin(), rest.end());
  Matrix big = m;
  if (!rest.empty()) {
    if (m.rows() != m.cols())
      throw ShapeError("cannot extend a vector to variables it does not mention");
    big = kron(m, identity(reg.dim_of(rest)), reg.dim_cap());
  }
  return permute_factors(big, from, u, reg);
}

bool same_set(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

std::vector<int> all_vars(const VariableRegistry& reg) {
  std::vector<int> v(reg.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<int>(i);
  return v;
}

bool dims_fit(const Matrix& m, std::size_t d) {
  return static_cast<std::size_t>(m.rows()) == d || static_cast<std::size_t>(m.cols()) == d;
}

}  // namespace

std::pair<Value, Value> align(const Value& a, const Value& b, const VariableRegistry& reg) {
  if (a.is_scalar || b.is_scalar) return {a, b};
  if (!a.attached && !b.attached) return {a, b};
  if (a.attached && b.attached) {
    if (a.support == b.support) return {a, b};
    if (same_set(a.support, b.support))
      return {a, Value::on(permute_factors(b.m, b.support, a.support, reg), a.support)};
    std::vector<int> u = a.support;
    u.insert(u.end(), b.support.begin(), b.support.end());
    u = reg.sorted(u);
    return {Value::on(extend_to(a.m, a.support, u, reg), u), Value::on(extend_to(b.m, b.support, u, reg), u)};
  }
  const bool a_att = a.attached;
  const Value& att = a_att ? a : b;
  const Value& bare = a_att ? b : a;
  const std::size_t ld = reg.dim_of(att.support);
  Value x = att, y = bare;
  if (dims_fit(bare.m, ld)) {
    y = Value::on(bare.m, att.support);
  } else if (dims_fit(bare.m, reg.dim())) {
    auto u = all_vars(reg);
    x = Value::op(extend_to(att.m, att.support, u, reg));
  } else {
    throw ShapeError("operand of dimension " + std::to_string(bare.m.rows()) + "x" +
                     std::to_string(bare.m.cols()) + " does not fit variables of dimension " +
                     std::to_string(ld) + " or the register of dimension " + std::to_string(reg.dim()));
  }
  return a_att ? std::pair{x, y} : std::pair{y, x};
}

// -------------------------------------------------------------- evaluator

Evaluator::Evaluator(const VariableRegistry& reg, std::shared_ptr<const Env> env, Tolerances tol,
                     const TransformerBackend* backend)
    : reg_(reg), env_(env ? std::move(env) : std::make_shared<Env>()), tol_(tol), backend_(backend) {}

namespace {

Value add_values(const Value& a0, const Value& b0, double sign, const VariableRegistry& reg) {
  if (a0.is_scalar && b0.is_scalar) return Value::scalar(a0.s + sign * b0.s);
  if (a0.is_scalar || b0.is_scalar) {
    const Value& o = a0.is_scalar ? b0 : a0;
    if (o.m.rows() != o.m.cols()) throw ShapeError("cannot add a scalar to a non-square operand");
    Value r = o;
    Matrix id = identity(o.m.rows());
    if (a0.is_scalar)
      r.m = a0.s * id + sign * o.m;
    else
      r.m = o.m + sign * b0.s * id;
    return r;
  }
  auto [a, b] = align(a0, b0, reg);
  if (a.m.rows() != b.m.rows() || a.m.cols() != b.m.cols())
    throw ShapeError("cannot add operands of shapes " + std::to_string(a.m.rows()) + "x" +
                     std::to_string(a.m.cols()) + " and " + std::to_string(b.m.rows()) + "x" +
                     std::to_string(b.m.cols()));
  Value r = a;
  r.m = a.m + sign * b.m;
  return r;
}

Value mul_values(const Value& a0, const Value& b0, const VariableRegistry& reg) {
  if (a0.is_scalar && b0.is_scalar) return Value::scalar(a0.s * b0.s);
  if (a0.is_scalar) {
    Value r = b0;
    r.m *= a0.s;
    return r;
  }
  if (b0.is_scalar) {
    Value r = a0;
    r.m *= b0.s;
    return r;
  }
  auto [a, b] = align(a0, b0, reg);
  if (a.m.cols() != b.m.rows())
    throw ShapeError("cannot multiply operands of shapes " + std::to_string(a.m.rows()) + "x" +
                     std::to_string(a.m.cols()) + " and " + std::to_string(b.m.rows()) + "x" +
                     std::to_string(b.m.cols()));
  Matrix prod = a.m * b.m;
  if (prod.rows() == 1 && prod.cols() == 1) return Value::scalar(prod(0, 0));
  Value r = a;
  r.m = std::move(prod);
  return r;
}

cplx cpow(cplx b, cplx e) {
  if (b.imag() == 0 && e.imag() == 0) {
    if (b.real() >= 0 || std::floor(e.real()) == e.real()) return std::pow(b.real(), e.real());
  }
  return std::pow(b, e);
}

double as_real(const Value& v, const char* what) {
  if (!v.is_scalar) throw EvalError(std::string(what) + " expects a scalar");
  if (std::abs(v.s.imag()) > 1e-12) throw EvalError(std::string(what) + " expects a real scalar");
  return v.s.real();
}

Matrix vector_of_label(const std::string& lab) {
  Matrix v = Matrix::Ones(1, 1);
  const double r = 1.0 / std::sqrt(2.0);
  for (char c : lab) {
    Matrix k(2, 1);
    if (c == '0')
      k << 1, 0;
    else if (c == '1')
      k << 0, 1;
    else if (c == '+')
      k << r, r;
    else if (c == '-')
      k << r, -r;
    else if (std::isdigit(static_cast<unsigned char>(c)))
      throw EvalError("ket digit '" + std::string(1, c) + "' needs basis(k, d) for qudits");
    else
      throw EvalError("bad ket label '" + lab + "'");
    v = kron(v, k);
  }
  return v;
}

std::vector<int> truth_table(const std::string& tt) {
  if (tt.empty() || (tt.size() & (tt.size() - 1)) != 0)
    throw EvalError("truth table length must be a power of two, got '" + tt + "'");
  std::vector<int> f;
  for (char c : tt) {
    if (c != '0' && c != '1') throw EvalError("truth table must consist of 0 and 1");
    f.push_back(c - '0');
  }
  return f;
}

}  // namespace

Value Evaluator::eval(const ExprPtr& ep, const Binding& b) const {
  const Expr& e = *ep;
  switch (e.kind) {
    case ExprKind::Number: return Value::scalar(std::stod(e.text));
    case ExprKind::Imag: return Value::scalar(kI * std::stod(e.text));
    case ExprKind::Ident: return eval_ident(e, b);
    case ExprKind::Call: return eval_call(e, b);
    case ExprKind::Neg: {
      Value v = eval(e.args[0], b);
      if (v.is_scalar)
        v.s = -v.s;
      else
        v.m = -v.m;
      return v;
    }
    case ExprKind::Add: return add_values(eval(e.args[0], b), eval(e.args[1], b), 1.0, reg_);
    case ExprKind::Sub: return add_values(eval(e.args[0], b), eval(e.args[1], b), -1.0, reg_);
    case ExprKind::Mul: return mul_values(eval(e.args[0], b), eval(e.args[1], b), reg_);
    case ExprKind::Div: {
      Value d = eval(e.args[1], b);
      if (!d.is_scalar) throw EvalError("division by an operator");
      if (std::abs(d.s) == 0.0) throw EvalError("division by zero");
      Value n = eval(e.args[0], b);
      if (n.is_scalar)
        n.s /= d.s;
      else
        n.m /= d.s;
      return n;
    }
    case ExprKind::Pow: {
      Value base = eval(e.args[0], b);
      Value ex = eval(e.args[1], b);
      if (!ex.is_scalar) throw EvalError("exponent must be a scalar");
      if (base.is_scalar) return Value::scalar(cpow(base.s, ex.s));
      const double k = as_real(ex, "matrix power");
      if (k < 0 || std::floor(k) != k) throw EvalError("matrix power needs a nonnegative integer");
      if (base.m.rows() != base.m.cols()) throw ShapeError("matrix power of a non-square operand");
      Matrix r = identity(base.m.rows());
      for (int i = 0; i < static_cast<int>(k); ++i) r = r * base.m;
      base.m = r;
      return base;
    }
    case ExprKind::Attach: {
      Value v = eval(e.args[0], b);
      auto idx = reg_.indices_of(e.vars);
      const std::size_t d = reg_.dim_of(idx);
      if (v.is_scalar) return Value::on(v.s * identity(d), idx);
      if (v.attached) throw EvalError("operand is already attached to variables");
      if (!(static_cast<std::size_t>(v.m.rows()) == d && (v.m.cols() == 1 || static_cast<std::size_t>(v.m.cols()) == d)) &&
          !(v.m.rows() == 1 && static_cast<std::size_t>(v.m.cols()) == d))
        throw ShapeError("operand of dimension " + std::to_string(v.m.rows()) + "x" +
                         std::to_string(v.m.cols()) + " attached to variables of dimension " +
                         std::to_string(d));
      return Value::on(v.m, idx);
    }
    case ExprKind::MatrixLit: {
      Matrix m(e.rows, e.cols);
      for (int r = 0; r < e.rows; ++r)
        for (int c = 0; c < e.cols; ++c) {
          Value v = eval(e.args[r * e.cols + c], b);
          if (!v.is_scalar) throw EvalError("matrix literal entries must be scalars");
          m(r, c) = v.s;
        }
      return Value::op(m);
    }
    case ExprKind::Ket: return eval_ket(e, b);
    case ExprKind::Transform: return eval_transform(e, b);
  }
  throw EvalError("unknown expression");
}

Value Evaluator::eval_ident(const Expr& e, const Binding& b) const {
  if (auto it = b.find(e.text); it != b.end()) {
    try {
      std::size_t used = 0;
      double v = std::stod(it->second, &used);
      if (used == it->second.size()) return Value::scalar(v);
    } catch (...) {
    }
    throw EvalError("symbol '" + e.text + "' = '" + it->second + "' is not numeric");
  }
  if (const LetDef* d = env_->find(e.text)) {
    if (!d->params.empty()) throw EvalError("'" + e.text + "' needs arguments");
    return eval(d->body, b);
  }
  if (e.text == "I") return Value::scalar(1.0);
  if (e.text == "pi") return Value::scalar(kPi);
  if (auto g = named_gate(e.text)) return Value::op(*g);
  throw EvalError("unbound symbol '" + e.text + "'");
}

Value Evaluator::eval_ket(const Expr& e, const Binding& b) const {
  std::string lab;
  for (const auto& p : e.vars) {
    if (is_literal_label(p)) {
      lab += p;
      continue;
    }
    auto it = b.find(p);
    if (it == b.end()) throw EvalError("unbound symbol '" + p + "' in ket");
    if (!is_literal_label(it->second)) throw EvalError("symbol '" + p + "' has non-basis label");
    lab += it->second;
  }
  Matrix v = vector_of_label(lab);
  if (e.bra) v = v.adjoint().eval();
  return Value::op(v);
}

Value Evaluator::eval_call(const Expr& e, const Binding& b) const {
  const std::string& f = e.text;
  const auto& a = e.args;
  if (const LetDef* d = env_->find(f)) {
    if (d->params.size() != a.size())
      throw EvalError("'" + f + "' expects " + std::to_string(d->params.size()) + " arguments");
    ExprPtr body = d->body;
    // Simultaneous substitution through placeholders.
    std::vector<std::string> tmp;
    for (std::size_t i = 0; i < a.size(); ++i) {
      tmp.push_back("__arg" + std::to_string(i) + "_" + f);
      body = substitute(body, d->params[i], ex::ident(tmp.back()));
    }
    for (std::size_t i = 0; i < a.size(); ++i) body = substitute(body, tmp[i], a[i]);
    return eval(body, b);
  }
  auto arity = [&](std::size_t n) {
    if (a.size() != n) throw EvalError(f + " expects " + std::to_string(n) + " argument(s)");
  };
  auto label_arg = [&](const ExprPtr& x) -> std::string {
    if (x->kind == ExprKind::Number) return x->text;
    if (x->kind == ExprKind::Ident) {
      if (auto it = b.find(x->text); it != b.end()) return it->second;
      if (const LetDef* d = env_->find(x->text); d && d->params.empty() && d->body->kind == ExprKind::Number)
        return d->body->text;
    }
    throw EvalError(f + " expects a bit-string literal");
  };
  auto scalar_fn = [&](auto fn) {
    arity(1);
    Value v = eval(a[0], b);
    if (!v.is_scalar) throw EvalError(f + " expects a scalar");
    return Value::scalar(fn(v.s));
  };
  auto real_fn = [&](auto fn) {
    arity(1);
    return Value::scalar(fn(as_real(eval(a[0], b), f.c_str())));
  };

  if (f == "proj") {
    arity(1);
    Value v = eval(a[0], b);
    if (v.is_scalar) throw EvalError("proj expects a vector");
    if (v.m.cols() == 1)
      v.m = (v.m * v.m.adjoint()).eval();
    else if (v.m.rows() == 1)
      v.m = (v.m.adjoint() * v.m).eval();
    else
      throw EvalError("proj expects a vector");
    return v;
  }
  if (f == "adj" || f == "transpose" || f == "conj") {
    arity(1);
    Value v = eval(a[0], b);
    if (v.is_scalar) {
      if (f != "transpose") v.s = std::conj(v.s);
    } else if (f == "adj") {
      v.m = v.m.adjoint().eval();
    } else if (f == "transpose") {
      v.m = v.m.transpose().eval();
    } else {
      v.m = v.m.conjugate().eval();
    }
    return v;
  }
  if (f == "kron") {
    if (a.empty()) throw EvalError("kron expects arguments");
    Value acc = eval(a[0], b);
    for (std::size_t i = 1; i < a.size(); ++i) {
      Value r = eval(a[i], b);
      if (acc.is_scalar || r.is_scalar) {
        acc = mul_values(acc, r, reg_);
        continue;
      }
      if (acc.attached != r.attached) throw EvalError("kron mixes attached and unattached operands");
      Matrix k = kron(acc.m, r.m, reg_.dim_cap());
      if (acc.attached) {
        for (int v : r.support)
          if (std::find(acc.support.begin(), acc.support.end(), v) != acc.support.end())
            throw EvalError("kron of operands on overlapping variables");
        auto s = acc.support;
        s.insert(s.end(), r.support.begin(), r.support.end());
        acc = Value::on(k, s);
      } else {
        acc = Value::op(k);
      }
    }
    return acc;
  }
  if (f == "kronpow") {
    arity(2);
    Value v = eval(a[0], b);
    const int k = integer(a[1], b);
    if (v.is_scalar || v.attached) throw EvalError("kronpow expects an unattached operator");
    if (k < 0) throw EvalError("kronpow exponent must be nonnegative");
    Matrix r = Matrix::Ones(1, 1);
    for (int i = 0; i < k; ++i) r = kron(r, v.m, reg_.dim_cap());
    return Value::op(r);
  }
  if (f == "normalize") {
    arity(1);
    Value v = eval(a[0], b);
    if (v.is_scalar) throw EvalError("normalize expects a vector");
    const double n = v.m.norm();
    if (n == 0) throw EvalError("normalize of a zero vector");
    v.m /= n;
    return v;
  }
  if (f == "uniform") {
    arity(1);
    const int n = integer(a[0], b);
    if (n < 0 || n > 20) throw EvalError("uniform size out of range");
    const std::size_t d = std::size_t{1} << n;
    if (d > reg_.dim_cap()) throw CapacityError("uniform state exceeds dimension cap");
    return Value::op(Matrix::Constant(d, 1, 1.0 / std::sqrt(static_cast<double>(d))));
  }
  if (f == "solutions" || f == "marked" || f == "unmarked" || f == "phase_oracle" || f == "oracle") {
    arity(1);
    auto tt = truth_table(label_arg(a[0]));
    const std::size_t n = tt.size();
    if (f == "solutions") {
      Matrix m = Matrix::Zero(n, n);
      for (std::size_t x = 0; x < n; ++x) m(x, x) = tt[x];
      return Value::op(m);
    }
    if (f == "phase_oracle") {
      Matrix m = Matrix::Zero(n, n);
      for (std::size_t x = 0; x < n; ++x) m(x, x) = tt[x] ? -1.0 : 1.0;
      return Value::op(m);
    }
    if (f == "oracle") {
      Matrix m = Matrix::Zero(2 * n, 2 * n);
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < 2; ++y) m(2 * x + (y ^ tt[x]), 2 * x + y) = 1.0;
      return Value::op(m);
    }
    const int want = f == "marked" ? 1 : 0;
    Matrix v = Matrix::Zero(n, 1);
    for (std::size_t x = 0; x < n; ++x)
      if (tt[x] == want) v(x, 0) = 1.0;
    if (v.norm() == 0) throw EvalError(f + " of a truth table without such entries");
    return Value::op(v / v.norm());
  }
  if (f == "msr") {
    arity(2);
    Value m = eval(a[0], b);
    Value x = eval(a[1], b);
    Value k;
    if (m.is_scalar) {
      k = Value::scalar(std::sqrt(m.s));
    } else {
      k = m;
      k.m = psd_sqrt(m.m, tol_);
    }
    return mul_values(mul_values(k, x, reg_), k, reg_);
  }
  if (f == "sqrtm") {
    arity(1);
    Value v = eval(a[0], b);
    if (v.is_scalar) return Value::scalar(std::sqrt(v.s));
    v.m = psd_sqrt(v.m, tol_);
    return v;
  }
  if (f == "tr") {
    arity(1);
    Value v = eval(a[0], b);
    if (v.is_scalar) throw EvalError("tr of a scalar is ambiguous; use an operator");
    if (v.m.rows() != v.m.cols()) throw ShapeError("trace of a non-square operand");
    return Value::scalar(v.m.trace());
  }
  if (f == "basis") {
    arity(2);
    const int k = integer(a[0], b), d = integer(a[1], b);
    if (d < 1 || k < 0 || k >= d) throw EvalError("basis(k, d) needs 0 <= k < d");
    Matrix v = Matrix::Zero(d, 1);
    v(k, 0) = 1.0;
    return Value::op(v);
  }
  if (f == "id") {
    arity(1);
    const int d = integer(a[0], b);
    if (d < 1 || static_cast<std::size_t>(d) > reg_.dim_cap()) throw EvalError("id(d) out of range");
    return Value::op(identity(d));
  }
  if (f == "CRz") {
    arity(1);
    return Value::op(crz_gate(integer(a[0], b)));
  }
  if (f == "Rz") {
    arity(1);
    return Value::op(rz_gate(integer(a[0], b)));
  }
  if (f == "QFT") {
    arity(1);
    const int k = integer(a[0], b);
    if ((std::size_t{1} << k) > reg_.dim_cap()) throw CapacityError("QFT exceeds dimension cap");
    return Value::op(qft_matrix(k));
  }
  if (f == "select") {
    if (a.size() < 2) throw EvalError("select expects an index and at least one alternative");
    int i = integer(a[0], b);
    i = std::clamp(i, 0, static_cast<int>(a.size()) - 2);
    return eval(a[i + 1], b);
  }
  if (f == "sqrt") return scalar_fn([](cplx z) {
      return z.imag() == 0 && z.real() >= 0 ? cplx(std::sqrt(z.real())) : std::sqrt(z);
    });
  if (f == "exp") return scalar_fn([](cplx z) { return std::exp(z); });
  if (f == "log") return real_fn([](double x) {
      if (x <= 0) throw EvalError("log of a nonpositive number");
      return std::log(x);
    });
  if (f == "sin") return real_fn([](double x) { return std::sin(x); });
  if (f == "cos") return real_fn([](double x) { return std::cos(x); });
  if (f == "tan") return real_fn([](double x) { return std::tan(x); });
  if (f == "arcsin") return real_fn([](double x) {
      if (x < -1 || x > 1) throw EvalError("arcsin argument outside [-1, 1]");
      return std::asin(x);
    });
  if (f == "arccos") return real_fn([](double x) {
      if (x < -1 || x > 1) throw EvalError("arccos argument outside [-1, 1]");
      return std::acos(x);
    });
  if (f == "arctan") return real_fn([](double x) { return std::atan(x); });
  if (f == "abs") return scalar_fn([](cplx z) { return cplx(std::abs(z)); });
  if (f == "real") return scalar_fn([](cplx z) { return cplx(z.real()); });
  if (f == "imag") return scalar_fn([](cplx z) { return cplx(z.imag()); });
  if (f == "floor") return real_fn([](double x) { return std::floor(x); });
  if (f == "ceil") return real_fn([](double x) { return std::ceil(x); });
  if (f == "round") return real_fn([](double x) { return std::round(x); });
  if (f == "min" || f == "max") {
    if (a.empty()) throw EvalError(f + " expects arguments");
    double r = as_real(eval(a[0], b), f.c_str());
    for (std::size_t i = 1; i < a.size(); ++i) {
      double v = as_real(eval(a[i], b), f.c_str());
      r = f == "min" ? std::min(r, v) : std::max(r, v);
    }
    return Value::scalar(r);
  }
  if (auto g = named_gate(f)) throw EvalError("'" + f + "' is a constant, not a function");
  throw EvalError("unknown function '" + f + "'");
}

Value Evaluator::eval_transform(const Expr& e, const Binding& b) const {
  if (!backend_) throw EvalError(e.text + "{...} needs program semantics");
  const auto& a = e.args;
  auto expect = [&](std::size_t n) {
    if (a.size() != n) throw EvalError(e.text + " expects " + std::to_string(n) + " argument(s)");
  };
  Matrix id = identity(reg_.dim());
  if (e.text == "wp") {
    expect(1);
    return Value::op(backend_->wp(e.prog, full_operator(a[0], b), b));
  }
  if (e.text == "wlp") {
    expect(1);
    return Value::op(id - backend_->wp(e.prog, id - full_operator(a[0], b), b));
  }
  if (e.text == "wpn") {
    expect(2);
    if (e.prog->kind != ProgKind::While) throw EvalError("wpn expects a while loop");
    return Value::op(backend_->wp_truncated(e.prog, integer(a[0], b), full_operator(a[1], b), b));
  }
  if (e.text == "wpow" || e.text == "wlpow") {
    expect(2);
    const int k = integer(a[0], b);
    if (k < 0) throw EvalError(e.text + " exponent must be nonnegative");
    Matrix x = full_operator(a[1], b);
    for (int i = 0; i < k; ++i)
      x = e.text == "wpow" ? backend_->wp(e.prog, x, b) : Matrix(id - backend_->wp(e.prog, id - x, b));
    return Value::op(x);
  }
  throw EvalError("unknown transformer '" + e.text + "'");
}

Value Evaluator::full(const Value& v) const {
  const std::size_t d = reg_.dim();
  if (v.is_scalar) return Value::op(v.s * identity(d));
  if (v.attached) {
    if (v.m.rows() != v.m.cols()) throw ShapeError("expected an operator, got a vector");
    auto u = all_vars(reg_);
    return Value::op(extend_to(v.m, v.support, u, reg_));
  }
  if (static_cast<std::size_t>(v.m.rows()) != d || static_cast<std::size_t>(v.m.cols()) != d)
    throw ShapeError("operator of dimension " + std::to_string(v.m.rows()) + "x" +
                     std::to_string(v.m.cols()) + " does not match the register dimension " +
                     std::to_string(d));
  return v;
}

Matrix Evaluator::full_operator(const ExprPtr& e, const Binding& b) const { return full(eval(e, b)).m; }

Matrix Evaluator::predicate(const ExprPtr& e, const Binding& b, bool validate) const {
  Matrix m = full_operator(e, b);
  if (!all_finite(m)) throw EvalError("predicate has non-finite entries");
  m = symmetrize(m, tol_);
  if (validate) {
    if (auto v = predicate_violation(m, tol_))
      throw NotPsdError("predicate " + print_expr(e) + " at " + binding_str(b) + ": " + *v);
  }
  return m;
}

Matrix Evaluator::local_operator(const ExprPtr& e, const std::vector<std::string>& vars,
                                 const Binding& b) const {
  auto idx = reg_.indices_of(vars);
  const std::size_t d = reg_.dim_of(idx);
  Value v = eval(e, b);
  if (v.is_scalar) return v.s * identity(d);
  if (v.attached) {
    for (int s : v.support)
      if (std::find(idx.begin(), idx.end(), s) == idx.end())
        throw ShapeError("operator acts on variables outside " + print_expr(ex::ident(vars[0])) + "...");
    return extend_to(v.m, v.support, idx, reg_);
  }
  if (static_cast<std::size_t>(v.m.rows()) != d || static_cast<std::size_t>(v.m.cols()) != d)
    throw ShapeError("operator of dimension " + std::to_string(v.m.rows()) + "x" +
                     std::to_string(v.m.cols()) + " applied to variables of dimension " +
                     std::to_string(d));
  return v.m;
}

double Evaluator::real_scalar(const ExprPtr& e, const Binding& b) const {
  Value v = eval(e, b);
  return as_real(v, "expression");
}

int Evaluator::integer(const ExprPtr& e, const Binding& b) const {
  const double x = real_scalar(e, b);
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9) throw EvalError("expected an integer, got " + std::to_string(x));
  return static_cast<int>(r);
}

void Evaluator::free_rec(const ExprPtr& e, const std::set<std::string>& bound, std::set<std::string>& out,
                         int depth) const {
  if (!e) return;
  if (depth > 64) throw EvalError("let definitions nest too deeply");
  auto name_ref = [&](const std::string& n, bool is_call) {
    if (bound.count(n)) return;
    if (const LetDef* d = env_->find(n)) {
      std::set<std::string> inner(d->params.begin(), d->params.end());
      free_rec(d->body, inner, out, depth + 1);
      return;
    }
    if (is_call ? kFunctions.count(n) > 0 : kConstants.count(n) > 0) return;
    out.insert(n);
  };
  switch (e->kind) {
    case ExprKind::Ident: name_ref(e->text, false); break;
    case ExprKind::Call: name_ref(e->text, true); break;
    case ExprKind::Ket:
      for (const auto& p : e->vars)
        if (!is_literal_label(p) && !bound.count(p)) out.insert(p);
      break;
    default: break;
  }
  for (const auto& a : e->args) free_rec(a, bound, out, depth);
}

std::set<std::string> Evaluator::free_symbols(const ExprPtr& e) const {
  std::set<std::string> out;
  free_rec(e, {}, out, 0);
  return out;
}

}  // namespace qbc
