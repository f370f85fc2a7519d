#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qbc/lang/ast.hpp"
#include "qbc/lang/env.hpp"
#include "qbc/linalg/matrix.hpp"

namespace qbc {

class EvalError : public Error {
 public:
  using Error::Error;
};

/// A while loop whose truncated sum did not reach the tail threshold.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Assignment of symbol name to label, e.g. {"x": "01", "n1": "3"}.
using Binding = std::map<std::string, std::string>;

std::string binding_str(const Binding& b);

/// Result of evaluating a DSL expression: a scalar (acting as c*I) or an
/// operator, optionally attached to an ordered list of registry variables.
struct Value {
  bool is_scalar = true;
  cplx s{0.0, 0.0};
  Matrix m;
  bool attached = false;
  std::vector<int> support;

  static Value scalar(cplx c);
  static Value op(Matrix m);
  static Value on(Matrix m, std::vector<int> support);
};

/// Hook through which predicate transformers (wp, wlp, ...) reach the
/// semantics of embedded programs.
class TransformerBackend {
 public:
  virtual ~TransformerBackend() = default;
  /// [[p]]^dagger(x) for a concrete program.
  virtual Matrix wp(const ProgPtr& p, const Matrix& x, const Binding& b) const = 0;
  /// Sum of the first k+1 terms of the adjoint series of while loop w; k < 0 gives 0.
  virtual Matrix wp_truncated(const ProgPtr& w, int k, const Matrix& x, const Binding& b) const = 0;
};

/// Matrices of the named gates (H, X, CNOT, ...). Nothing if unknown.
std::optional<Matrix> named_gate(const std::string& name);
Matrix crz_gate(int k);
Matrix rz_gate(int k);
Matrix qft_matrix(int k);

class Evaluator {
 public:
  Evaluator(const VariableRegistry& reg, std::shared_ptr<const Env> env, Tolerances tol,
            const TransformerBackend* backend = nullptr);

  const VariableRegistry& registry() const { return reg_; }
  const Env& env() const { return *env_; }
  std::shared_ptr<const Env> env_ptr() const { return env_; }
  const Tolerances& tolerances() const { return tol_; }
  const TransformerBackend* backend() const { return backend_; }

  Value eval(const ExprPtr& e, const Binding& b) const;

  /// Full-register operator. With `validate`, checks Hermitian and 0 <= P <= I.
  Matrix predicate(const ExprPtr& e, const Binding& b, bool validate = true) const;

  /// Full-register Hermitian operator without bound checks.
  Matrix full_operator(const ExprPtr& e, const Binding& b) const;

  /// Operator on `vars` in the listed order.
  Matrix local_operator(const ExprPtr& e, const std::vector<std::string>& vars, const Binding& b) const;

  double real_scalar(const ExprPtr& e, const Binding& b) const;
  int integer(const ExprPtr& e, const Binding& b) const;

  /// Names in e that resolve to symbols rather than lets or builtins, looking
  /// through let bodies.
  std::set<std::string> free_symbols(const ExprPtr& e) const;

 private:
  const VariableRegistry& reg_;
  std::shared_ptr<const Env> env_;
  Tolerances tol_;
  const TransformerBackend* backend_;

  Value eval_ident(const Expr& e, const Binding& b) const;
  Value eval_call(const Expr& e, const Binding& b) const;
  Value eval_transform(const Expr& e, const Binding& b) const;
  Value eval_ket(const Expr& e, const Binding& b) const;
  Value full(const Value& v) const;
  void free_rec(const ExprPtr& e, const std::set<std::string>& bound, std::set<std::string>& out,
                int depth) const;
};

/// Uniform alignment of two operands to a common space.
std::pair<Value, Value> align(const Value& a, const Value& b, const VariableRegistry& reg);

}  // namespace qbc
