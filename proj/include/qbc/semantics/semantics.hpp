#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "qbc/lang/eval.hpp"

namespace qbc {

/// Raised for programs whose operators are not unitary, measurements that do
/// not sum to I, guards outside [0, I], holes, and similar.
class SemanticsError : public Error {
 public:
  using Error::Error;
};

/// Warnings collected while evaluating loops.
struct Diagnostics {
  bool converged = true;
  int max_iterations = 0;
  std::vector<std::string> messages;

  void fail(std::string msg);
  void merge(const Diagnostics& o);
};

/// Numeric form of a concrete program under one binding.
struct LNode {
  ProgKind kind = ProgKind::Skip;
  std::shared_ptr<const SubsystemLayout> layout;
  std::string where;  // printed source, for diagnostics
  Matrix op;          // Unitary: U
  std::vector<Matrix> kraus;  // Case: sqrt(M_w); While: {sqrt(I-B), sqrt(B)}
  std::vector<std::string> labels;
  std::vector<std::shared_ptr<const LNode>> body;
  int count = 0;
};
using LNodePtr = std::shared_ptr<const LNode>;

struct Superoperator {
  Matrix transfer;  // d^2 x d^2 on column-stacked operators
  std::size_t dim = 0;
  bool is_trace_preserving = false;
  bool is_cp_verified = false;
  Diagnostics diag;

  Matrix apply(const Matrix& rho) const;
};

/// [[S]](rho) and friends for one registry. Thread-safe; lowered programs are
/// cached per binding.
class Semantics final : public TransformerBackend {
 public:
  Semantics(VariableRegistry reg, std::shared_ptr<const Env> env, Tolerances tol);
  Semantics(const Semantics&) = delete;
  Semantics& operator=(const Semantics&) = delete;

  const VariableRegistry& registry() const { return reg_; }
  const Tolerances& tolerances() const { return tol_; }
  const Evaluator& evaluator() const { return eval_; }

  LNodePtr lower(const ProgPtr& p, const Binding& b = {}) const;

  Matrix apply(const ProgPtr& p, const Matrix& rho, const Binding& b = {}, Diagnostics* d = nullptr) const;
  Matrix apply(const LNode& n, const Matrix& rho, Diagnostics* d = nullptr) const;

  /// [[S]]^dagger(x), computed directly on operators.
  Matrix adjoint(const ProgPtr& p, const Matrix& x, const Binding& b = {}, Diagnostics* d = nullptr) const;
  Matrix adjoint(const LNode& n, const Matrix& x, Diagnostics* d = nullptr) const;

  double termination_probability(const ProgPtr& p, const Matrix& rho, const Binding& b = {},
                                 Diagnostics* d = nullptr) const;

  Superoperator superoperator(const ProgPtr& p, const Binding& b = {}, bool check_cp = false) const;

  /// Transfer matrix of a single lowered node (no capacity check).
  Matrix transfer(const LNode& n, Diagnostics* d) const;

  // TransformerBackend: convergence failures raise ConvergenceError.
  Matrix wp(const ProgPtr& p, const Matrix& x, const Binding& b) const override;
  Matrix wp_truncated(const ProgPtr& w, int k, const Matrix& x, const Binding& b) const override;

 private:
  VariableRegistry reg_;
  Tolerances tol_;
  Evaluator eval_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<const Program*, std::string>, std::pair<ProgPtr, LNodePtr>> cache_;

  LNodePtr lower_rec(const ProgPtr& p, const Binding& b) const;
  Matrix kraus_map(const Matrix& k, const SubsystemLayout& lay, const Matrix& rho) const;
  Matrix kraus_adj(const Matrix& k, const SubsystemLayout& lay, const Matrix& x) const;
};

/// Adjoint of a transfer matrix applied to an operator.
Matrix adjoint_apply(const Superoperator& s, const Matrix& q);

/// Checks a partial state: Hermitian, PSD within psd_eps, trace <= 1 + trace_eps.
std::optional<std::string> state_violation(const Matrix& rho, const Tolerances& tol);

}  // namespace qbc
