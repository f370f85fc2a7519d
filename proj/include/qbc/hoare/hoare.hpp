#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qbc/semantics/semantics.hpp"

namespace qbc {

enum class Mode { Partial, Total };
enum class Verdict { Holds, Fails, Inconclusive };

const char* mode_name(Mode m);
const char* verdict_name(Verdict v);
std::optional<Mode> parse_mode(const std::string& s);

/// Finite domains of named symbols, in declaration order.
class ParamSpace {
 public:
  using Entry = std::pair<std::string, std::vector<std::string>>;

  void add(std::string name, std::vector<std::string> labels);
  bool contains(const std::string& name) const;
  const std::vector<std::string>* domain(const std::string& name) const;
  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  /// Cartesian product over the given symbols (in declaration order).
  /// Throws EvalError naming any symbol that has no domain.
  std::vector<Binding> enumerate(const std::set<std::string>& symbols) const;

  bool operator==(const ParamSpace&) const = default;

 private:
  std::vector<Entry> entries_;
};

/// Range of integer labels "lo".."hi".
std::vector<std::string> int_labels(int lo, int hi);

struct Counterexample {
  Binding binding;
  Vector witness;  // unit vector with <w| rhs - lhs |w> = min_eig
  double min_eig = 0.0;
};

struct CheckResult {
  Verdict verdict = Verdict::Holds;
  double margin = 0.0;  // smallest eigenvalue over all bindings
  std::optional<Counterexample> cex;
  Diagnostics diag;
  std::size_t bindings = 0;
};

/// tr(P rho).
double expectation(const Matrix& rho, const Matrix& p);

/// P => Q in the Loewner order.
LoewnerResult implies(const Matrix& p, const Matrix& q, const Tolerances& tol);

/// Projection fast path: min over an orthonormal basis of range(P) of <psi|Q|psi>.
/// P => Q iff the value is >= 1 - psd_eps (for Q <= I).
double projection_implication_value(const Matrix& p, const Matrix& q, const Tolerances& tol);

struct Triple {
  ExprPtr pre;
  ProgPtr program;
  ExprPtr post;
};

CheckResult check_total(const Semantics& sem, const Triple& t, const ParamSpace& ps);
CheckResult check_partial(const Semantics& sem, const Triple& t, const ParamSpace& ps);
CheckResult check_triple(const Semantics& sem, const Triple& t, const ParamSpace& ps, Mode mode);

/// Symbols mentioned by expressions embedded in a program.
std::set<std::string> program_symbols(const Evaluator& ev, const ProgPtr& p);

}  // namespace qbc
