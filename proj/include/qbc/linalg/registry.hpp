#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qbc {

struct VariableDecl {
  std::string name;
  int dim = 2;  // |Sigma_q|

  bool operator==(const VariableDecl&) const = default;
};

/// Ordered set of quantum variables. The first variable is the most
/// significant tensor factor of the full Hilbert space.
class VariableRegistry {
 public:
  VariableRegistry() = default;
  explicit VariableRegistry(std::vector<VariableDecl> vars, std::size_t dim_cap = 1024);

  const std::vector<VariableDecl>& vars() const { return vars_; }
  std::size_t size() const { return vars_.size(); }
  std::size_t dim() const { return dim_; }
  std::size_t dim_cap() const { return dim_cap_; }

  bool contains(std::string_view name) const;
  /// Throws UnknownVariableError.
  int index_of(std::string_view name) const;
  std::vector<int> indices_of(std::span<const std::string> names) const;
  std::vector<int> dims() const;

  /// Product of the dimensions of the given variables.
  std::size_t dim_of(std::span<const int> indices) const;
  std::size_t dim_of_names(std::span<const std::string> names) const;

  /// Variables in the given set, reordered to registry order.
  std::vector<int> sorted(std::span<const int> indices) const;

  bool all_qubits(std::span<const int> indices) const;

  bool operator==(const VariableRegistry& o) const { return vars_ == o.vars_; }

 private:
  std::vector<VariableDecl> vars_;
  std::size_t dim_ = 1;
  std::size_t dim_cap_ = 1024;
};

}  // namespace qbc
