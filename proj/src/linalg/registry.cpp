#include "qbc/linalg/registry.hpp"

#include <algorithm>
#include <unordered_set>

#include "qbc/linalg/errors.hpp"

namespace qbc {

VariableRegistry::VariableRegistry(std::vector<VariableDecl> vars, std::size_t dim_cap)
    : vars_(std::move(vars)), dim_cap_(dim_cap) {
  std::unordered_set<std::string> seen;
  dim_ = 1;
  for (const auto& v : vars_) {
    if (v.name.empty()) throw Error("empty variable name");
    if (!seen.insert(v.name).second) throw Error("duplicate variable '" + v.name + "'");
    if (v.dim < 2) throw Error("variable '" + v.name + "' must have at least 2 basis labels");
    dim_ *= static_cast<std::size_t>(v.dim);
    if (dim_ > dim_cap_)
      throw CapacityError("registry dimension exceeds cap " + std::to_string(dim_cap_));
  }
}

bool VariableRegistry::contains(std::string_view name) const {
  return std::any_of(vars_.begin(), vars_.end(), [&](const auto& v) { return v.name == name; });
}

int VariableRegistry::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  throw UnknownVariableError("unknown variable '" + std::string(name) + "'");
}

std::vector<int> VariableRegistry::indices_of(std::span<const std::string> names) const {
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    int i = index_of(n);
    if (std::find(out.begin(), out.end(), i) != out.end())
      throw Error("variable '" + n + "' listed twice");
    out.push_back(i);
  }
  return out;
}

std::vector<int> VariableRegistry::dims() const {
  std::vector<int> d;
  for (const auto& v : vars_) d.push_back(v.dim);
  return d;
}

std::size_t VariableRegistry::dim_of(std::span<const int> indices) const {
  std::size_t d = 1;
  for (int i : indices) d *= static_cast<std::size_t>(vars_.at(i).dim);
  return d;
}

std::size_t VariableRegistry::dim_of_names(std::span<const std::string> names) const {
  auto idx = indices_of(names);
  return dim_of(idx);
}

std::vector<int> VariableRegistry::sorted(std::span<const int> indices) const {
  std::vector<int> out(indices.begin(), indices.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool VariableRegistry::all_qubits(std::span<const int> indices) const {
  return std::all_of(indices.begin(), indices.end(), [&](int i) { return vars_.at(i).dim == 2; });
}

}  // namespace qbc
