#include "qbc/linalg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qbc/linalg/kernels.hpp"

namespace qbc {

Matrix identity(std::size_t d) { return Matrix::Identity(d, d); }
Matrix zeros(std::size_t r, std::size_t c) { return Matrix::Zero(r, c); }

Matrix kron(const Matrix& a, const Matrix& b, std::size_t cap) {
  const auto r = static_cast<std::size_t>(a.rows() * b.rows());
  const auto c = static_cast<std::size_t>(a.cols() * b.cols());
  if (r > cap || c > cap) throw CapacityError("kron result exceeds dimension cap");
  Matrix out(r, c);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool all_finite(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const cplx z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

bool is_square(const Matrix& m) { return m.rows() == m.cols(); }

double hermitian_defect(const Matrix& m) {
  if (!is_square(m)) throw ShapeError("hermitian check on non-square matrix");
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

Matrix symmetrize(const Matrix& m, const Tolerances& tol) {
  if (!is_square(m)) throw ShapeError("expected a square matrix, got " + std::to_string(m.rows()) +
                                      "x" + std::to_string(m.cols()));
  if (!all_finite(m)) throw Error("matrix has non-finite entries");
  const double d = hermitian_defect(m);
  if (d > tol.hermitian_eps) {
    std::ostringstream os;
    os << "matrix is not Hermitian (asymmetry " << d << ")";
    throw NotHermitianError(os.str());
  }
  return (m + m.adjoint()) / 2.0;
}

Eig herm_eig(const Matrix& m, const Tolerances& tol) {
  Matrix s = symmetrize(m, tol);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  return {es.eigenvalues(), es.eigenvectors()};
}

LoewnerResult loewner_check(const Matrix& a, const Matrix& b, const Tolerances& tol) {
  if (!is_square(a) || !is_square(b)) throw ShapeError("Loewner comparison of non-square matrices");
  if (a.rows() != b.rows())
    throw ShapeError("Loewner comparison of " + std::to_string(a.rows()) + " and " +
                     std::to_string(b.rows()) + " dimensional operators");
  LoewnerResult r;
  if (a.rows() == 0) return r;
  Eig e = herm_eig(symmetrize(b, tol) - symmetrize(a, tol), tol);
  r.min_eig = e.values(0);
  r.witness = e.vectors.col(0);
  r.holds = r.min_eig >= -tol.psd_eps;
  return r;
}

bool loewner_leq(const Matrix& a, const Matrix& b, const Tolerances& tol) {
  return loewner_check(a, b, tol).holds;
}

Matrix psd_sqrt(const Matrix& m, const Tolerances& tol) {
  Eig e = herm_eig(m, tol);
  if (e.values.size() > 0 && e.values(0) < -tol.psd_eps) {
    std::ostringstream os;
    os << "matrix is not positive semidefinite (eigenvalue " << e.values(0) << ")";
    throw NotPsdError(os.str());
  }
  RealVector s = e.values;
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = s(i) <= tol.psd_eps ? 0.0 : std::sqrt(s(i));
  return e.vectors * s.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

bool is_projection(const Matrix& m, double eps) {
  if (!is_square(m)) return false;
  if (hermitian_defect(m) > eps) return false;
  return (m * m - m).cwiseAbs().maxCoeff() <= eps;
}

bool is_unitary(const Matrix& m, double eps) {
  if (!is_square(m)) return false;
  return (m.adjoint() * m - identity(m.rows())).cwiseAbs().maxCoeff() <= eps;
}

Matrix range_basis(const Matrix& p, const Tolerances& tol) {
  Eig e = herm_eig(p, tol);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < e.values.size(); ++i)
    if (e.values(i) > 0.5) keep.push_back(i);
  Matrix out(p.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) out.col(k) = e.vectors.col(keep[k]);
  return out;
}

std::optional<std::string> predicate_violation(const Matrix& m, const Tolerances& tol) {
  Eig e = herm_eig(m, tol);
  if (e.values.size() == 0) return std::nullopt;
  std::ostringstream os;
  if (e.values(0) < -tol.psd_eps) {
    os << "0 <= P violated (min eigenvalue " << e.values(0) << ")";
    return os.str();
  }
  const double mx = e.values(e.values.size() - 1);
  if (mx > 1.0 + tol.psd_eps) {
    os << "P <= I violated (max eigenvalue " << mx << ")";
    return os.str();
  }
  return std::nullopt;
}

double frobenius(const Matrix& m) { return m.norm(); }
double trace_real(const Matrix& m) { return m.trace().real(); }

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, std::size_t d) {
  if (static_cast<std::size_t>(v.size()) != d * d) throw ShapeError("unvec size mismatch");
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

SubsystemLayout::SubsystemLayout(const VariableRegistry& reg, std::span<const int> vars) {
  const auto dims = reg.dims();
  const int n = static_cast<int>(dims.size());
  std::vector<bool> in(n, false);
  for (int v : vars) {
    if (v < 0 || v >= n) throw UnknownVariableError("variable index out of range");
    if (in[v]) throw Error("variable listed twice in subsystem");
    in[v] = true;
  }
  full_dim_ = reg.dim();
  local_dim_ = reg.dim_of(vars);
  rest_dim_ = full_dim_ / local_dim_;

  // Strides of each registry variable inside the local and rest indices.
  std::vector<std::size_t> lstride(n, 0), rstride(n, 0);
  {
    std::size_t s = 1;
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      lstride[*it] = s;
      s *= dims[*it];
    }
    s = 1;
    for (int v = n - 1; v >= 0; --v) {
      if (in[v]) continue;
      rstride[v] = s;
      s *= dims[v];
    }
  }
  local_of_.assign(full_dim_, 0);
  rest_of_.assign(full_dim_, 0);
  full_of_.assign(full_dim_, 0);
  std::vector<int> digit(n, 0);
  for (std::size_t i = 0; i < full_dim_; ++i) {
    std::size_t rem = i;
    for (int v = n - 1; v >= 0; --v) {
      digit[v] = static_cast<int>(rem % dims[v]);
      rem /= dims[v];
    }
    std::size_t l = 0, r = 0;
    for (int v = 0; v < n; ++v) {
      if (in[v])
        l += digit[v] * lstride[v];
      else
        r += digit[v] * rstride[v];
    }
    local_of_[i] = l;
    rest_of_[i] = r;
    full_of_[l * rest_dim_ + r] = i;
  }
}

Matrix cylindrical_extension(const Matrix& a, std::span<const int> vars, const VariableRegistry& reg) {
  SubsystemLayout lay(reg, vars);
  if (!is_square(a) || static_cast<std::size_t>(a.rows()) != lay.local_dim())
    throw ShapeError("operator of dimension " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " does not match subsystem dimension " +
                     std::to_string(lay.local_dim()));
  return kernels::embed(a, lay);
}

Matrix cylindrical_extension(const Matrix& a, std::span<const std::string> vars,
                             const VariableRegistry& reg) {
  auto idx = reg.indices_of(vars);
  return cylindrical_extension(a, idx, reg);
}

Matrix permute_factors(const Matrix& a, std::span<const int> from, std::span<const int> to,
                       const VariableRegistry& reg) {
  if (from.size() != to.size()) throw ShapeError("factor permutation of different sets");
  if (std::equal(from.begin(), from.end(), to.begin())) return a;
  const std::size_t k = from.size();
  std::vector<int> dto(k);
  std::vector<std::size_t> from_stride(reg.size(), 0);
  {
    std::size_t s = 1;
    for (std::size_t i = k; i-- > 0;) {
      from_stride[from[i]] = s;
      s *= reg.vars().at(from[i]).dim;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (std::find(from.begin(), from.end(), to[i]) == from.end())
      throw ShapeError("factor permutation of different sets");
    dto[i] = reg.vars().at(to[i]).dim;
  }
  const std::size_t d = reg.dim_of(to);
  std::vector<std::size_t> pi(d);
  for (std::size_t t = 0; t < d; ++t) {
    std::size_t rem = t, f = 0;
    for (std::size_t i = k; i-- > 0;) {
      f += (rem % dto[i]) * from_stride[to[i]];
      rem /= dto[i];
    }
    pi[t] = f;
  }
  const bool rows_perm = static_cast<std::size_t>(a.rows()) == d;
  const bool cols_perm = static_cast<std::size_t>(a.cols()) == d;
  if (!rows_perm && !cols_perm) throw ShapeError("operator does not match subsystem dimension");
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out(i, j) = a(rows_perm ? pi[i] : i, cols_perm ? pi[j] : j);
  return out;
}

}  // namespace qbc
