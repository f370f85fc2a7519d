#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qbc/linalg/errors.hpp"
#include "qbc/linalg/registry.hpp"
#include "qbc/linalg/tolerances.hpp"

namespace qbc {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

Matrix identity(std::size_t d);
Matrix zeros(std::size_t r, std::size_t c);

/// Kronecker product. Throws CapacityError if either output dimension
/// exceeds `cap`.
Matrix kron(const Matrix& a, const Matrix& b, std::size_t cap = 1u << 20);

bool all_finite(const Matrix& m);
bool is_square(const Matrix& m);

/// Max-abs entry of m - m^dagger.
double hermitian_defect(const Matrix& m);

/// (m + m^dagger) / 2. Throws NotHermitianError when the asymmetry exceeds
/// tol.hermitian_eps.
Matrix symmetrize(const Matrix& m, const Tolerances& tol);

struct Eig {
  RealVector values;  // ascending
  Matrix vectors;     // columns
};

/// Hermitian eigendecomposition of the symmetrized input.
Eig herm_eig(const Matrix& m, const Tolerances& tol = {});

/// Result of a Loewner-order test a <= b.
struct LoewnerResult {
  bool holds = true;
  double min_eig = 0.0;  // smallest eigenvalue of b - a
  Vector witness;        // eigenvector of min_eig
};

LoewnerResult loewner_check(const Matrix& a, const Matrix& b, const Tolerances& tol);
bool loewner_leq(const Matrix& a, const Matrix& b, const Tolerances& tol);

/// Principal square root of a PSD matrix. Eigenvalues in [-psd_eps, 0) are
/// clamped to zero; anything below throws NotPsdError.
Matrix psd_sqrt(const Matrix& m, const Tolerances& tol);

bool is_projection(const Matrix& m, double eps);
bool is_unitary(const Matrix& m, double eps);

/// Orthonormal basis of the range of a projection (eigenvalues near 1).
Matrix range_basis(const Matrix& p, const Tolerances& tol);

/// Checks 0 <= m <= I; returns the offending bound or nothing.
std::optional<std::string> predicate_violation(const Matrix& m, const Tolerances& tol);

double frobenius(const Matrix& m);
double trace_real(const Matrix& m);

/// Column-stacking vectorization and its inverse.
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, std::size_t d);

/// Maps full-register indices to (local, rest) index pairs for a variable
/// subset, honoring the order in which the subset is listed.
class SubsystemLayout {
 public:
  SubsystemLayout(const VariableRegistry& reg, std::span<const int> vars);

  std::size_t full_dim() const { return full_dim_; }
  std::size_t local_dim() const { return local_dim_; }
  std::size_t rest_dim() const { return rest_dim_; }

  std::size_t local_of(std::size_t i) const { return local_of_[i]; }
  std::size_t rest_of(std::size_t i) const { return rest_of_[i]; }
  std::size_t full_of(std::size_t l, std::size_t r) const { return full_of_[l * rest_dim_ + r]; }

 private:
  std::size_t full_dim_ = 1, local_dim_ = 1, rest_dim_ = 1;
  std::vector<std::size_t> local_of_, rest_of_, full_of_;
};

/// A_vars tensor identity on the complement, factors in registry order.
Matrix cylindrical_extension(const Matrix& a, std::span<const int> vars, const VariableRegistry& reg);
Matrix cylindrical_extension(const Matrix& a, std::span<const std::string> vars,
                             const VariableRegistry& reg);

/// Reorders the tensor factors of an operator on `from` (a permutation of
/// `to`) so that it acts on `to`. Works for vectors (one column) as well.
Matrix permute_factors(const Matrix& a, std::span<const int> from, std::span<const int> to,
                       const VariableRegistry& reg);

}  // namespace qbc
