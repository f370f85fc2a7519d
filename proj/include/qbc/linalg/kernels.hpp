#pragma once

#include "qbc/linalg/matrix.hpp"

namespace qbc {

/// Subsystem kernels. Each takes a local operator and a layout and acts on a
/// full-register matrix without materializing the cylindrical extension.
///
/// `serial` is the reference implementation; `omp` parallelizes over rows.
/// The unqualified entry points dispatch to `omp` when the work is large
/// enough to benefit.
namespace kernels {

namespace serial {
Matrix apply_left(const Matrix& u, const SubsystemLayout& lay, const Matrix& m);   // U_ext * M
Matrix apply_right(const Matrix& m, const Matrix& u, const SubsystemLayout& lay);  // M * U_ext^dagger
Matrix embed(const Matrix& a, const SubsystemLayout& lay);
Matrix reset(const Matrix& rho, const SubsystemLayout& lay);
Matrix reset_adjoint(const Matrix& x, const SubsystemLayout& lay);
}  // namespace serial

namespace omp {
Matrix apply_left(const Matrix& u, const SubsystemLayout& lay, const Matrix& m);
Matrix apply_right(const Matrix& m, const Matrix& u, const SubsystemLayout& lay);
Matrix embed(const Matrix& a, const SubsystemLayout& lay);
Matrix reset(const Matrix& rho, const SubsystemLayout& lay);
Matrix reset_adjoint(const Matrix& x, const SubsystemLayout& lay);
}  // namespace omp

Matrix apply_left(const Matrix& u, const SubsystemLayout& lay, const Matrix& m);
Matrix apply_right(const Matrix& m, const Matrix& u, const SubsystemLayout& lay);
Matrix embed(const Matrix& a, const SubsystemLayout& lay);
Matrix reset(const Matrix& rho, const SubsystemLayout& lay);
Matrix reset_adjoint(const Matrix& x, const SubsystemLayout& lay);

/// K_ext * M * K_ext^dagger.
Matrix conjugate(const Matrix& k, const SubsystemLayout& lay, const Matrix& m);

}  // namespace kernels
}  // namespace qbc
