#include "qbc/linalg/kernels.hpp"

namespace qbc::kernels::serial {

namespace {
void check_rows(const Matrix& m, const SubsystemLayout& lay) {
  if (static_cast<std::size_t>(m.rows()) != lay.full_dim())
    throw ShapeError("kernel operand has wrong dimension");
}
void check_local(const Matrix& u, const SubsystemLayout& lay) {
  if (static_cast<std::size_t>(u.rows()) != lay.local_dim() ||
      static_cast<std::size_t>(u.cols()) != lay.local_dim())
    throw ShapeError("local operator does not match subsystem dimension");
}
}  // namespace

Matrix apply_left(const Matrix& u, const SubsystemLayout& lay, const Matrix& m) {
  check_local(u, lay);
  check_rows(m, lay);
  const auto d = static_cast<Eigen::Index>(lay.full_dim());
  const auto ld = lay.local_dim();
  Matrix out(d, m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      const std::size_t l = lay.local_of(i), r = lay.rest_of(i);
      cplx acc = 0;
      for (std::size_t k = 0; k < ld; ++k) acc += u(l, k) * m(lay.full_of(k, r), j);
      out(i, j) = acc;
    }
  return out;
}

Matrix apply_right(const Matrix& m, const Matrix& u, const SubsystemLayout& lay) {
  check_local(u, lay);
  if (static_cast<std::size_t>(m.cols()) != lay.full_dim())
    throw ShapeError("kernel operand has wrong dimension");
  const auto d = static_cast<Eigen::Index>(lay.full_dim());
  const auto ld = lay.local_dim();
  Matrix out(m.rows(), d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const std::size_t l = lay.local_of(j), r = lay.rest_of(j);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      cplx acc = 0;
      for (std::size_t k = 0; k < ld; ++k) acc += m(i, lay.full_of(k, r)) * std::conj(u(l, k));
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix embed(const Matrix& a, const SubsystemLayout& lay) {
  check_local(a, lay);
  const auto d = static_cast<Eigen::Index>(lay.full_dim());
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      if (lay.rest_of(i) == lay.rest_of(j)) out(i, j) = a(lay.local_of(i), lay.local_of(j));
  return out;
}

Matrix reset(const Matrix& rho, const SubsystemLayout& lay) {
  check_rows(rho, lay);
  const auto d = static_cast<Eigen::Index>(lay.full_dim());
  const auto ld = lay.local_dim();
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (lay.local_of(j) != 0) continue;
    const std::size_t rj = lay.rest_of(j);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (lay.local_of(i) != 0) continue;
      const std::size_t ri = lay.rest_of(i);
      cplx acc = 0;
      for (std::size_t x = 0; x < ld; ++x) acc += rho(lay.full_of(x, ri), lay.full_of(x, rj));
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix reset_adjoint(const Matrix& x, const SubsystemLayout& lay) {
  check_rows(x, lay);
  const auto d = static_cast<Eigen::Index>(lay.full_dim());
  Matrix out = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i)
      if (lay.local_of(i) == lay.local_of(j))
        out(i, j) = x(lay.full_of(0, lay.rest_of(i)), lay.full_of(0, lay.rest_of(j)));
  return out;
}

}  // namespace qbc::kernels::serial
