// Shared helpers for the unit and acceptance tests: random operators, DSL
// literals and random programs over small registries.
#pragma once

#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "qbc/lang/ast.hpp"
#include "qbc/lang/parser.hpp"
#include "qbc/linalg/matrix.hpp"

namespace qbc::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int pick(Rng& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

inline Matrix gaussian(Rng& rng, std::size_t r, std::size_t c) {
  std::normal_distribution<double> g;
  Matrix a(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a;
}

/// Haar-ish unitary from the QR of a Gaussian matrix.
inline Matrix random_unitary(Rng& rng, std::size_t d) {
  Matrix a = gaussian(rng, d, d);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t i = 0; i < d; ++i) q.col(i) *= std::polar(1.0, std::arg(r(i, i)));
  return q;
}

/// Density operator of random rank with trace `tr`.
inline Matrix random_state(Rng& rng, std::size_t d, double tr = 1.0) {
  Matrix a = gaussian(rng, d, 1 + pick(rng, static_cast<int>(d)));
  Matrix rho = a * a.adjoint();
  return rho * (tr / rho.trace().real());
}

/// Hermitian with spectrum in [0, 1].
inline Matrix random_predicate(Rng& rng, std::size_t d) {
  Matrix u = random_unitary(rng, d);
  Matrix dg = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < d; ++i) dg(i, i) = uniform(rng);
  Matrix p = u * dg * u.adjoint();
  return (p + p.adjoint()) / 2.0;
}

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Matrix literal in the expression language, entries printed at full precision.
inline std::string literal(const Matrix& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += i ? ", [" : "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const cplx z = m(i, j);
      std::string e;
      if (z.imag() == 0.0) {
        e = num(z.real());
      } else {
        const double im = std::abs(z.imag());
        e = "(" + num(z.real()) + (z.imag() < 0 ? " - " : " + ") + num(im) + "i)";
      }
      s += (j ? ", " : "") + e;
    }
    s += "]";
  }
  return s + "]";
}

inline Matrix ry(double theta) {
  Matrix m(2, 2);
  m << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2);
  return m;
}

/// Random programs over a registry of qubits. Unitaries are literals; a loop
/// body rotates the guard qubit by Ry(t), t in [0.7, 2.6].
class ProgramGen {
 public:
  ProgramGen(Rng& rng, std::vector<std::string> vars) : rng_(rng), vars_(std::move(vars)) {}

  ProgPtr program(int depth, bool force_while = false) {
    if (force_while) return loop(depth);
    if (depth <= 1) return leaf();
    switch (pick(rng_, 5)) {
      case 0: return leaf();
      case 1: return pg::seq({program(depth - 1), program(depth - 1)});
      case 2: {
        const std::string v = var();
        return pg::case_std({v}, {"0", "1"}, {program(depth - 1), program(depth - 1)});
      }
      case 3: {
        const std::string v = var();
        if (pick(rng_, 2)) return pg::if_({v}, nullptr, program(depth - 1), program(depth - 1));
        return pg::if_({v}, nullptr, program(depth - 1));
      }
      default: return loop(depth);
    }
  }

  ProgPtr leaf() {
    switch (pick(rng_, 5)) {
      case 0: return pg::skip();
      case 1: return pg::init({var()});
      case 2:
        if (vars_.size() > 1) return pg::unitary(vars_, parse_expr(literal(random_unitary(rng_, 1u << vars_.size()))));
        [[fallthrough]];
      default: return pg::unitary({var()}, parse_expr(literal(random_unitary(rng_, 2))));
    }
  }

  ProgPtr loop(int depth) {
    const std::string v = var();
    std::vector<ProgPtr> body{pg::unitary({v}, parse_expr(literal(ry(uniform(rng_, 0.7, 2.6)))))};
    if (depth > 2 && vars_.size() > 1 && pick(rng_, 2)) {
      std::string other = vars_[0] == v ? vars_[1] : vars_[0];
      body.push_back(pg::unitary({other}, parse_expr(literal(random_unitary(rng_, 2)))));
    }
    return pg::while_({v}, nullptr, body.size() == 1 ? body[0] : pg::seq(body));
  }

  std::string var() { return vars_[pick(rng_, static_cast<int>(vars_.size()))]; }

 private:
  Rng& rng_;
  std::vector<std::string> vars_;
};

inline bool has_while(const ProgPtr& p) {
  if (!p) return false;
  if (p->kind == ProgKind::While) return true;
  for (const auto& b : p->body)
    if (has_while(b)) return true;
  return false;
}

}  // namespace qbc::testing
