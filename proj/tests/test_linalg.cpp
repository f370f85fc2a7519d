#include <gtest/gtest.h>

#include "qbc/linalg/errors.hpp"
#include "qbc/linalg/kernels.hpp"
#include "qbc/linalg/registry.hpp"
#include "support.hpp"

using namespace qbc;
using namespace qbc::testing;

namespace {

VariableRegistry reg3() { return VariableRegistry({{"a", 2}, {"b", 3}, {"c", 2}}); }

// Explicit cylindrical extension: <x|A_ext|y> = <x_S|A|y_S> when x, y agree off S.
Matrix ext_oracle(const Matrix& a, const std::vector<int>& vars, const VariableRegistry& reg) {
  const auto dims = reg.dims();
  const std::size_t d = reg.dim();
  auto digits = [&](std::size_t x) {
    std::vector<std::size_t> out(dims.size());
    for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
      out[k] = x % dims[k];
      x /= dims[k];
    }
    return out;
  };
  auto local = [&](const std::vector<std::size_t>& dg) {
    std::size_t l = 0;
    for (int v : vars) l = l * dims[v] + dg[v];
    return l;
  };
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t x = 0; x < d; ++x)
    for (std::size_t y = 0; y < d; ++y) {
      auto dx = digits(x), dy = digits(y);
      bool same = true;
      for (std::size_t k = 0; k < dims.size(); ++k)
        if (std::find(vars.begin(), vars.end(), static_cast<int>(k)) == vars.end() && dx[k] != dy[k]) same = false;
      if (same) m(x, y) = a(local(dx), local(dy));
    }
  return m;
}

}  // namespace

TEST(Kron, MatchesDefinition) {
  Rng rng(1);
  Matrix a = gaussian(rng, 2, 3), b = gaussian(rng, 3, 2);
  Matrix k = kron(a, b);
  ASSERT_EQ(k.rows(), 6);
  ASSERT_EQ(k.cols(), 6);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 2; ++c) EXPECT_EQ(k(i * 3 + r, j * 2 + c), a(i, j) * b(r, c));
}

TEST(Kron, CapacityError) { EXPECT_THROW(kron(identity(64), identity(64), 1024), CapacityError); }

TEST(Loewner, OrderAndWitness) {
  Tolerances tol;
  Matrix p = Matrix::Zero(2, 2), q = Matrix::Zero(2, 2);
  p(0, 0) = 1;
  q(1, 1) = 1;
  EXPECT_TRUE(loewner_leq(0.5 * p, p, tol));
  auto r = loewner_check(p, q, tol);
  EXPECT_FALSE(r.holds);
  EXPECT_NEAR(r.min_eig, -1.0, 1e-12);
  EXPECT_NEAR(std::abs(r.witness(0)), 1.0, 1e-12);
  // Slack of psd_eps is allowed.
  EXPECT_TRUE(loewner_leq(p + 1e-10 * identity(2), p, tol));
  EXPECT_FALSE(loewner_leq(p + 1e-6 * identity(2), p, tol));
}

TEST(Eig, AscendingAndReconstructs) {
  Rng rng(2);
  Matrix a = random_predicate(rng, 5);
  Eig e = herm_eig(a);
  for (int i = 1; i < 5; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
  Matrix back = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  EXPECT_LT((back - a).norm(), 1e-12);
}

TEST(Eig, RejectsNonHermitian) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 1;
  EXPECT_THROW(herm_eig(a), NotHermitianError);
}

TEST(PsdSqrt, SquaresBack) {
  Rng rng(3);
  Tolerances tol;
  Matrix a = random_state(rng, 4);
  Matrix s = psd_sqrt(a, tol);
  EXPECT_LT((s * s - a).norm(), 1e-12);
  EXPECT_THROW(psd_sqrt(-identity(2), tol), NotPsdError);
}

TEST(Predicates, ProjectionUnitaryBounds) {
  Rng rng(4);
  Tolerances tol;
  EXPECT_TRUE(is_unitary(random_unitary(rng, 4), 1e-10));
  EXPECT_FALSE(is_unitary(2 * identity(2), 1e-10));
  Matrix p = Matrix::Zero(3, 3);
  p(1, 1) = 1;
  EXPECT_TRUE(is_projection(p, 1e-12));
  EXPECT_FALSE(is_projection(0.5 * p, 1e-12));
  EXPECT_FALSE(predicate_violation(random_predicate(rng, 3), tol).has_value());
  EXPECT_TRUE(predicate_violation(2 * identity(2), tol).has_value());
  EXPECT_TRUE(predicate_violation(-identity(2), tol).has_value());
}

TEST(Vec, ColumnStackingRoundTrip) {
  Rng rng(5);
  Matrix a = gaussian(rng, 3, 3);
  Vector v = vec(a);
  EXPECT_EQ(v(1), a(1, 0));
  EXPECT_EQ(v(3), a(0, 1));
  EXPECT_EQ(unvec(v, 3), a);
}

TEST(Registry, OrderAndLookup) {
  VariableRegistry r = reg3();
  EXPECT_EQ(r.dim(), 12u);
  EXPECT_EQ(r.index_of("c"), 2);
  EXPECT_THROW(r.index_of("z"), UnknownVariableError);
  std::vector<int> idx{2, 0};
  EXPECT_EQ(r.sorted(idx), (std::vector<int>{0, 2}));
  EXPECT_THROW(VariableRegistry({{"a", 32}, {"b", 64}}, 1024), CapacityError);
}

TEST(CylindricalExtension, MatchesOracleForPermutedSubsets) {
  Rng rng(6);
  VariableRegistry r = reg3();
  for (std::vector<int> vars : {std::vector<int>{1}, {2, 0}, {0, 2}, {2, 1, 0}, {1, 2}}) {
    Matrix a = gaussian(rng, r.dim_of(vars), r.dim_of(vars));
    EXPECT_LT((cylindrical_extension(a, vars, r) - ext_oracle(a, vars, r)).norm(), 1e-12);
  }
}

TEST(Kernels, SerialAndOmpAgreeWithExplicitExtension) {
  Rng rng(7);
  VariableRegistry r = reg3();
  for (std::vector<int> vars : {std::vector<int>{1}, {2, 0}, {0, 1, 2}}) {
    SubsystemLayout lay(r, vars);
    const std::size_t ld = lay.local_dim();
    Matrix u = gaussian(rng, ld, ld), m = gaussian(rng, 12, 12);
    Matrix e = ext_oracle(u, vars, r);
    EXPECT_LT((kernels::serial::apply_left(u, lay, m) - e * m).norm(), 1e-11);
    EXPECT_LT((kernels::omp::apply_left(u, lay, m) - e * m).norm(), 1e-11);
    EXPECT_LT((kernels::serial::apply_right(m, u, lay) - m * e.adjoint()).norm(), 1e-11);
    EXPECT_LT((kernels::omp::apply_right(m, u, lay) - m * e.adjoint()).norm(), 1e-11);
    EXPECT_LT((kernels::serial::embed(u, lay) - e).norm(), 1e-12);
    EXPECT_LT((kernels::omp::embed(u, lay) - e).norm(), 1e-12);
    EXPECT_LT((kernels::conjugate(u, lay, m) - e * m * e.adjoint()).norm(), 1e-10);
  }
}

TEST(Kernels, ResetMatchesKrausSum) {
  Rng rng(8);
  VariableRegistry r = reg3();
  std::vector<int> vars{1};
  SubsystemLayout lay(r, vars);
  Matrix rho = random_state(rng, 12), x = random_predicate(rng, 12);
  // Oracle: sum_k |0><k| on b.
  Matrix want = Matrix::Zero(12, 12), want_adj = Matrix::Zero(12, 12);
  for (int k = 0; k < 3; ++k) {
    Matrix kk = Matrix::Zero(3, 3);
    kk(0, k) = 1;
    Matrix e = ext_oracle(kk, vars, r);
    want += e * rho * e.adjoint();
    want_adj += e.adjoint() * x * e;
  }
  EXPECT_LT((kernels::serial::reset(rho, lay) - want).norm(), 1e-12);
  EXPECT_LT((kernels::omp::reset(rho, lay) - want).norm(), 1e-12);
  EXPECT_LT((kernels::serial::reset_adjoint(x, lay) - want_adj).norm(), 1e-12);
  EXPECT_LT((kernels::omp::reset_adjoint(x, lay) - want_adj).norm(), 1e-12);
}

TEST(Kernels, LargeRegisterDispatchAgrees) {
  Rng rng(9);
  std::vector<VariableDecl> v;
  for (int i = 0; i < 7; ++i) v.push_back({"q" + std::to_string(i), 2});
  VariableRegistry r(v);
  std::vector<int> vars{5, 1};
  SubsystemLayout lay(r, vars);
  Matrix u = random_unitary(rng, 4), m = gaussian(rng, 128, 128);
  EXPECT_LT((kernels::apply_left(u, lay, m) - kernels::serial::apply_left(u, lay, m)).norm(), 1e-10);
  EXPECT_LT((kernels::reset(m, lay) - kernels::serial::reset(m, lay)).norm(), 1e-10);
}

TEST(PermuteFactors, SwapsTensorOrder) {
  VariableRegistry r({{"a", 2}, {"b", 3}});
  Rng rng(10);
  Matrix x = gaussian(rng, 2, 2), y = gaussian(rng, 3, 3);
  std::vector<int> from{1, 0}, to{0, 1};
  EXPECT_LT((permute_factors(kron(y, x), from, to, r) - kron(x, y)).norm(), 1e-12);
}
