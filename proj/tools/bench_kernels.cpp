// Serial reference vs OpenMP subsystem kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "qbc/linalg/kernels.hpp"
#include "qbc/linalg/registry.hpp"

using namespace qbc;

namespace {

struct Fixture {
  VariableRegistry reg;
  std::vector<int> vars;
  SubsystemLayout lay;
  Matrix u, m;

  explicit Fixture(int n)
      : reg(make_vars(n)), vars{0, n / 2}, lay(reg, vars), u(random(4, 1)), m(random(std::size_t{1} << n, 2)) {}

  static std::vector<VariableDecl> make_vars(int n) {
    std::vector<VariableDecl> v;
    for (int i = 0; i < n; ++i) v.push_back({"q" + std::to_string(i), 2});
    return v;
  }
  static Matrix random(std::size_t d, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Matrix a(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
    return a;
  }
};

template <Matrix (*F)(const Matrix&, const SubsystemLayout&, const Matrix&)>
void BM_apply_left(benchmark::State& st) {
  Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(F(f.u, f.lay, f.m));
}

template <Matrix (*F)(const Matrix&, const SubsystemLayout&)>
void BM_reset(benchmark::State& st) {
  Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(F(f.m, f.lay));
}

template <Matrix (*F)(const Matrix&, const SubsystemLayout&)>
void BM_embed(benchmark::State& st) {
  Fixture f(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(F(f.u, f.lay));
}

}  // namespace

BENCHMARK(BM_apply_left<kernels::serial::apply_left>)->Name("apply_left/serial")->DenseRange(4, 9, 1);
BENCHMARK(BM_apply_left<kernels::omp::apply_left>)->Name("apply_left/omp")->DenseRange(4, 9, 1);
BENCHMARK(BM_reset<kernels::serial::reset>)->Name("reset/serial")->DenseRange(4, 9, 1);
BENCHMARK(BM_reset<kernels::omp::reset>)->Name("reset/omp")->DenseRange(4, 9, 1);
BENCHMARK(BM_embed<kernels::serial::embed>)->Name("embed/serial")->DenseRange(4, 9, 1);
BENCHMARK(BM_embed<kernels::omp::embed>)->Name("embed/omp")->DenseRange(4, 9, 1);

BENCHMARK_MAIN();
