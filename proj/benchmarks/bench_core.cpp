#include <benchmark/benchmark.h>

#include <random>

#include "trajstat/counting.hpp"
#include "trajstat/generators.hpp"
#include "trajstat/output_states.hpp"
#include "trajstat/superop.hpp"
#include "trajstat/thermo.hpp"
#include "trajstat/trajectories.hpp"

using namespace trajstat;

namespace {

// Ergodic d-level model with two jump channels, deterministic entries.
LindbladModel sized_model(int d) {
  std::mt19937_64 rng(12345 + d);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat h(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h(i, j) = Cplx(unif(rng), unif(rng));
  h = (0.5 * (h + h.adjoint().eval())).eval();
  std::vector<JumpChannel> jumps;
  for (int k = 0; k < 2; ++k) {
    Mat l(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) l(i, j) = 0.5 * Cplx(unif(rng), unif(rng));
    RVec spin(1);
    spin(0) = k == 0 ? 1.0 : -1.0;
    jumps.push_back({l, spin});
  }
  CVec psi(d);
  for (int i = 0; i < d; ++i) psi(i) = Cplx(unif(rng), unif(rng));
  psi /= psi.norm();
  return LindbladModel::make(h, std::move(jumps), psi);
}

}  // namespace

static void BM_BuildT(benchmark::State& state) {
  const auto m = sized_model(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(build_T(m, TiltPoint::x_tilt(0.5)));
}
BENCHMARK(BM_BuildT)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BM_DominantEigenpair(benchmark::State& state) {
  const auto m = sized_model(static_cast<int>(state.range(0)));
  const SuperOperator w = build_W(m, TiltPoint::s_tilt(0.3));
  for (auto _ : state)
    benchmark::DoNotOptimize(dominant_eigenpair(w, DominantMode::MaxRealPart));
}
BENCHMARK(BM_DominantEigenpair)->Arg(2)->Arg(4)->Arg(8);

static void BM_SuperopExp(benchmark::State& state) {
  const auto m = sized_model(static_cast<int>(state.range(0)));
  const SuperOperator w = build_W(m, TiltPoint::s_tilt(0.3));
  const Mat id = Mat::Identity(m.dim(), m.dim());
  for (auto _ : state)
    benchmark::DoNotOptimize(matrix_exp_apply(w, 5.0, id));
}
BENCHMARK(BM_SuperopExp)->Arg(2)->Arg(4)->Arg(8);

static void BM_CountResolved(benchmark::State& state) {
  const auto m = sized_model(3);
  const int k_max = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(count_resolved_propagate(m, 10.0, k_max));
}
BENCHMARK(BM_CountResolved)->Arg(8)->Arg(16)->Arg(32);

static void BM_SampleFixedTime(benchmark::State& state) {
  const auto m = sized_model(3);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(sample_fixed_time(m, 10.0, n, 7));
}
BENCHMARK(BM_SampleFixedTime)->Arg(10)->Arg(100);

static void BM_ReducedBlock(benchmark::State& state) {
  const auto m = sized_model(2);
  const EnsembleSpec spec = EnsembleSpec::s_ensemble(4.0, Cplx(0.3, 0));
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(reduced_block_finite(m, spec, 1.0, n, n, 5));
}
BENCHMARK(BM_ReducedBlock)->Arg(0)->Arg(1)->Arg(2);

BENCHMARK_MAIN();
