// Serial reference kernels against their OpenMP counterparts.
#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>

#include "anchorlab/kernels.hpp"
#include "anchorlab/rng.hpp"

using namespace anchorlab;

namespace {

Matrix random_matrix(std::uint64_t seed, std::size_t r, std::size_t c) {
  Rng rng(seed);
  Matrix m(r, c);
  for (double& v : m.data) v = rng.normal();
  return m;
}

std::vector<ContextId> iota_contexts(std::size_t n) {
  std::vector<ContextId> ctx(n);
  for (std::size_t i = 0; i < n; ++i) ctx[i] = i;
  return ctx;
}

constexpr std::size_t kV = 64;
constexpr std::size_t kD = 128;

template <bool Parallel>
void BM_linear_logits(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix w = random_matrix(1, kV, kD);
  Matrix phi = random_matrix(2, n, kD);
  auto ctx = iota_contexts(n);
  Matrix out(n, kV);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::linear_logits(w, phi, ctx, out);
    else kernels::serial::linear_logits(w, phi, ctx, out);
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_linear_weight_grad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix grads = random_matrix(3, n, kV);
  Matrix phi = random_matrix(4, n, kD);
  auto ctx = iota_contexts(n);
  Matrix out(kV, kD);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::linear_weight_grad(grads, phi, ctx, 1.0 / n, out);
    else kernels::serial::linear_weight_grad(grads, phi, ctx, 1.0 / n, out);
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_row_log_softmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix logits = random_matrix(5, n, kV);
  Matrix out(n, kV);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::row_log_softmax(logits, out);
    else kernels::serial::row_log_softmax(logits, out);
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_row_kl(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Matrix lp(n, kV), lq(n, kV);
  kernels::serial::row_log_softmax(random_matrix(6, n, kV), lp);
  kernels::serial::row_log_softmax(random_matrix(7, n, kV), lq);
  std::vector<double> out;
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::row_kl(lp, lq, out);
    else kernels::serial::row_kl(lp, lq, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool Parallel>
void BM_grid_argmin(benchmark::State& state) {
  kernels::GridProblem prob{};
  const double p[3] = {0.2, 0.3, 0.5};
  const double s[3] = {0.6, 0.3, 0.1};
  for (int i = 0; i < 3; ++i) {
    prob.log_p[i] = std::log(p[i]);
    prob.log_s[i] = std::log(s[i]);
  }
  prob.weight_p = 0.5;
  prob.weight_s = 0.5;
  prob.step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    kernels::GridArgmin g = Parallel ? kernels::omp::grid_argmin(prob) : kernels::serial::grid_argmin(prob);
    benchmark::DoNotOptimize(g.value);
  }
}

}  // namespace

BENCHMARK(BM_linear_logits<false>)->Name("linear_logits/serial")->Arg(256)->Arg(4096);
BENCHMARK(BM_linear_logits<true>)->Name("linear_logits/omp")->Arg(256)->Arg(4096);
BENCHMARK(BM_linear_weight_grad<false>)->Name("linear_weight_grad/serial")->Arg(256)->Arg(4096);
BENCHMARK(BM_linear_weight_grad<true>)->Name("linear_weight_grad/omp")->Arg(256)->Arg(4096);
BENCHMARK(BM_row_log_softmax<false>)->Name("row_log_softmax/serial")->Arg(4096)->Arg(65536);
BENCHMARK(BM_row_log_softmax<true>)->Name("row_log_softmax/omp")->Arg(4096)->Arg(65536);
BENCHMARK(BM_row_kl<false>)->Name("row_kl/serial")->Arg(4096)->Arg(65536);
BENCHMARK(BM_row_kl<true>)->Name("row_kl/omp")->Arg(4096)->Arg(65536);
BENCHMARK(BM_grid_argmin<false>)->Name("grid_argmin/serial")->Arg(200)->Arg(1000);
BENCHMARK(BM_grid_argmin<true>)->Name("grid_argmin/omp")->Arg(200)->Arg(1000);

BENCHMARK_MAIN();
