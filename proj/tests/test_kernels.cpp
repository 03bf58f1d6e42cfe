#include <cmath>
#include <omp.h>

#include "anchorlab/kernels.hpp"
#include "anchorlab/rng.hpp"
#include "doctest.h"

using namespace anchorlab;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.normal();
  return m;
}

std::vector<ContextId> random_contexts(Rng& rng, std::size_t n, std::size_t range) {
  std::vector<ContextId> ctx(n);
  for (auto& c : ctx) c = static_cast<ContextId>(rng.uniform_int(0, range - 1));
  return ctx;
}

}  // namespace

TEST_CASE("parallel kernels match the serial ones bitwise") {
  for (int threads : {1, 2, 3, 7}) {
    omp_set_num_threads(threads);
    Rng rng(static_cast<std::uint64_t>(threads));
    Matrix w = random_matrix(rng, 8, 16);
    Matrix phi = random_matrix(rng, 300, 16);
    std::vector<ContextId> ctx = random_contexts(rng, 257, 300);

    Matrix a(ctx.size(), 8), b(ctx.size(), 8);
    kernels::serial::linear_logits(w, phi, ctx, a);
    kernels::omp::linear_logits(w, phi, ctx, b);
    CHECK(a == b);

    Matrix la(a.rows, a.cols), lb(a.rows, a.cols);
    kernels::serial::row_log_softmax(a, la);
    kernels::omp::row_log_softmax(a, lb);
    CHECK(la == lb);

    Matrix q = random_matrix(rng, a.rows, a.cols);
    Matrix lq(a.rows, a.cols);
    kernels::serial::row_log_softmax(q, lq);
    std::vector<double> ka, kb;
    kernels::serial::row_kl(la, lq, ka);
    kernels::omp::row_kl(la, lq, kb);
    CHECK(ka == kb);
    for (double v : ka) CHECK(v >= 0.0);

    Matrix grads = random_matrix(rng, ctx.size(), 8);
    Matrix ga(8, 16), gb(8, 16);
    kernels::serial::linear_weight_grad(grads, phi, ctx, 1.0 / 257, ga);
    kernels::omp::linear_weight_grad(grads, phi, ctx, 1.0 / 257, gb);
    CHECK(ga == gb);

    kernels::GridProblem prob{};
    for (int i = 0; i < 3; ++i) {
      prob.log_p[i] = std::log(0.2 + 0.1 * i);
      prob.log_s[i] = std::log(0.5 - 0.1 * i);
    }
    prob.weight_p = 0.3;
    prob.weight_s = 0.7;
    prob.step = 0.005;
    kernels::GridArgmin ra = kernels::serial::grid_argmin(prob);
    kernels::GridArgmin rb = kernels::omp::grid_argmin(prob);
    CHECK(ra.value == rb.value);
    CHECK(ra.visited == rb.visited);
    for (int i = 0; i < 3; ++i) CHECK(ra.point[i] == rb.point[i]);
  }
}

TEST_CASE("linear_logits computes W phi") {
  Matrix w(2, 2);
  w(0, 0) = 1;
  w(0, 1) = 2;
  w(1, 0) = -1;
  w(1, 1) = 0.5;
  Matrix phi(1, 2);
  phi(0, 0) = 3;
  phi(0, 1) = 4;
  std::vector<ContextId> ctx{0};
  Matrix out(1, 2);
  kernels::serial::linear_logits(w, phi, ctx, out);
  CHECK(out(0, 0) == 11);
  CHECK(out(0, 1) == -1);
}

TEST_CASE("grid argmin ties go to the first point in scan order") {
  // Equal weights and p = s = uniform: every point with the same value as the
  // centre competes; the winner must be stable across modes.
  kernels::GridProblem prob{};
  for (int i = 0; i < 3; ++i) prob.log_p[i] = prob.log_s[i] = std::log(1.0 / 3.0);
  prob.weight_p = prob.weight_s = 0.5;
  prob.step = 0.1;
  omp_set_num_threads(4);
  kernels::GridArgmin a = kernels::serial::grid_argmin(prob);
  kernels::GridArgmin b = kernels::omp::grid_argmin(prob);
  for (int i = 0; i < 3; ++i) CHECK(a.point[i] == b.point[i]);
}

TEST_CASE("grid_point_count") {
  CHECK(kernels::grid_point_count(0.1) == 36);
  CHECK(kernels::grid_point_count(0.005) == 19701);
}
