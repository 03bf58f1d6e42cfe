#pragma once

// Data-parallel inner loops. Each kernel exists twice: a plain serial
// reference under kernels::serial and an OpenMP version under kernels::omp.
// Every output element is produced by one thread with the same summation order
// as the serial loop, so both variants agree bitwise regardless of thread
// count. Production code calls the omp variants; tests hold them to the serial
// ones and bench/ compares their speed.

#include <cstddef>
#include <span>
#include <vector>

#include "anchorlab/matrix.hpp"
#include "anchorlab/types.hpp"

namespace anchorlab::kernels {

enum class Exec { Serial, Parallel };

// Result of the exhaustive V=3 simplex grid search.
struct GridArgmin {
  double point[3] = {0.0, 0.0, 0.0};
  double value = 0.0;
  std::size_t visited = 0;
};

// Objective minimized by the grid search: w_p KL(u||p) + w_s KL(u||s), with
// p and s given by their logs.
struct GridProblem {
  double log_p[3];
  double log_s[3];
  double weight_p;
  double weight_s;
  double step;
};

namespace serial {

// out(i, v) = sum_c weights(v, c) * features(contexts[i], c)
void linear_logits(const Matrix& weights, const Matrix& features,
                   std::span<const ContextId> contexts, Matrix& out);
// out(v, c) = scale * sum_i row_grads(i, v) * features(contexts[i], c)
void linear_weight_grad(const Matrix& row_grads, const Matrix& features,
                        std::span<const ContextId> contexts, double scale, Matrix& out);
// out(i, :) = logits(i, :) - logsumexp(logits(i, :))
void row_log_softmax(const Matrix& logits, Matrix& out);
// out[i] = sum_v exp(log_p(i, v)) * (log_p(i, v) - log_q(i, v)), clamped at 0
void row_kl(const Matrix& log_p, const Matrix& log_q, std::vector<double>& out);
GridArgmin grid_argmin(const GridProblem& problem);

}  // namespace serial

namespace omp {

void linear_logits(const Matrix& weights, const Matrix& features,
                   std::span<const ContextId> contexts, Matrix& out);
void linear_weight_grad(const Matrix& row_grads, const Matrix& features,
                        std::span<const ContextId> contexts, double scale, Matrix& out);
void row_log_softmax(const Matrix& logits, Matrix& out);
void row_kl(const Matrix& log_p, const Matrix& log_q, std::vector<double>& out);
GridArgmin grid_argmin(const GridProblem& problem);

}  // namespace omp

// Number of interior grid points (a, b, 1 - a - b), all coordinates >= step.
std::size_t grid_point_count(double step);

}  // namespace anchorlab::kernels
