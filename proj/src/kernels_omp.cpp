#include <omp.h>

#include <cmath>
#include <limits>

#include "anchorlab/kernels.hpp"

namespace anchorlab::kernels {

namespace detail {
double grid_objective(const GridProblem& g, const double u[3]);
}

namespace omp {

void linear_logits(const Matrix& weights, const Matrix& features,
                   std::span<const ContextId> contexts, Matrix& out) {
  const std::size_t V = weights.rows;
  const std::size_t d = weights.cols;
  const auto n = static_cast<std::ptrdiff_t>(contexts.size());
  out = Matrix(contexts.size(), V);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* phi = features.data.data() + contexts[i] * d;
    double* dst = out.data.data() + i * V;
    for (std::size_t v = 0; v < V; ++v) {
      const double* w = weights.data.data() + v * d;
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += w[c] * phi[c];
      dst[v] = acc;
    }
  }
}

void linear_weight_grad(const Matrix& row_grads, const Matrix& features,
                        std::span<const ContextId> contexts, double scale, Matrix& out) {
  const std::size_t V = row_grads.cols;
  const std::size_t d = features.cols;
  const std::size_t n = contexts.size();
  out = Matrix(V, d);
  // One thread owns each output row v; within it the context sum runs in
  // index order, exactly as in the serial loop.
  const auto rows = static_cast<std::ptrdiff_t>(V);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t v = 0; v < rows; ++v) {
    std::vector<double> acc(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = row_grads(i, v);
      const double* phi = features.data.data() + contexts[i] * d;
      for (std::size_t c = 0; c < d; ++c) acc[c] += g * phi[c];
    }
    for (std::size_t c = 0; c < d; ++c) out(v, c) = scale * acc[c];
  }
}

void row_log_softmax(const Matrix& logits, Matrix& out) {
  out = Matrix(logits.rows, logits.cols);
  const auto n = static_cast<std::ptrdiff_t>(logits.rows);
  const std::size_t V = logits.cols;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* z = logits.data.data() + i * V;
    double* dst = out.data.data() + i * V;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < V; ++v) m = std::max(m, z[v]);
    double sum = 0.0;
    for (std::size_t v = 0; v < V; ++v) sum += std::exp(z[v] - m);
    const double lse = m + std::log(sum);
    for (std::size_t v = 0; v < V; ++v) dst[v] = z[v] - lse;
  }
}

void row_kl(const Matrix& log_p, const Matrix& log_q, std::vector<double>& out) {
  out.assign(log_p.rows, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(log_p.rows);
  const std::size_t V = log_p.cols;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* lp = log_p.data.data() + i * V;
    const double* lq = log_q.data.data() + i * V;
    double sum = 0.0;
    for (std::size_t v = 0; v < V; ++v) sum += std::exp(lp[v]) * (lp[v] - lq[v]);
    out[i] = sum > 0.0 ? sum : 0.0;
  }
}

GridArgmin grid_argmin(const GridProblem& problem) {
  const auto n = static_cast<long>(std::llround(1.0 / problem.step));
  GridArgmin best;
  best.value = std::numeric_limits<double>::infinity();
  long best_i = -1;
  long best_j = -1;

#pragma omp parallel
  {
    GridArgmin local;
    local.value = std::numeric_limits<double>::infinity();
    long local_i = -1;
    long local_j = -1;
#pragma omp for schedule(dynamic, 8) nowait
    for (long i = 1; i <= n - 2; ++i) {
      for (long j = 1; i + j <= n - 1; ++j) {
        const double a = static_cast<double>(i) * problem.step;
        const double b = static_cast<double>(j) * problem.step;
        const double u[3] = {a, b, 1.0 - a - b};
        const double value = detail::grid_objective(problem, u);
        ++local.visited;
        // A thread receives its chunks in increasing i, so strict < keeps the
        // first minimizer it sees; the merge below breaks ties by index.
        if (value < local.value) {
          local.value = value;
          local.point[0] = u[0];
          local.point[1] = u[1];
          local.point[2] = u[2];
          local_i = i;
          local_j = j;
        }
      }
    }
#pragma omp critical(anchorlab_grid_merge)
    {
      best.visited += local.visited;
      const bool earlier = local_i >= 0 && (best_i < 0 || local_i < best_i ||
                                             (local_i == best_i && local_j < best_j));
      if (local_i >= 0 && (local.value < best.value || (local.value == best.value && earlier))) {
        best.value = local.value;
        best.point[0] = local.point[0];
        best.point[1] = local.point[1];
        best.point[2] = local.point[2];
        best_i = local_i;
        best_j = local_j;
      }
    }
  }
  return best;
}

}  // namespace omp
}  // namespace anchorlab::kernels
