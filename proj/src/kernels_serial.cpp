#include <cmath>
#include <limits>

#include "anchorlab/kernels.hpp"

namespace anchorlab::kernels {

std::size_t grid_point_count(double step) {
  const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  if (n < 3) return 0;
  // pairs (i, j) with i, j >= 1 and i + j <= n - 1
  return (n - 2) * (n - 1) / 2;
}

namespace detail {

double grid_objective(const GridProblem& g, const double u[3]) {
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double lu = std::log(u[k]);
    sum += u[k] * (g.weight_p * (lu - g.log_p[k]) + g.weight_s * (lu - g.log_s[k]));
  }
  return sum;
}

}  // namespace detail

namespace serial {

void linear_logits(const Matrix& weights, const Matrix& features,
                   std::span<const ContextId> contexts, Matrix& out) {
  const std::size_t V = weights.rows;
  const std::size_t d = weights.cols;
  out = Matrix(contexts.size(), V);
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto phi = features.row(contexts[i]);
    for (std::size_t v = 0; v < V; ++v) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += weights(v, c) * phi[c];
      out(i, v) = acc;
    }
  }
}

void linear_weight_grad(const Matrix& row_grads, const Matrix& features,
                        std::span<const ContextId> contexts, double scale, Matrix& out) {
  const std::size_t V = row_grads.cols;
  const std::size_t d = features.cols;
  out = Matrix(V, d);
  for (std::size_t v = 0; v < V; ++v) {
    for (std::size_t c = 0; c < d; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < contexts.size(); ++i) {
        acc += row_grads(i, v) * features(contexts[i], c);
      }
      out(v, c) = scale * acc;
    }
  }
}

void row_log_softmax(const Matrix& logits, Matrix& out) {
  out = Matrix(logits.rows, logits.cols);
  for (std::size_t i = 0; i < logits.rows; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < logits.cols; ++v) m = std::max(m, logits(i, v));
    double sum = 0.0;
    for (std::size_t v = 0; v < logits.cols; ++v) sum += std::exp(logits(i, v) - m);
    const double lse = m + std::log(sum);
    for (std::size_t v = 0; v < logits.cols; ++v) out(i, v) = logits(i, v) - lse;
  }
}

void row_kl(const Matrix& log_p, const Matrix& log_q, std::vector<double>& out) {
  out.assign(log_p.rows, 0.0);
  for (std::size_t i = 0; i < log_p.rows; ++i) {
    double sum = 0.0;
    for (std::size_t v = 0; v < log_p.cols; ++v) {
      sum += std::exp(log_p(i, v)) * (log_p(i, v) - log_q(i, v));
    }
    out[i] = sum > 0.0 ? sum : 0.0;
  }
}

GridArgmin grid_argmin(const GridProblem& problem) {
  const auto n = static_cast<long>(std::llround(1.0 / problem.step));
  GridArgmin best;
  best.value = std::numeric_limits<double>::infinity();
  for (long i = 1; i <= n - 2; ++i) {
    for (long j = 1; i + j <= n - 1; ++j) {
      const double a = static_cast<double>(i) * problem.step;
      const double b = static_cast<double>(j) * problem.step;
      const double u[3] = {a, b, 1.0 - a - b};
      const double value = detail::grid_objective(problem, u);
      ++best.visited;
      if (value < best.value) {
        best.value = value;
        best.point[0] = u[0];
        best.point[1] = u[1];
        best.point[2] = u[2];
      }
    }
  }
  return best;
}

}  // namespace serial
}  // namespace anchorlab::kernels
