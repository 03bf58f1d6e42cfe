#include "anchorlab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "anchorlab/rng.hpp"

namespace anchorlab {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::ShapeError, std::string(what) + ": length " + std::to_string(a) +
                                           " vs " + std::to_string(b));
  }
}

namespace {

void require_min_length(std::size_t n, const char* what) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, std::string(what) + " needs length >= 2");
}

}  // namespace

ProbVector::ProbVector(std::vector<double> values) : values_(std::move(values)) {
  require_min_length(values_.size(), "ProbVector");
  double sum = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::InvalidInput, "ProbVector entries must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw Error(ErrorKind::InvalidInput, "ProbVector entries sum to " + std::to_string(sum));
  }
  apply_floor();
}

ProbVector ProbVector::from_weights(std::vector<double> weights) {
  require_min_length(weights.size(), "ProbVector");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorKind::InvalidInput, "weights must be finite and nonnegative");
    }
    sum += w;
  }
  if (!(sum > 0.0)) throw Error(ErrorKind::DegenerateDistribution, "weights sum to zero");
  for (double& w : weights) w /= sum;
  ProbVector out(Trusted{}, std::move(weights));
  out.apply_floor();
  return out;
}

ProbVector ProbVector::from_log_weights(std::span<const double> log_weights) {
  require_min_length(log_weights.size(), "ProbVector");
  const double lse = logsumexp(log_weights);
  std::vector<double> values(log_weights.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::exp(log_weights[i] - lse);
  ProbVector out(Trusted{}, std::move(values));
  out.apply_floor();
  return out;
}

void ProbVector::apply_floor() {
  bool floored = false;
  for (double& v : values_) {
    if (v < kEpsilonFloor) {
      v = kEpsilonFloor;
      floored = true;
    }
  }
  if (!floored) return;
  const double sum = std::accumulate(values_.begin(), values_.end(), 0.0);
  for (double& v : values_) v /= sum;
}

std::vector<double> ProbVector::log_values() const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), [](double v) { return std::log(v); });
  return out;
}

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  require_min_length(values_.size(), "LogitVector");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "LogitVector entry is not finite");
  }
}

double logsumexp(std::span<const double> z) {
  if (z.empty()) throw Error(ErrorKind::InvalidInput, "logsumexp of empty sequence");
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - m);
  return m + std::log(sum);
}

ProbVector softmax(const LogitVector& z) { return ProbVector::from_log_weights(z.values()); }

std::vector<double> log_softmax(const LogitVector& z) {
  const double lse = logsumexp(z.values());
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = z[i] - lse;
  return out;
}

double kl_from_logs(std::span<const double> p, std::span<const double> log_p,
                    std::span<const double> log_q) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += p[i] * (log_p[i] - log_q[i]);
  return sum > 0.0 ? sum : 0.0;
}

double kl(const ProbVector& p, const ProbVector& q) {
  require_same_size(p.size(), q.size(), "kl");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || !(q[i] > 0.0)) {
      throw Error(ErrorKind::DegenerateDistribution, "kl requires full support");
    }
    sum += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return sum > 0.0 ? sum : 0.0;
}

ProbVector mix(const ProbVector& p, const ProbVector& s, double alpha) {
  require_same_size(p.size(), s.size(), "mix");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidCoefficient, "mix coefficient must lie in [0, 1]");
  }
  if (alpha == 0.0) return p;
  if (alpha == 1.0) return s;
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - alpha) * p[i] + alpha * s[i];
  // A convex combination of two points on the simplex is already on it.
  return ProbVector(std::move(out));
}

ProbVector random_simplex_point(Rng& rng, std::size_t V) {
  require_min_length(V, "random_simplex_point");
  std::vector<double> w(V);
  for (double& v : w) v = rng.exponential();
  return ProbVector::from_weights(std::move(w));
}

}  // namespace anchorlab
