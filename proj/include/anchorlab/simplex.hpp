#pragma once

// Numerically stable primitives on the probability simplex.

#include <cstddef>
#include <span>
#include <vector>

#include "anchorlab/error.hpp"

namespace anchorlab {

class Rng;

// Smallest probability any ProbVector entry may hold. Entries below it are
// raised to it and the vector is renormalized, so every distribution keeps
// full support and every KL stays finite.
inline constexpr double kEpsilonFloor = 1e-12;
// Allowed distance of sum(values) from 1 when constructing from raw values.
inline constexpr double kSumTolerance = 1e-12;

// Full-support point on the simplex, length >= 2.
class ProbVector {
 public:
  // Validates: length >= 2, all entries finite and >= 0, sum within
  // kSumTolerance of 1. Entries below kEpsilonFloor are floored.
  explicit ProbVector(std::vector<double> values);

  // Normalizes arbitrary nonnegative finite weights (sum > 0).
  static ProbVector from_weights(std::vector<double> weights);

  // Normalizes exp(log_weights) using the max-subtraction logsumexp.
  static ProbVector from_log_weights(std::span<const double> log_weights);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> log_values() const;

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  struct Trusted {};
  ProbVector(Trusted, std::vector<double> values) : values_(std::move(values)) {}
  void apply_floor();

  std::vector<double> values_;
};

// Finite pre-softmax scores, length >= 2.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const LogitVector&, const LogitVector&) = default;

 private:
  std::vector<double> values_;
};

// max(z) + ln(sum exp(z - max(z))).
double logsumexp(std::span<const double> z);

ProbVector softmax(const LogitVector& z);
std::vector<double> log_softmax(const LogitVector& z);

// KL(p || q) in nats, summed as p_i (ln p_i - ln q_i).
double kl(const ProbVector& p, const ProbVector& q);

// Same sum over raw spans of probabilities and their logs. Used by batched
// kernels that already hold log-probabilities. Clamped at zero.
double kl_from_logs(std::span<const double> p, std::span<const double> log_p,
                    std::span<const double> log_q) noexcept;

// (1 - alpha) p + alpha s, alpha in [0, 1].
ProbVector mix(const ProbVector& p, const ProbVector& s, double alpha);

// Uniform draw from the simplex (normalized standard exponentials).
ProbVector random_simplex_point(Rng& rng, std::size_t V);

void require_same_size(std::size_t a, std::size_t b, const char* what);

}  // namespace anchorlab
