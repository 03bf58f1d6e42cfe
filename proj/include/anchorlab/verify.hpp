#pragma once

// Independent oracles: exhaustive simplex grid search, central finite
// differences, the unrolled closed form of the exact-projection recursion,
// and randomized fuzz suites for every bound and identity.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "anchorlab/kernels.hpp"
#include "anchorlab/matrix.hpp"
#include "anchorlab/simplex.hpp"

namespace anchorlab {

enum class Suite {
  MixtureBound,    // KL(mix || p) <= alpha KL(s || p)
  LogitBound,      // KL(geometric mean || p) <= alpha / (1 - alpha) KL(p || s)
  RecursionDecay,  // exact-projection iterates vs closed form and decay bound
  GeometricMean,   // logit interpolation == normalized geometric mean
  KlConvexity,     // KL convex in its first argument
  StaticBarycenter
};

std::string_view to_string(Suite suite) noexcept;
// mixture_bound, logit_bound, recursion_decay, geometric_mean, kl_convexity, static_barycenter
Suite parse_suite(std::string_view text);
inline constexpr std::array<Suite, 6> kAllSuites = {
    Suite::MixtureBound,  Suite::LogitBound,  Suite::RecursionDecay,
    Suite::GeometricMean, Suite::KlConvexity, Suite::StaticBarycenter};

struct FuzzReport {
  std::string suite;
  std::size_t trials = 0;
  std::size_t failures = 0;  // trials with slack < -tolerance
  double tolerance = 1e-12;
  double worst_slack = 0.0;  // most negative RHS - LHS seen
  std::string worst_case;    // inputs of the worst trial, reproducible

  bool passed() const noexcept { return failures == 0; }
};

// key: value lines
void write_report(const FuzzReport& report, std::ostream& out);

struct FuzzOptions {
  // Forces alpha (or beta / lambda) on every trial instead of sampling it.
  std::optional<double> fixed_alpha;
  kernels::Exec exec = kernels::Exec::Parallel;
};

// Trial i draws from Rng(scramble(seed, i)), so reports do not depend on
// scheduling. LogitBound appends max(1, trials / 100) targeted alpha = 0.99
// trials checked at 1e-9.
FuzzReport fuzz_bounds(Suite suite, std::size_t trials, std::uint64_t seed,
                       const FuzzOptions& options = {});

// Lowest-objective interior grid point of (1 - alpha) KL(u||p) + alpha KL(u||s)
// over the V = 3 simplex, coordinates multiples of step and >= step.
kernels::GridArgmin grid_search_barycenter(const ProbVector& p, const ProbVector& s,
                                           double alpha, double step);
ProbVector grid_minimize_barycenter(const ProbVector& p, const ProbVector& s, double alpha,
                                    double step);

// Central differences (L(theta + h e_i) - L(theta - h e_i)) / 2h per coordinate.
Matrix finite_diff_gradient(const std::function<double(const Matrix&)>& loss,
                            const Matrix& params, double h = 1e-5);

// (1 - alpha)^t base + (1 - (1 - alpha)^t) sft, coordinatewise.
std::vector<double> unrolled_iterate(const ProbVector& base, const ProbVector& sft, double alpha,
                                     int t);

}  // namespace anchorlab
