#include "anchorlab/verify.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "anchorlab/anchor.hpp"
#include "anchorlab/csv.hpp"
#include "anchorlab/rng.hpp"
#include "anchorlab/trainers.hpp"

namespace anchorlab {

std::string_view to_string(Suite suite) noexcept {
  switch (suite) {
    case Suite::MixtureBound: return "mixture_bound";
    case Suite::LogitBound: return "logit_bound";
    case Suite::RecursionDecay: return "recursion_decay";
    case Suite::GeometricMean: return "geometric_mean";
    case Suite::KlConvexity: return "kl_convexity";
    case Suite::StaticBarycenter: return "static_barycenter";
  }
  return "unknown";
}

Suite parse_suite(std::string_view text) {
  for (Suite s : kAllSuites) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorKind::InvalidInput, "unknown suite '" + std::string(text) + "'");
}

namespace {
std::string short_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}
}  // namespace

void write_report(const FuzzReport& r, std::ostream& out) {
  out << "suite: " << r.suite << '\n'
      << "trials: " << r.trials << '\n'
      << "failures: " << r.failures << '\n'
      << "tolerance: " << short_real(r.tolerance) << '\n'
      << "worst_slack: " << format_real(r.worst_slack) << '\n'
      << "worst_case: " << r.worst_case << '\n'
      << "status: " << (r.passed() ? "pass" : "FAIL") << '\n';
}

namespace {

constexpr double kBoundTolerance = 1e-12;
constexpr double kTailTolerance = 1e-9;
constexpr double kTailAlpha = 0.99;
constexpr int kRecursionSteps = 20;
constexpr int kBarycenterCandidates = 16;

struct Trial {
  double slack = 0.0;
  double tolerance = kBoundTolerance;
  std::string inputs;  // filled only when asked to describe
};

// Collects a trial's inputs as text for the report.
class Describer {
 public:
  explicit Describer(bool enabled) : enabled_(enabled) {}

  void add(std::string_view key, double v) {
    if (enabled_) os_ << key << '=' << format_real(v) << ' ';
  }
  void add(std::string_view key, std::span<const double> v) {
    if (!enabled_) return;
    os_ << key << "=[";
    for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? "," : "") << format_real(v[i]);
    os_ << "] ";
  }
  std::string str() const { return os_.str(); }

 private:
  bool enabled_;
  std::ostringstream os_;
};

std::size_t draw_vocab(Rng& rng) { return static_cast<std::size_t>(rng.uniform_int(2, 64)); }

double pick(const FuzzOptions& o, double sampled) { return o.fixed_alpha.value_or(sampled); }

Trial mixture_bound_trial(Rng& rng, const FuzzOptions& o, bool describe) {
  const std::size_t V = draw_vocab(rng);
  const ProbVector p = random_simplex_point(rng, V);
  const ProbVector s = random_simplex_point(rng, V);
  const double alpha = pick(o, rng.uniform(0.0, 1.0));
  const double lhs = kl(interpolate_prob(p, s, alpha), p);
  const double rhs = prob_bound_rhs(p, s, alpha);
  Describer d(describe);
  d.add("alpha", alpha);
  d.add("p", p.values());
  d.add("s", s.values());
  return {rhs - lhs, kBoundTolerance, d.str()};
}

Trial logit_bound_trial(Rng& rng, double alpha, double tolerance, bool describe) {
  const std::size_t V = draw_vocab(rng);
  const ProbVector p = random_simplex_point(rng, V);
  const ProbVector s = random_simplex_point(rng, V);
  const double lhs = kl(geometric_mean_anchor(p, s, alpha), p);
  const double rhs = logit_bound_rhs(p, s, alpha);
  Describer d(describe);
  d.add("alpha", alpha);
  d.add("p", p.values());
  d.add("s", s.values());
  return {rhs - lhs, tolerance, d.str()};
}

Trial recursion_decay_trial(Rng& rng, const FuzzOptions& o, bool describe) {
  const std::size_t V = draw_vocab(rng);
  const ProbVector base = random_simplex_point(rng, V);
  const ProbVector sft = random_simplex_point(rng, V);
  const double alpha = pick(o, rng.uniform_open());
  const std::vector<ProbVector> b{base};
  const std::vector<ProbVector> s{sft};
  const RecursionResult rec = exact_projection_recursion(b, s, alpha, kRecursionSteps);
  const double kl0 = kl(base, sft);
  double slack = std::numeric_limits<double>::infinity();
  for (int t = 0; t <= kRecursionSteps; ++t) {
    const double decay = std::pow(1.0 - alpha, t) * kl0;
    slack = std::min(slack, decay - rec.kl_to_sft[t][0]);
    const auto closed = unrolled_iterate(base, sft, alpha, t);
    for (std::size_t i = 0; i < V; ++i) {
      slack = std::min(slack, -std::abs(rec.iterates[t][0][i] - closed[i]));
    }
  }
  Describer d(describe);
  d.add("alpha", alpha);
  d.add("base", base.values());
  d.add("sft", sft.values());
  return {slack, kBoundTolerance, d.str()};
}

Trial geometric_mean_trial(Rng& rng, const FuzzOptions& o, bool describe) {
  const std::size_t V = draw_vocab(rng);
  std::vector<double> zp(V), zs(V);
  for (double& v : zp) v = 3.0 * rng.normal();
  for (double& v : zs) v = 3.0 * rng.normal();
  const double alpha = pick(o, rng.uniform(0.0, 1.0));
  const LogitVector lp(zp), ls(zs);
  const ProbVector via_logits = interpolate_logit(lp, ls, alpha);
  const ProbVector via_geo = geometric_mean_anchor(softmax(lp), softmax(ls), alpha);
  double worst = 0.0;
  for (std::size_t i = 0; i < V; ++i) worst = std::max(worst, std::abs(via_logits[i] - via_geo[i]));
  Describer d(describe);
  d.add("alpha", alpha);
  d.add("z_p", zp);
  d.add("z_s", zs);
  return {-worst, kBoundTolerance, d.str()};
}

Trial kl_convexity_trial(Rng& rng, const FuzzOptions& o, bool describe) {
  const std::size_t V = draw_vocab(rng);
  const ProbVector u1 = random_simplex_point(rng, V);
  const ProbVector u2 = random_simplex_point(rng, V);
  const ProbVector r = random_simplex_point(rng, V);
  const double lambda = pick(o, static_cast<double>(rng.uniform_int(1, 9)) / 10.0);
  // convexity of u -> KL(u||r)
  const double mixed = kl(mix(u2, u1, lambda), r);
  const double chord = lambda * kl(u1, r) + (1.0 - lambda) * kl(u2, r);
  // KL((1 - lambda) a + lambda b || b) <= (1 - lambda) KL(a||b), with a = u1, b = r
  const double toward = kl(mix(u1, r, lambda), r);
  const double scaled = (1.0 - lambda) * kl(u1, r);
  Describer d(describe);
  d.add("lambda", lambda);
  d.add("u1", u1.values());
  d.add("u2", u2.values());
  d.add("r", r.values());
  return {std::min(chord - mixed, scaled - toward), kBoundTolerance, d.str()};
}

Trial static_barycenter_trial(Rng& rng, const FuzzOptions& o, bool describe) {
  const std::size_t V = draw_vocab(rng);
  const ProbVector sft = random_simplex_point(rng, V);
  const ProbVector base = random_simplex_point(rng, V);
  const double beta = pick(o, rng.uniform_open());
  const ProbVector star = geodesic_point(sft, base, beta).q;
  const double j_star = barycenter_objective(star, sft, base, beta);
  double slack = std::numeric_limits<double>::infinity();
  for (int c = 0; c < kBarycenterCandidates; ++c) {
    const ProbVector far = random_simplex_point(rng, V);
    // half the candidates far away, half in a small neighbourhood of the optimum
    const ProbVector cand = c % 2 == 0 ? far : mix(star, far, 1e-3);
    slack = std::min(slack, barycenter_objective(cand, sft, base, beta) - j_star);
  }
  Describer d(describe);
  d.add("beta", beta);
  d.add("sft", sft.values());
  d.add("base", base.values());
  return {slack, kBoundTolerance, d.str()};
}

Trial run_trial(Suite suite, std::size_t index, std::size_t main_trials, std::uint64_t seed,
                const FuzzOptions& o, bool describe) {
  Rng rng(scramble(seed, index));
  switch (suite) {
    case Suite::MixtureBound: return mixture_bound_trial(rng, o, describe);
    case Suite::LogitBound:
      if (index < main_trials) {
        return logit_bound_trial(rng, pick(o, rng.uniform(0.0, 0.95)), kBoundTolerance, describe);
      }
      return logit_bound_trial(rng, kTailAlpha, kTailTolerance, describe);
    case Suite::RecursionDecay: return recursion_decay_trial(rng, o, describe);
    case Suite::GeometricMean: return geometric_mean_trial(rng, o, describe);
    case Suite::KlConvexity: return kl_convexity_trial(rng, o, describe);
    case Suite::StaticBarycenter: return static_barycenter_trial(rng, o, describe);
  }
  throw Error(ErrorKind::InvalidInput, "unknown suite");
}

}  // namespace

FuzzReport fuzz_bounds(Suite suite, std::size_t trials, std::uint64_t seed,
                       const FuzzOptions& options) {
  if (trials < 1) throw Error(ErrorKind::InvalidInput, "fuzz needs trials >= 1");
  const std::size_t total =
      suite == Suite::LogitBound ? trials + std::max<std::size_t>(1, trials / 100) : trials;

  std::vector<double> slack(total);
  std::vector<double> tol(total);
  std::vector<std::string> errors(total);
  const auto n = static_cast<std::ptrdiff_t>(total);
  const bool parallel = options.exec == kernels::Exec::Parallel;
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const Trial t = run_trial(suite, static_cast<std::size_t>(i), trials, seed, options, false);
      slack[i] = t.slack;
      tol[i] = t.tolerance;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < total; ++i) {
    if (!errors[i].empty()) throw Error(ErrorKind::InvalidInput, "trial " + std::to_string(i) +
                                                                    ": " + errors[i]);
  }

  FuzzReport report;
  report.suite = std::string(to_string(suite));
  report.trials = total;
  report.tolerance = kBoundTolerance;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (slack[i] < -tol[i]) ++report.failures;
    if (slack[i] < slack[worst]) worst = i;
  }
  report.worst_slack = slack[worst];
  report.worst_case = "trial=" + std::to_string(worst) + " seed=" + std::to_string(seed) + " " +
                      run_trial(suite, worst, trials, seed, options, true).inputs;
  if (suite == Suite::LogitBound) {
    report.worst_case += "(alpha=0.99 tail trials use tolerance 1e-9)";
  }
  return report;
}

kernels::GridArgmin grid_search_barycenter(const ProbVector& p, const ProbVector& s,
                                           double alpha, double step) {
  if (p.size() != 3 || s.size() != 3) {
    throw Error(ErrorKind::Unsupported, "grid search is exhaustive only for V = 3");
  }
  if (!(step > 0.0 && step <= 0.1)) throw Error(ErrorKind::InvalidInput, "step must be in (0, 0.1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidCoefficient, "alpha must lie in [0, 1]");
  }
  kernels::GridProblem g{};
  for (int k = 0; k < 3; ++k) {
    g.log_p[k] = std::log(p[k]);
    g.log_s[k] = std::log(s[k]);
  }
  g.weight_p = 1.0 - alpha;
  g.weight_s = alpha;
  g.step = step;
  return kernels::omp::grid_argmin(g);
}

ProbVector grid_minimize_barycenter(const ProbVector& p, const ProbVector& s, double alpha,
                                    double step) {
  const auto best = grid_search_barycenter(p, s, alpha, step);
  return ProbVector::from_weights({best.point[0], best.point[1], best.point[2]});
}

Matrix finite_diff_gradient(const std::function<double(const Matrix&)>& loss,
                            const Matrix& params, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "finite-difference step must be > 0");
  Matrix grad(params.rows, params.cols);
  Matrix probe = params;
  for (std::size_t k = 0; k < params.data.size(); ++k) {
    const double orig = probe.data[k];
    probe.data[k] = orig + h;
    const double up = loss(probe);
    probe.data[k] = orig - h;
    const double down = loss(probe);
    probe.data[k] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorKind::NumericalDivergence,
                  "non-finite loss at coordinate " + std::to_string(k));
    }
    grad.data[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> unrolled_iterate(const ProbVector& base, const ProbVector& sft, double alpha,
                                     int t) {
  require_same_size(base.size(), sft.size(), "unrolled_iterate");
  const double keep = std::pow(1.0 - alpha, t);
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = keep * base[i] + (1.0 - keep) * sft[i];
  return out;
}

}  // namespace anchorlab
