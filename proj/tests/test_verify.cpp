#include <chrono>
#include <cmath>
#include <sstream>

#include "anchorlab/anchor.hpp"
#include "anchorlab/rng.hpp"
#include "anchorlab/verify.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace anchorlab;

TEST_CASE("suite names") {
  for (Suite s : kAllSuites) CHECK(parse_suite(to_string(s)) == s);
  CHECK(error_kind([] { parse_suite("nosuch"); }) == ErrorKind::InvalidInput);
}

TEST_CASE("grid search with p equal to s lands on p") {
  ProbVector p = pv({0.2, 0.3, 0.5});
  ProbVector u = grid_minimize_barycenter(p, p, 0.4, 0.005);
  CHECK(oracle::l1(to_vec(u), to_vec(p)) <= 0.015);
}

TEST_CASE("grid search on a symmetric pair") {
  ProbVector p = pv({0.8, 0.1, 0.1});
  ProbVector s = pv({0.1, 0.8, 0.1});
  ProbVector u = grid_minimize_barycenter(p, s, 0.5, 0.005);
  CHECK(oracle::l1(to_vec(u), to_vec(geometric_mean_anchor(p, s, 0.5))) <= 0.015);
}

TEST_CASE("grid search visits the expected number of points quickly") {
  ProbVector p = pv({0.2, 0.3, 0.5});
  ProbVector s = pv({0.6, 0.3, 0.1});
  auto start = std::chrono::steady_clock::now();
  kernels::GridArgmin g = grid_search_barycenter(p, s, 0.5, 0.005);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(g.visited == kernels::grid_point_count(0.005));
  CHECK(g.visited == 19701);
  CHECK(seconds < 1.0);
}

TEST_CASE("grid search agrees with the closed form on random instances") {
  Rng rng(60);
  for (int i = 0; i < 50; ++i) {
    ProbVector p = random_simplex_point(rng, 3);
    ProbVector s = random_simplex_point(rng, 3);
    double alpha = rng.uniform(0.05, 0.95);
    ProbVector u = grid_minimize_barycenter(p, s, alpha, 0.005);
    CHECK(oracle::l1(to_vec(u), to_vec(geometric_mean_anchor(p, s, alpha))) <= 0.015);
  }
}

TEST_CASE("grid search errors") {
  ProbVector p4 = pv({0.25, 0.25, 0.25, 0.25});
  CHECK(error_kind([&] { grid_minimize_barycenter(p4, p4, 0.5, 0.01); }) == ErrorKind::Unsupported);
  ProbVector p = pv({0.2, 0.3, 0.5});
  CHECK(error_kind([&] { grid_minimize_barycenter(p, p, 0.5, 0.2); }) == ErrorKind::InvalidInput);
  CHECK(error_kind([&] { grid_minimize_barycenter(p, p, 0.5, 0.0); }) == ErrorKind::InvalidInput);
}

TEST_CASE("finite_diff_gradient examples") {
  Matrix theta(1, 1, 3.0);
  Matrix g = finite_diff_gradient([](const Matrix& m) { return m.data[0] * m.data[0]; }, theta);
  CHECK(std::abs(g.data[0] - 6.0) <= 1e-8);

  Matrix many(2, 3, 0.7);
  Matrix z = finite_diff_gradient([](const Matrix&) { return 4.2; }, many);
  CHECK(max_abs(z) <= 1e-9);

  CHECK(error_kind([&] {
          finite_diff_gradient([](const Matrix&) { return NAN; }, theta);
        }) == ErrorKind::NumericalDivergence);
}

TEST_CASE("finite differences agree with the analytic distill gradient") {
  Rng rng(61);
  Matrix logits(3, 4);
  for (double& v : logits.data) v = rng.normal();
  Model m = TabularModel(logits);
  std::vector<ContextId> ctx{0, 1, 2};
  std::vector<ProbVector> targets;
  for (int i = 0; i < 3; ++i) targets.push_back(random_simplex_point(rng, 4));
  AnchorTable anchor(ctx, targets, InterpolationSpace::Probability, 0.5);
  Matrix analytic = distill_loss_and_grad(m, anchor, ctx, FeatureSet()).gradient;
  Matrix numeric = finite_diff_gradient(
      [&](const Matrix& p) { return distill_loss_and_grad(TabularModel(p), anchor, ctx, FeatureSet()).loss; },
      logits);
  for (std::size_t i = 0; i < analytic.data.size(); ++i)
    CHECK(std::abs(analytic.data[i] - numeric.data[i]) <= 1e-6 * std::max(1.0, std::abs(analytic.data[i])));
}

TEST_CASE("unrolled_iterate closed form") {
  ProbVector base = pv({0.9, 0.1});
  ProbVector sft = pv({0.1, 0.9});
  std::vector<double> p2 = unrolled_iterate(base, sft, 0.5, 2);
  CHECK(std::abs(p2[0] - 0.3) <= 1e-15);
  std::vector<double> p0 = unrolled_iterate(base, sft, 0.5, 0);
  CHECK(p0[0] == 0.9);
}

TEST_CASE("mixture_bound with alpha fixed at zero has zero slack") {
  FuzzOptions opts;
  opts.fixed_alpha = 0.0;
  FuzzReport r = fuzz_bounds(Suite::MixtureBound, 200, 7, opts);
  CHECK(r.passed());
  CHECK(r.worst_slack == 0.0);
}

TEST_CASE("every suite passes at the default seed") {
  for (Suite s : kAllSuites) {
    std::size_t trials = s == Suite::GeometricMean ? 1000 : 10000;
    FuzzReport r = fuzz_bounds(s, trials, 7);
    CAPTURE(r.suite);
    CAPTURE(r.worst_case);
    CHECK(r.passed());
    CHECK(r.failures == 0);
    CHECK(r.trials >= trials);
  }
}

TEST_CASE("fuzz reports do not depend on the execution mode") {
  for (Suite s : kAllSuites) {
    FuzzOptions serial;
    serial.exec = kernels::Exec::Serial;
    FuzzReport a = fuzz_bounds(s, 500, 11, serial);
    FuzzReport b = fuzz_bounds(s, 500, 11);
    std::ostringstream ta, tb;
    write_report(a, ta);
    write_report(b, tb);
    CHECK(ta.str() == tb.str());
  }
}

TEST_CASE("report format") {
  FuzzReport r = fuzz_bounds(Suite::LogitBound, 100, 3);
  std::ostringstream out;
  write_report(r, out);
  std::string text = out.str();
  CHECK(text.find("suite: logit_bound\n") != std::string::npos);
  CHECK(text.find("failures: 0\n") != std::string::npos);
  CHECK(text.find("worst_case: ") != std::string::npos);
  CHECK(text.find("status: pass\n") != std::string::npos);
  CHECK(error_kind([] { fuzz_bounds(Suite::MixtureBound, 0, 1); }) == ErrorKind::InvalidInput);
}
