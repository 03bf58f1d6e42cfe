#include <cmath>
#include <sstream>

#include "anchorlab/anchor.hpp"
#include "anchorlab/models.hpp"
#include "anchorlab/rng.hpp"
#include "doctest.h"
#include "gradcheck.hpp"
#include "helpers.hpp"

using namespace anchorlab;

namespace {

AnchorTable single_anchor(ContextId x, std::vector<double> q) {
  return AnchorTable({x}, {pv(std::move(q))}, InterpolationSpace::Probability, 0.5);
}

Matrix row_matrix(std::vector<double> row) {
  Matrix m(1, row.size());
  m.data = std::move(row);
  return m;
}

}  // namespace

TEST_CASE("model_logits examples") {
  FeatureSet none;
  Model tab = TabularModel(row_matrix({1, 2, 3}));
  LogitVector z = model_logits(tab, 0, none);
  CHECK(z == LogitVector({1, 2, 3}));
  CHECK(error_kind([&] { model_logits(tab, 1, none); }) == ErrorKind::UnknownContext);

  Matrix eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  Model lin = LinearSoftmaxModel(eye);
  FeatureSet phi(row_matrix({0.5, -0.5}));
  CHECK(model_logits(lin, 0, phi) == LogitVector({0.5, -0.5}));
  CHECK(error_kind([&] { model_logits(lin, 3, phi); }) == ErrorKind::UnknownContext);

  Model zero = LinearSoftmaxModel(4, 2);
  ProbVector u = predict(zero, 0, phi);
  for (double v : u.values()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("family names and sizes") {
  Model tab = TabularModel(3, 5);
  Model lin = LinearSoftmaxModel(5, 7);
  CHECK(family_name(tab) == "tabular");
  CHECK(family_name(lin) == "linear");
  CHECK(vocab_size(tab) == 5);
  CHECK(vocab_size(lin) == 5);
  CHECK(error_kind([] { TabularModel(3, 1); }) == ErrorKind::InvalidInput);
}

TEST_CASE("batch_logits agrees with model_logits") {
  Rng rng(6);
  Model lin = LinearSoftmaxModel(gradcheck::random_matrix(rng, 5, 4, 1.0));
  FeatureSet phi(gradcheck::random_matrix(rng, 9, 4, 1.0));
  std::vector<ContextId> ctx{8, 0, 3, 3};
  Matrix batch = batch_logits(lin, ctx, phi);
  Matrix logp = batch_log_probs(lin, ctx, phi);
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    LogitVector z = model_logits(lin, ctx[i], phi);
    std::vector<double> lp = log_softmax(z);
    for (std::size_t v = 0; v < 5; ++v) {
      CHECK(batch(i, v) == doctest::Approx(z[v]).epsilon(1e-14));
      CHECK(logp(i, v) == doctest::Approx(lp[v]).epsilon(1e-13));
    }
  }
}

TEST_CASE("distill loss examples") {
  FeatureSet none;
  Model tab = TabularModel(row_matrix({0.0, 0.0}));
  LossAndGrad g = distill_loss_and_grad(tab, single_anchor(0, {0.7, 0.3}), std::vector<ContextId>{0}, none);
  CHECK(g.gradient(0, 0) == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(g.gradient(0, 1) == doctest::Approx(0.2).epsilon(1e-14));

  // anchor equal to the model: zero loss and zero gradient
  Model fixed = TabularModel(row_matrix({0.3, -1.2, 2.0}));
  ProbVector p = predict(fixed, 0, none);
  AnchorTable same({0}, {p}, InterpolationSpace::Logit, 0.5);
  LossAndGrad z = distill_loss_and_grad(fixed, same, std::vector<ContextId>{0}, none);
  CHECK(std::abs(z.loss) <= 1e-15);
  CHECK(max_abs(z.gradient) <= 1e-15);

  CHECK(error_kind([&] {
          distill_loss_and_grad(tab, single_anchor(3, {0.5, 0.5}), std::vector<ContextId>{0}, none);
        }) == ErrorKind::UnknownContext);
}

TEST_CASE("nll loss examples") {
  FeatureSet none;
  Model tab = TabularModel(row_matrix({0.0, 0.0}));
  std::vector<LabeledRow> rows{{0, 0}};
  LossAndGrad g = nll_loss_and_grad(tab, rows, none);
  CHECK(g.loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(g.gradient(0, 0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(g.gradient(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

  // probability 1 - eps on the label bounds the loss by -ln(1 - eps)
  double eps = 1e-3;
  Model sure = TabularModel(row_matrix({std::log(1 - eps), std::log(eps)}));
  CHECK(nll_loss_and_grad(sure, rows, none).loss <= -std::log(1 - eps) + 1e-15);

  std::vector<LabeledRow> bad{{0, 2}};
  CHECK(error_kind([&] { nll_loss_and_grad(tab, bad, none); }) == ErrorKind::InvalidLabel);
}

TEST_CASE("kl penalty examples") {
  Rng rng(13);
  Model m = TabularModel(gradcheck::random_matrix(rng, 4, 3, 1.0));
  FeatureSet none;
  std::vector<ContextId> ctx{0, 1, 2, 3};
  LossAndGrad same = kl_penalty_grad(m, m, ctx, none, 0.7);
  CHECK(std::abs(same.loss) <= 1e-15);
  CHECK(max_abs(same.gradient) <= 1e-15);

  Model other = TabularModel(gradcheck::random_matrix(rng, 4, 3, 1.0));
  LossAndGrad zero = kl_penalty_grad(m, other, ctx, none, 0.0);
  CHECK(zero.loss == 0.0);
  CHECK(max_abs(zero.gradient) == 0.0);

  CHECK(error_kind([&] { kl_penalty_grad(m, other, ctx, none, -1.0); }) ==
        ErrorKind::InvalidCoefficient);
}

TEST_CASE("analytic gradients match central differences") {
  for (gradcheck::Loss loss :
       {gradcheck::Loss::Nll, gradcheck::Loss::Distill, gradcheck::Loss::KlPenalty}) {
    CAPTURE(gradcheck::name(loss));
    CHECK(gradcheck::worst_relative_error(loss, 100, 2024) < 1e-6);
  }
}

TEST_CASE("distill loss is zero exactly when the model matches the anchor") {
  Rng rng(14);
  Matrix logits = gradcheck::random_matrix(rng, 5, 4, 1.0);
  Model m = TabularModel(logits);
  FeatureSet none;
  std::vector<ContextId> ctx{0, 1, 2, 3, 4};
  std::vector<ProbVector> dists;
  for (ContextId x : ctx) dists.push_back(predict(m, x, none));
  AnchorTable exact(ctx, dists, InterpolationSpace::Logit, 0.5);
  CHECK(distill_loss_and_grad(m, exact, ctx, none).loss <= 1e-10);

  dists[2] = mix(dists[2], random_simplex_point(rng, 4), 0.2);
  AnchorTable off(ctx, dists, InterpolationSpace::Logit, 0.5);
  CHECK(distill_loss_and_grad(m, off, ctx, none).loss > 1e-10);
}

TEST_CASE("gradient descent on the distill loss decreases it monotonically") {
  Rng rng(15);
  Model m = TabularModel(gradcheck::random_matrix(rng, 6, 5, 1.0));
  FeatureSet none;
  std::vector<ContextId> ctx{0, 1, 2, 3, 4, 5};
  std::vector<ProbVector> targets;
  for (std::size_t i = 0; i < ctx.size(); ++i) targets.push_back(random_simplex_point(rng, 5));
  AnchorTable anchor(ctx, targets, InterpolationSpace::Probability, 0.5);
  double prev = INFINITY;
  int steps = 0;
  while (true) {
    LossAndGrad g = distill_loss_and_grad(m, anchor, ctx, none);
    if (g.loss < 1e-10) break;
    REQUIRE(g.loss < prev);
    prev = g.loss;
    apply_step(m, g.gradient, 3.0);
    REQUIRE(++steps < 100000);
  }
  CHECK(steps > 0);
}

TEST_CASE("apply_step examples") {
  Model m = TabularModel(row_matrix({0.0, 0.0}));
  Model copy = m;
  apply_step(m, row_matrix({-0.2, 0.2}), 0.0);
  CHECK(m == copy);
  apply_step(m, Matrix(1, 2), 1.0);
  CHECK(m == copy);
  apply_step(m, row_matrix({-0.2, 0.2}), 1.0);
  CHECK(parameters(m)(0, 0) == 0.2);
  CHECK(parameters(m)(0, 1) == -0.2);
  CHECK(error_kind([&] { apply_step(m, Matrix(2, 2), 1.0); }) == ErrorKind::ShapeError);
}

TEST_CASE("apply_step is deterministic") {
  Rng rng(16);
  Matrix w = gradcheck::random_matrix(rng, 4, 6, 1.0);
  Matrix g = gradcheck::random_matrix(rng, 4, 6, 1.0);
  Model a = LinearSoftmaxModel(w);
  Model b = LinearSoftmaxModel(w);
  apply_step(a, g, 0.37);
  apply_step(b, g, 0.37);
  CHECK(a == b);
}

TEST_CASE("set_distribution_exactly examples") {
  FeatureSet none;
  Model m = TabularModel(2, 2);
  set_distribution_exactly(m, 0, pv({0.5, 0.5}));
  CHECK(parameters(m)(0, 0) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(parameters(m)(0, 1) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  ProbVector back = predict(m, 0, none);
  CHECK(std::abs(back[0] - 0.5) <= 1e-14);

  set_distribution_exactly(m, 1, pv({0.3, 0.7}));
  ProbVector p = predict(m, 1, none);
  CHECK(std::abs(p[0] - 0.3) <= 1e-14);
  CHECK(std::abs(p[1] - 0.7) <= 1e-14);
  Model once = m;
  set_distribution_exactly(m, 1, pv({0.3, 0.7}));
  CHECK(m == once);

  Model lin = LinearSoftmaxModel(2, 2);
  CHECK(error_kind([&] { set_distribution_exactly(lin, 0, pv({0.5, 0.5})); }) ==
        ErrorKind::Unsupported);
}

TEST_CASE("predict_label breaks ties toward the lowest index") {
  FeatureSet none;
  Model m = TabularModel(row_matrix({1.0, 3.0, 3.0, 0.0}));
  CHECK(predict_label(m, 0, none) == 1);
}

TEST_CASE("model text format round trips bitwise") {
  Rng rng(18);
  for (bool linear : {false, true}) {
    Matrix p = gradcheck::random_matrix(rng, 3, 5, 2.0);
    Model m = linear ? Model(LinearSoftmaxModel(p)) : Model(TabularModel(p));
    std::stringstream buf;
    save_model(m, buf);
    std::string text = buf.str();
    CHECK(text.rfind(linear ? "anchorlab-model v1 linear 3 5\n" : "anchorlab-model v1 tabular 5 3\n",
                     0) == 0);
    Model back = load_model(buf);
    CHECK(back == m);
  }
  std::stringstream junk("not a model\n");
  CHECK(error_kind([&] { load_model(junk); }) == ErrorKind::InvalidInput);
}
