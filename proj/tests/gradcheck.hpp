#pragma once
// Analytic-vs-central-difference comparison for the three training losses on
// random small instances.
#include <algorithm>
#include <cmath>
#include <string>

#include "anchorlab/anchor.hpp"
#include "anchorlab/models.hpp"
#include "anchorlab/rng.hpp"
#include "anchorlab/verify.hpp"

namespace gradcheck {

enum class Loss { Nll, Distill, KlPenalty };

inline const char* name(Loss loss) {
  switch (loss) {
    case Loss::Nll: return "nll";
    case Loss::Distill: return "distill";
    case Loss::KlPenalty: return "kl_penalty";
  }
  return "?";
}

// ||analytic - numeric||_2 / max(||analytic||_2, ||numeric||_2, 1e-8)
inline double relative_error(const anchorlab::Matrix& a, const anchorlab::Matrix& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    diff += (a.data[i] - b.data[i]) * (a.data[i] - b.data[i]);
    na += a.data[i] * a.data[i];
    nb += b.data[i] * b.data[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
}

struct Instance {
  anchorlab::Model model;
  anchorlab::Model reference;
  anchorlab::FeatureSet features;
  std::vector<anchorlab::ContextId> contexts;
  std::vector<anchorlab::LabeledRow> rows;
  double lambda = 1.0;
};

inline anchorlab::Matrix random_matrix(anchorlab::Rng& rng, std::size_t r, std::size_t c,
                                       double scale) {
  anchorlab::Matrix m(r, c);
  for (double& v : m.data) v = scale * rng.normal();
  return m;
}

// V <= 8, d <= 8, M <= 16; alternates tabular and linear families.
inline Instance random_instance(anchorlab::Rng& rng, bool linear) {
  using namespace anchorlab;
  std::size_t V = 2 + rng.uniform_int(0, 6);
  std::size_t d = 2 + rng.uniform_int(0, 6);
  std::size_t M = 1 + rng.uniform_int(0, 15);
  Instance inst{TabularModel(1, 2), TabularModel(1, 2), FeatureSet(), {}, {}, 1.0};
  inst.features = FeatureSet(random_matrix(rng, M, d, 1.0));
  if (linear) {
    inst.model = LinearSoftmaxModel(random_matrix(rng, V, d, 0.7));
    inst.reference = LinearSoftmaxModel(random_matrix(rng, V, d, 0.7));
  } else {
    inst.model = TabularModel(random_matrix(rng, M, V, 1.5));
    inst.reference = TabularModel(random_matrix(rng, M, V, 1.5));
  }
  for (ContextId x = 0; x < M; ++x) {
    inst.contexts.push_back(x);
    inst.rows.push_back({x, static_cast<std::size_t>(rng.uniform_int(0, V - 1))});
  }
  inst.lambda = rng.uniform(0.1, 3.0);
  return inst;
}

inline anchorlab::LossAndGrad evaluate(Loss loss, const Instance& inst,
                                       const anchorlab::Model& model) {
  using namespace anchorlab;
  switch (loss) {
    case Loss::Nll:
      return nll_loss_and_grad(model, inst.rows, inst.features);
    case Loss::Distill: {
      AnchorConfig cfg;
      cfg.alpha = 0.4;
      AnchorTable anchor = build_anchor(inst.reference, inst.model, inst.contexts, inst.features, cfg);
      return distill_loss_and_grad(model, anchor, inst.contexts, inst.features);
    }
    case Loss::KlPenalty:
      return kl_penalty_grad(model, inst.reference, inst.contexts, inst.features, inst.lambda);
  }
  return {};
}

// Worst relative error over `instances` random instances.
inline double worst_relative_error(Loss loss, int instances, std::uint64_t seed) {
  using namespace anchorlab;
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    Rng rng(scramble(seed, static_cast<std::uint64_t>(i)));
    Instance inst = random_instance(rng, i % 2 == 1);
    Matrix analytic = evaluate(loss, inst, inst.model).gradient;
    Matrix numeric = finite_diff_gradient(
        [&](const Matrix& params) {
          Model probe = inst.model;
          parameters(probe) = params;
          return evaluate(loss, inst, probe).loss;
        },
        parameters(inst.model), 1e-5);
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  return worst;
}

}  // namespace gradcheck
