#include "anchorlab/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "anchorlab/csv.hpp"
#include "anchorlab/kernels.hpp"

namespace anchorlab {

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Sft: return "sft";
    case Method::LowSft: return "low_sft";
    case Method::KlSft: return "kl_sft";
    case Method::StaticBarycenter: return "static_barycenter";
    case Method::Anchored: return "anchored";
    case Method::ExactRecursion: return "exact_recursion";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::Sft, Method::LowSft, Method::KlSft, Method::StaticBarycenter,
                   Method::Anchored, Method::ExactRecursion}) {
    if (to_string(m) == text) return m;
  }
  throw Error(ErrorKind::InvalidInput, "unknown method '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  const bool wants_lambda = method == Method::KlSft;
  const bool wants_beta = method == Method::StaticBarycenter;
  const bool wants_anchor = method == Method::Anchored || method == Method::ExactRecursion;
  if (lambda.has_value() != wants_lambda) {
    throw Error(ErrorKind::InvalidInput,
                wants_lambda ? "kl_sft needs lambda" : "lambda only applies to kl_sft");
  }
  if (beta.has_value() != wants_beta) {
    throw Error(ErrorKind::InvalidInput, wants_beta ? "static_barycenter needs beta"
                                                    : "beta only applies to static_barycenter");
  }
  if (anchor.has_value() != wants_anchor) {
    throw Error(ErrorKind::InvalidInput, wants_anchor ? "anchored methods need an anchor config"
                                                      : "anchor settings only apply to anchored");
  }
  if (!wants_anchor) {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw Error(ErrorKind::InvalidInput, "lr must be > 0");
    if (epochs < 0) throw Error(ErrorKind::InvalidInput, "epochs must be >= 0");
  }
  if (lambda && (!(*lambda >= 0.0) || !std::isfinite(*lambda))) {
    throw Error(ErrorKind::InvalidCoefficient, "lambda must be finite and >= 0");
  }
  if (beta && !(*beta > 0.0 && *beta < 1.0)) {
    throw Error(ErrorKind::InvalidCoefficient, "beta must lie in (0, 1)");
  }
  if (anchor) anchor->validate_for_training();
}

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out, bool header) {
  if (header) out << kTrajectoryCsvHeader << '\n';
  const std::string method(to_string(record.method));
  const std::string space = record.space ? std::string(to_string(*record.space)) : "";
  const std::string alpha = format_real(record.alpha);
  for (const auto& r : record.rows) {
    out << method << ',' << space << ',' << alpha << ',' << r.t << ','
        << format_real(r.kl_anchor_model) << ',' << format_real(r.lemma_bound) << ','
        << format_real(r.kl_to_base) << ',' << format_real(r.kl_to_sft) << ','
        << format_real(r.inner_final_distill_loss) << ',' << format_real(r.domain_acc) << ','
        << format_real(r.general_acc) << '\n';
  }
}

namespace {

double mean_kl_to(const Matrix& log_p, const Model& ref, std::span<const ContextId> contexts,
                  const FeatureSet& features) {
  const Matrix log_r = batch_log_probs(ref, contexts, features);
  std::vector<double> per_context;
  kernels::omp::row_kl(log_p, log_r, per_context);
  return std::accumulate(per_context.begin(), per_context.end(), 0.0) /
         static_cast<double>(per_context.size());
}

// Telemetry contexts default to the training contexts.
std::span<const ContextId> telemetry_contexts(const Telemetry& telemetry,
                                              std::span<const ContextId> fallback) {
  return telemetry.contexts.empty() ? fallback : std::span<const ContextId>(telemetry.contexts);
}

void record_model_metrics(TrajectoryRow& row, const Model& model, const Telemetry& telemetry,
                          std::span<const ContextId> contexts, const FeatureSet& features) {
  if (telemetry.base || telemetry.sft) {
    const Matrix log_p = batch_log_probs(model, contexts, features);
    if (telemetry.base) row.kl_to_base = mean_kl_to(log_p, *telemetry.base, contexts, features);
    if (telemetry.sft) row.kl_to_sft = mean_kl_to(log_p, *telemetry.sft, contexts, features);
  }
  if (telemetry.evaluate) {
    const Accuracies acc = telemetry.evaluate(model);
    row.domain_acc = acc.domain;
    row.general_acc = acc.general;
  }
}

void check_step(double loss, const Model& model, int step) {
  if (!std::isfinite(loss) || !all_finite(parameters(model))) {
    throw Error(ErrorKind::NumericalDivergence, "non-finite loss or parameters at step " +
                                                    std::to_string(step));
  }
}

std::vector<ContextId> contexts_of(std::span<const LabeledRow> dataset) {
  std::vector<ContextId> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset) out.push_back(r.context);
  return out;
}

// Runs `epochs` distillation steps toward a frozen target; returns the loss
// after the last step.
double distill_epochs(Model& model, const AnchorTable& target, std::span<const ContextId> contexts,
                      const FeatureSet& features, int epochs, double lr,
                      std::optional<double> converge_tol, int step_offset) {
  for (int k = 0; k < epochs; ++k) {
    const LossAndGrad lg = distill_loss_and_grad(model, target, contexts, features);
    check_step(lg.loss, model, step_offset + k);
    if (converge_tol && lg.loss < *converge_tol) return lg.loss;
    apply_step(model, lg.gradient, lr);
  }
  const double loss = distill_loss_and_grad(model, target, contexts, features).loss;
  check_step(loss, model, step_offset + epochs);
  return loss;
}

TrainResult run_gradient_baseline(Model model, std::span<const LabeledRow> dataset,
                                  const FeatureSet& features, const Model* base,
                                  const TrainConfig& cfg, const Telemetry& telemetry) {
  cfg.validate();
  const std::vector<ContextId> contexts = contexts_of(dataset);
  const auto metric_contexts = telemetry_contexts(telemetry, contexts);
  TrajectoryRecord record{cfg.method, std::nullopt, std::nullopt, {}};
  record.rows.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int e = 0; e < cfg.epochs; ++e) {
    LossAndGrad lg = nll_loss_and_grad(model, dataset, features);
    if (base != nullptr) {
      const LossAndGrad pen = kl_penalty_grad(model, *base, contexts, features, *cfg.lambda);
      lg.loss += pen.loss;
      for (std::size_t k = 0; k < lg.gradient.data.size(); ++k) {
        lg.gradient.data[k] += pen.gradient.data[k];
      }
    }
    check_step(lg.loss, model, e);
    apply_step(model, lg.gradient, cfg.lr);
    check_step(0.0, model, e);
    TrajectoryRow row;
    row.t = e;
    record_model_metrics(row, model, telemetry, metric_contexts, features);
    record.rows.push_back(row);
  }
  return {std::move(model), std::move(record)};
}

}  // namespace

TrainResult train_sft(Model init, std::span<const LabeledRow> dataset, const FeatureSet& features,
                      const TrainConfig& cfg, const Telemetry& telemetry) {
  if (cfg.method != Method::Sft && cfg.method != Method::LowSft) {
    throw Error(ErrorKind::InvalidInput, "train_sft needs method sft or low_sft");
  }
  return run_gradient_baseline(std::move(init), dataset, features, nullptr, cfg, telemetry);
}

TrainResult train_kl_sft(Model init, std::span<const LabeledRow> dataset,
                         const FeatureSet& features, const Model& base, const TrainConfig& cfg,
                         const Telemetry& telemetry) {
  if (cfg.method != Method::KlSft) throw Error(ErrorKind::InvalidInput, "train_kl_sft needs kl_sft");
  return run_gradient_baseline(std::move(init), dataset, features, &base, cfg, telemetry);
}

AnchorTable static_barycenter_target(const Model& sft, const Model& base, double beta,
                                     std::span<const ContextId> contexts,
                                     const FeatureSet& features) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorKind::InvalidCoefficient, "beta must lie in (0, 1)");
  }
  if (contexts.empty()) throw Error(ErrorKind::InvalidInput, "static barycenter needs contexts");
  if (vocab_size(sft) != vocab_size(base)) {
    throw Error(ErrorKind::ShapeError, "sft and base vocabularies differ");
  }
  std::vector<ProbVector> targets;
  targets.reserve(contexts.size());
  for (ContextId x : contexts) {
    targets.push_back(
        geodesic_point(predict(sft, x, features), predict(base, x, features), beta).q);
  }
  return AnchorTable({contexts.begin(), contexts.end()}, std::move(targets),
                     InterpolationSpace::Logit, beta);
}

TrainResult train_static_barycenter(Model init, const Model& sft, const Model& base,
                                    const FeatureSet& features,
                                    std::span<const ContextId> contexts, const TrainConfig& cfg,
                                    const Telemetry& telemetry) {
  if (cfg.method != Method::StaticBarycenter) {
    throw Error(ErrorKind::InvalidInput, "train_static_barycenter needs static_barycenter");
  }
  cfg.validate();
  const AnchorTable target = static_barycenter_target(sft, base, *cfg.beta, contexts, features);
  const auto metric_contexts = telemetry_contexts(telemetry, contexts);
  TrajectoryRecord record{cfg.method, std::nullopt, std::nullopt, {}};
  Model model = std::move(init);
  for (int e = 0; e < cfg.epochs; ++e) {
    TrajectoryRow row;
    row.t = e;
    const LossAndGrad lg = distill_loss_and_grad(model, target, contexts, features);
    check_step(lg.loss, model, e);
    row.kl_anchor_model = lg.loss;
    apply_step(model, lg.gradient, cfg.lr);
    const double after = distill_loss_and_grad(model, target, contexts, features).loss;
    check_step(after, model, e);
    row.inner_final_distill_loss = after;
    record_model_metrics(row, model, telemetry, metric_contexts, features);
    record.rows.push_back(row);
  }
  return {std::move(model), std::move(record)};
}

TrainResult anchored_learning(const Model& base, const Model& sft, const FeatureSet& features,
                              std::span<const ContextId> contexts, const TrainConfig& cfg,
                              const Telemetry& telemetry) {
  if (cfg.method != Method::Anchored) {
    throw Error(ErrorKind::InvalidInput, "anchored_learning needs method anchored");
  }
  cfg.validate();
  if (contexts.empty()) throw Error(ErrorKind::InvalidInput, "anchored learning needs contexts");
  const AnchorConfig& ac = *cfg.anchor;
  const auto metric_contexts = telemetry_contexts(telemetry, contexts);

  // p_sft per context never changes; compute once.
  std::vector<ProbVector> sft_dists;
  sft_dists.reserve(contexts.size());
  for (ContextId x : contexts) sft_dists.push_back(predict(sft, x, features));

  TrajectoryRecord record{cfg.method, ac.space, ac.alpha, {}};
  Model model = base;
  for (int t = 0; t < ac.outer_iters; ++t) {
    const AnchorTable anchor = build_anchor(model, sft, contexts, features, ac);

    TrajectoryRow row;
    row.t = t;
    double kl_sum = 0.0;
    double bound_sum = 0.0;
    double kl_max = 0.0;
    double excess_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      const ProbVector p = predict(model, contexts[i], features);
      const double kl_x = kl(anchor.distributions()[i], p);
      const double bound_x = anchor_bound_rhs(ac.space, p, sft_dists[i], ac.alpha);
      kl_sum += kl_x;
      bound_sum += bound_x;
      kl_max = std::max(kl_max, kl_x);
      excess_max = std::max(excess_max, kl_x - bound_x);
    }
    const double m = static_cast<double>(contexts.size());
    row.kl_anchor_model = kl_sum / m;
    row.lemma_bound = bound_sum / m;
    row.max_kl_anchor_model = kl_max;
    row.max_bound_excess = excess_max;

    row.inner_final_distill_loss = distill_epochs(model, anchor, contexts, features,
                                                  ac.inner_epochs, ac.inner_lr, ac.converge_tol,
                                                  t * ac.inner_epochs);
    record_model_metrics(row, model, telemetry, metric_contexts, features);
    record.rows.push_back(row);
  }
  return {std::move(model), std::move(record)};
}

RecursionResult exact_projection_recursion(std::span<const ProbVector> base,
                                           std::span<const ProbVector> sft, double alpha, int T) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::InvalidCoefficient, "alpha must lie in (0, 1)");
  }
  if (T < 0) throw Error(ErrorKind::InvalidInput, "T must be >= 0");
  if (base.empty()) throw Error(ErrorKind::InvalidInput, "recursion needs at least one context");
  require_same_size(base.size(), sft.size(), "exact_projection_recursion");
  const std::size_t M = base.size();
  const std::size_t V = base.front().size();

  Model model = TabularModel(M, V);
  for (std::size_t x = 0; x < M; ++x) {
    require_same_size(base[x].size(), V, "base vocabulary");
    require_same_size(sft[x].size(), V, "sft vocabulary");
    set_distribution_exactly(model, x, base[x]);
  }

  RecursionResult out;
  out.trajectory.method = Method::ExactRecursion;
  out.trajectory.space = InterpolationSpace::Probability;
  out.trajectory.alpha = alpha;
  const FeatureSet no_features;

  // Current iterate; p_0 is base itself, not its softmax(ln) round trip.
  std::vector<ProbVector> current(base.begin(), base.end());
  for (int t = 0;; ++t) {
    TrajectoryRow row;
    row.t = t;
    std::vector<double> kls(M);
    double to_base = 0.0;
    for (std::size_t x = 0; x < M; ++x) {
      kls[x] = kl(current[x], sft[x]);
      to_base += kl(current[x], base[x]);
    }
    row.kl_to_sft = std::accumulate(kls.begin(), kls.end(), 0.0) / static_cast<double>(M);
    row.kl_to_base = to_base / static_cast<double>(M);
    out.iterates.push_back(current);
    out.kl_to_sft.push_back(std::move(kls));

    if (t == T) {
      out.trajectory.rows.push_back(row);
      break;
    }
    double kl_sum = 0.0;
    double bound_sum = 0.0;
    double excess_max = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < M; ++x) {
      const ProbVector q = interpolate_prob(current[x], sft[x], alpha);
      const double kl_x = kl(q, current[x]);
      const double bound_x = prob_bound_rhs(current[x], sft[x], alpha);
      kl_sum += kl_x;
      bound_sum += bound_x;
      excess_max = std::max(excess_max, kl_x - bound_x);
      set_distribution_exactly(model, x, q);
    }
    row.kl_anchor_model = kl_sum / static_cast<double>(M);
    row.lemma_bound = bound_sum / static_cast<double>(M);
    row.max_bound_excess = excess_max;
    out.trajectory.rows.push_back(row);
    for (std::size_t x = 0; x < M; ++x) current[x] = predict(model, x, no_features);
  }
  return out;
}

}  // namespace anchorlab
