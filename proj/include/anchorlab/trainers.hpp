#pragma once

// Training procedures. Every optimizer here is full-batch gradient descent
// with a fixed learning rate, so one epoch is one step and runs are exactly
// reproducible.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "anchorlab/anchor.hpp"
#include "anchorlab/models.hpp"

namespace anchorlab {

enum class Method { Sft, LowSft, KlSft, StaticBarycenter, Anchored, ExactRecursion };

std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view text);

struct TrainConfig {
  Method method = Method::Sft;
  double lr = 0.5;
  int epochs = 100;
  std::optional<double> lambda;        // KlSft
  std::optional<double> beta;          // StaticBarycenter
  std::optional<AnchorConfig> anchor;  // Anchored, ExactRecursion
  std::uint64_t seed = 42;

  // Method-specific fields must be present exactly when the method uses them.
  void validate() const;
};

struct TrajectoryRow {
  int t = 0;
  // Anchor-vs-current-model divergence and its bound, both means over
  // contexts, measured on the frozen anchor before the inner loop.
  std::optional<double> kl_anchor_model;
  std::optional<double> lemma_bound;
  // Drift of the model after step t, means over the training contexts.
  double kl_to_base = 0.0;
  double kl_to_sft = 0.0;
  std::optional<double> inner_final_distill_loss;
  std::optional<double> domain_acc;
  std::optional<double> general_acc;
  // Per-context extremes, kept for the trust-region check (not in the CSV).
  std::optional<double> max_kl_anchor_model;
  std::optional<double> max_bound_excess;  // max_x kl_x - bound_x
};

struct TrajectoryRecord {
  Method method = Method::Sft;
  std::optional<InterpolationSpace> space;
  std::optional<double> alpha;
  std::vector<TrajectoryRow> rows;
};

inline constexpr std::string_view kTrajectoryCsvHeader =
    "method,space,alpha,t,kl_anchor_model,lemma_bound,kl_to_base,kl_to_sft,"
    "inner_final_distill_loss,domain_acc,general_acc";

void write_trajectory_csv(const TrajectoryRecord& record, std::ostream& out, bool header = true);

struct Accuracies {
  double domain = 0.0;
  double general = 0.0;
};

// What every trainer measures after each step. base/sft may be absent, in
// which case the corresponding KL column is 0; evaluate may be empty, in which
// case the accuracy columns stay empty.
struct Telemetry {
  std::optional<Model> base;
  std::optional<Model> sft;
  std::vector<ContextId> contexts;
  std::function<Accuracies(const Model&)> evaluate;
};

struct TrainResult {
  Model model;
  TrajectoryRecord trajectory;
};

TrainResult train_sft(Model init, std::span<const LabeledRow> dataset, const FeatureSet& features,
                      const TrainConfig& cfg, const Telemetry& telemetry = {});

// Each step descends nll + lambda * mean KL(p_theta || p_base) over the
// dataset's contexts.
TrainResult train_kl_sft(Model init, std::span<const LabeledRow> dataset,
                         const FeatureSet& features, const Model& base, const TrainConfig& cfg,
                         const Telemetry& telemetry = {});

// Per context, the minimizer of (1 - beta) KL(u||sft) + beta KL(u||base):
// u_i proportional to sft_i^(1-beta) base_i^beta.
AnchorTable static_barycenter_target(const Model& sft, const Model& base, double beta,
                                     std::span<const ContextId> contexts,
                                     const FeatureSet& features);

// Distills toward the fixed static_barycenter_target for cfg.epochs steps.
TrainResult train_static_barycenter(Model init, const Model& sft, const Model& base,
                                    const FeatureSet& features,
                                    std::span<const ContextId> contexts, const TrainConfig& cfg,
                                    const Telemetry& telemetry = {});

// Starting from base: T outer iterations, each freezing an anchor built from
// (current, sft) and running K distillation epochs toward it.
TrainResult anchored_learning(const Model& base, const Model& sft, const FeatureSet& features,
                              std::span<const ContextId> contexts, const TrainConfig& cfg,
                              const Telemetry& telemetry = {});

struct RecursionResult {
  // iterates[t][x] for t = 0..T; iterates[0] is base.
  std::vector<std::vector<ProbVector>> iterates;
  // kl_to_sft[t][x] = KL(p_t(x) || sft(x))
  std::vector<std::vector<double>> kl_to_sft;
  TrajectoryRecord trajectory;  // one row per t = 0..T, means over contexts
};

// Probability-space anchoring with exact projection: a tabular model is set
// to the anchor after every outer iteration, giving
// p_{t+1} = (1 - alpha) p_t + alpha sft.
RecursionResult exact_projection_recursion(std::span<const ProbVector> base,
                                           std::span<const ProbVector> sft, double alpha, int T);

}  // namespace anchorlab
