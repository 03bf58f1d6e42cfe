#pragma once

// Seeded two-task benchmark over a shared linear-softmax model. A general
// teacher and an independently drawn domain teacher label i.i.d. standard
// normal features; the base model learns the general task, then adaptation
// methods see only domain data. General data is used for base pretraining
// and for evaluation, never by an adaptation method.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "anchorlab/models.hpp"
#include "anchorlab/trainers.hpp"

namespace anchorlab {

struct TaskSpec {
  std::uint64_t seed = 42;
  std::size_t V = 8;
  std::size_t d = 16;
  std::size_t n_general_train = 512;
  std::size_t n_general_test = 512;
  std::size_t n_domain_train = 256;
  std::size_t n_domain_test = 512;
  // Teacher weights are N(0, 1) / noise_temp. Labels are argmaxes, so this
  // only sharpens or flattens the teachers' soft predictions.
  double noise_temp = 1.0;

  void validate() const;
};

enum class Split { GeneralTrain, GeneralTest, DomainTrain, DomainTest };
std::string_view to_string(Split split) noexcept;

struct LabeledDataset {
  Split split = Split::GeneralTrain;
  std::vector<LabeledRow> rows;  // context ids 0..n-1, one row each
  FeatureSet features;

  std::vector<ContextId> contexts() const;
};

struct Task {
  TaskSpec spec;
  Matrix teacher_general;  // V x d
  Matrix teacher_domain;   // V x d
  LabeledDataset general_train;
  LabeledDataset general_test;
  LabeledDataset domain_train;
  LabeledDataset domain_test;
};

// Streams: general teacher scramble(seed, 0), domain teacher scramble(seed, 1),
// features of split k scramble(seed, 2 + k) in Split order. Normals by
// Box-Muller on mt19937_64 draws.
Task generate_task(const TaskSpec& spec);

// Fraction of rows whose argmax prediction (ties toward the lowest index)
// equals the label.
double evaluate_accuracy(const Model& model, const LabeledDataset& dataset);

struct PipelineConfig {
  TaskSpec task;
  // Base model: zero-initialized linear model trained by SFT on GeneralTrain.
  double base_lr = 0.5;
  int base_epochs = 300;
  // Frozen reference p_sft: trained from base by SFT on DomainTrain.
  double sft_lr = 0.5;
  int sft_epochs = 200;
  TrainConfig method;
};

// Inner-loop step size for the linear benchmark. Five full-batch epochs at
// this rate move the shared weights most of the way to each anchor; at 0.1
// the model barely leaves the base in T = K = 5.
inline constexpr double kLinearInnerLr = 8.0;

// Defaults used by the shipped configuration and the acceptance suite.
PipelineConfig default_pipeline_config(Method method = Method::Anchored);

struct Summary {
  Method method = Method::Sft;
  std::optional<InterpolationSpace> space;
  std::optional<double> alpha;
  std::optional<int> T;
  std::optional<int> K;
  double domain_acc = 0.0;
  double general_acc = 0.0;
  double kl_to_base = 0.0;
  double kl_to_sft = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kSummaryCsvHeader =
    "method,space,alpha,T,K,domain_acc,general_acc,kl_to_base,kl_to_sft,seed";

std::string summary_csv_row(const Summary& summary);
void write_summary_csv(std::span<const Summary> rows, std::ostream& out);

// Task plus the two frozen models every method run starts from.
struct PreparedPipeline {
  Task task;
  Model base;
  Model sft;
  Accuracies base_acc;
  Accuracies sft_acc;
};

PreparedPipeline prepare_pipeline(const PipelineConfig& cfg);

struct PipelineResult {
  TrajectoryRecord trajectory;
  Summary summary;
  Model final_model;
  Accuracies base_acc;
  Accuracies sft_acc;
};

// Runs `method` from the prepared base on DomainTrain, evaluating domain
// accuracy on DomainTest and general accuracy on GeneralTest after each step.
PipelineResult run_method(const PreparedPipeline& prepared, const TrainConfig& method);

PipelineResult run_pipeline(const PipelineConfig& cfg);

struct RunOutcome {
  std::optional<PipelineResult> result;
  std::optional<Error> error;
};

// Runs each config against the shared prepared pipeline; outcomes are in
// input order whatever the scheduling. threads <= 0 means the OpenMP default.
std::vector<RunOutcome> run_many(const PreparedPipeline& prepared,
                                 std::span<const TrainConfig> configs, int threads = 0);

// One summary row per alpha, in input order. Every run shares the task, base
// and sft models (common random numbers); runs execute concurrently on up to
// `threads` threads (0 = OpenMP default).
std::vector<Summary> sweep_alpha(const PipelineConfig& cfg, std::span<const double> alphas,
                                 int threads = 0);

}  // namespace anchorlab
