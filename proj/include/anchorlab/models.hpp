#pragma once

// Toy conditional models with analytic gradients.
//
// TabularModel keeps one independent logit row per context, so any target
// distribution can be matched exactly. LinearSoftmaxModel shares one V x d
// weight matrix across contexts (z(x) = W phi(x)); fitting one task moves the
// predictions on every other input, which is what produces forgetting.

#include <iosfwd>
#include <span>
#include <string_view>
#include <variant>

#include "anchorlab/anchor_table.hpp"
#include "anchorlab/matrix.hpp"
#include "anchorlab/simplex.hpp"
#include "anchorlab/types.hpp"

namespace anchorlab {

// phi(x) for every context id; row x of `phi`.
struct FeatureSet {
  Matrix phi;

  FeatureSet() = default;
  explicit FeatureSet(Matrix features);

  std::size_t size() const noexcept { return phi.rows; }
  std::size_t dim() const noexcept { return phi.cols; }
  std::span<const double> at(ContextId context) const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;
};

class TabularModel {
 public:
  // num_contexts rows of zeros (uniform predictions).
  TabularModel(std::size_t num_contexts, std::size_t vocab);
  explicit TabularModel(Matrix logits);

  std::size_t vocab_size() const noexcept { return logits_.cols; }
  std::size_t num_contexts() const noexcept { return logits_.rows; }
  const Matrix& params() const noexcept { return logits_; }
  Matrix& params() noexcept { return logits_; }

  friend bool operator==(const TabularModel&, const TabularModel&) = default;

 private:
  Matrix logits_;
};

class LinearSoftmaxModel {
 public:
  // All-zero weights (uniform predictions on every input).
  LinearSoftmaxModel(std::size_t vocab, std::size_t feature_dim);
  explicit LinearSoftmaxModel(Matrix weights);

  std::size_t vocab_size() const noexcept { return weights_.rows; }
  std::size_t feature_dim() const noexcept { return weights_.cols; }
  const Matrix& params() const noexcept { return weights_; }
  Matrix& params() noexcept { return weights_; }

  friend bool operator==(const LinearSoftmaxModel&, const LinearSoftmaxModel&) = default;

 private:
  Matrix weights_;
};

using Model = std::variant<TabularModel, LinearSoftmaxModel>;

std::size_t vocab_size(const Model& model) noexcept;
const Matrix& parameters(const Model& model) noexcept;
Matrix& parameters(Model& model) noexcept;
std::string_view family_name(const Model& model) noexcept;

// Stored row (tabular) or W phi(x) (linear). Tabular models ignore features.
LogitVector model_logits(const Model& model, ContextId context, const FeatureSet& features);
ProbVector predict(const Model& model, ContextId context, const FeatureSet& features);

// Logits for a batch of contexts, one row per entry of `contexts`.
Matrix batch_logits(const Model& model, std::span<const ContextId> contexts,
                    const FeatureSet& features);
// Row-wise log-softmax of batch_logits.
Matrix batch_log_probs(const Model& model, std::span<const ContextId> contexts,
                       const FeatureSet& features);

struct LabeledRow {
  ContextId context;
  std::size_t label;

  friend bool operator==(const LabeledRow&, const LabeledRow&) = default;
};

struct LossAndGrad {
  double loss = 0.0;
  Matrix gradient;  // same shape as the model parameters
};

// (1/M) sum_x KL(anchor(x) || softmax(z(x))). Logit gradient (p - q)/M.
LossAndGrad distill_loss_and_grad(const Model& model, const AnchorTable& anchor,
                                  std::span<const ContextId> contexts, const FeatureSet& features);

// (1/N) sum -log softmax(z(x))[y]. Logit gradient (p - onehot(y))/N.
LossAndGrad nll_loss_and_grad(const Model& model, std::span<const LabeledRow> dataset,
                              const FeatureSet& features);

// (lambda/M) sum_x KL(softmax(z(x)) || p_ref(x)).
// Logit gradient (lambda/M) p (log p - log p_ref - KL).
LossAndGrad kl_penalty_grad(const Model& model, const Model& reference,
                            std::span<const ContextId> contexts, const FeatureSet& features,
                            double lambda);

// params <- params - lr * gradient
void apply_step(Model& model, const Matrix& gradient, double lr);

// Tabular only: row <- ln(target), so softmax(row) reproduces target.
void set_distribution_exactly(Model& model, ContextId context, const ProbVector& target);

// Argmax of the model's logits, ties toward the lowest index.
std::size_t predict_label(const Model& model, ContextId context, const FeatureSet& features);

// Text format:
//   anchorlab-model v1 <tabular|linear> <V> <M-or-d>
//   one line per parameter row, space separated, 17 significant digits.
void save_model(const Model& model, std::ostream& out);
Model load_model(std::istream& in);

}  // namespace anchorlab
