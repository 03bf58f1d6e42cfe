#include "anchorlab/models.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "anchorlab/kernels.hpp"

namespace anchorlab {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) throw Error(ErrorKind::InvalidInput, std::string(what) + " must be finite");
}

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void check_context(const Model& model, ContextId context, const FeatureSet& features) {
  std::visit(Overloaded{
                 [&](const TabularModel& m) {
                   if (context >= m.num_contexts()) {
                     throw Error(ErrorKind::UnknownContext,
                                 "context " + std::to_string(context) + " has no logit row");
                   }
                 },
                 [&](const LinearSoftmaxModel& m) {
                   if (context >= features.size()) {
                     throw Error(ErrorKind::UnknownContext,
                                 "context " + std::to_string(context) + " has no features");
                   }
                   if (features.dim() != m.feature_dim()) {
                     throw Error(ErrorKind::ShapeError, "feature dimension does not match weights");
                   }
                 },
             },
             model);
}

// Scatters per-context logit gradients into parameter space.
Matrix chain_to_params(const Model& model, const Matrix& logit_grads,
                       std::span<const ContextId> contexts, const FeatureSet& features) {
  return std::visit(Overloaded{
                        [&](const TabularModel& m) {
                          Matrix grad(m.num_contexts(), m.vocab_size());
                          for (std::size_t i = 0; i < contexts.size(); ++i) {
                            auto dst = grad.row(contexts[i]);
                            auto src = logit_grads.row(i);
                            for (std::size_t v = 0; v < dst.size(); ++v) dst[v] += src[v];
                          }
                          return grad;
                        },
                        [&](const LinearSoftmaxModel&) {
                          Matrix grad;
                          kernels::omp::linear_weight_grad(logit_grads, features.phi, contexts,
                                                           1.0, grad);
                          return grad;
                        },
                    },
                    model);
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FeatureSet::FeatureSet(Matrix features) : phi(std::move(features)) {
  require_finite(phi, "features");
}

std::span<const double> FeatureSet::at(ContextId context) const {
  if (context >= phi.rows) {
    throw Error(ErrorKind::UnknownContext, "context " + std::to_string(context) + " has no features");
  }
  return phi.row(context);
}

TabularModel::TabularModel(std::size_t num_contexts, std::size_t vocab)
    : logits_(num_contexts, vocab) {
  if (vocab < 2) throw Error(ErrorKind::InvalidInput, "vocabulary needs at least 2 entries");
}

TabularModel::TabularModel(Matrix logits) : logits_(std::move(logits)) {
  if (logits_.cols < 2) throw Error(ErrorKind::InvalidInput, "vocabulary needs at least 2 entries");
  require_finite(logits_, "tabular logits");
}

LinearSoftmaxModel::LinearSoftmaxModel(std::size_t vocab, std::size_t feature_dim)
    : weights_(vocab, feature_dim) {
  if (vocab < 2) throw Error(ErrorKind::InvalidInput, "vocabulary needs at least 2 entries");
}

LinearSoftmaxModel::LinearSoftmaxModel(Matrix weights) : weights_(std::move(weights)) {
  if (weights_.rows < 2) throw Error(ErrorKind::InvalidInput, "vocabulary needs at least 2 entries");
  require_finite(weights_, "linear weights");
}

std::size_t vocab_size(const Model& model) noexcept {
  return std::visit([](const auto& m) { return m.vocab_size(); }, model);
}

const Matrix& parameters(const Model& model) noexcept {
  return std::visit([](const auto& m) -> const Matrix& { return m.params(); }, model);
}

Matrix& parameters(Model& model) noexcept {
  return std::visit([](auto& m) -> Matrix& { return m.params(); }, model);
}

std::string_view family_name(const Model& model) noexcept {
  return std::holds_alternative<TabularModel>(model) ? "tabular" : "linear";
}

LogitVector model_logits(const Model& model, ContextId context, const FeatureSet& features) {
  check_context(model, context, features);
  return std::visit(Overloaded{
                        [&](const TabularModel& m) {
                          auto row = m.params().row(context);
                          return LogitVector({row.begin(), row.end()});
                        },
                        [&](const LinearSoftmaxModel& m) {
                          const auto phi = features.phi.row(context);
                          std::vector<double> z(m.vocab_size(), 0.0);
                          for (std::size_t v = 0; v < z.size(); ++v) {
                            for (std::size_t c = 0; c < phi.size(); ++c) {
                              z[v] += m.params()(v, c) * phi[c];
                            }
                          }
                          return LogitVector(std::move(z));
                        },
                    },
                    model);
}

ProbVector predict(const Model& model, ContextId context, const FeatureSet& features) {
  return softmax(model_logits(model, context, features));
}

Matrix batch_logits(const Model& model, std::span<const ContextId> contexts,
                    const FeatureSet& features) {
  for (ContextId c : contexts) check_context(model, c, features);
  return std::visit(Overloaded{
                        [&](const TabularModel& m) {
                          Matrix out(contexts.size(), m.vocab_size());
                          for (std::size_t i = 0; i < contexts.size(); ++i) {
                            auto src = m.params().row(contexts[i]);
                            std::copy(src.begin(), src.end(), out.row(i).begin());
                          }
                          return out;
                        },
                        [&](const LinearSoftmaxModel& m) {
                          Matrix out;
                          kernels::omp::linear_logits(m.params(), features.phi, contexts, out);
                          return out;
                        },
                    },
                    model);
}

Matrix batch_log_probs(const Model& model, std::span<const ContextId> contexts,
                       const FeatureSet& features) {
  Matrix log_probs;
  kernels::omp::row_log_softmax(batch_logits(model, contexts, features), log_probs);
  return log_probs;
}

LossAndGrad distill_loss_and_grad(const Model& model, const AnchorTable& anchor,
                                  std::span<const ContextId> contexts, const FeatureSet& features) {
  if (contexts.empty()) throw Error(ErrorKind::InvalidInput, "distillation needs contexts");
  if (anchor.vocab_size() != vocab_size(model)) {
    throw Error(ErrorKind::ShapeError, "anchor vocabulary does not match model");
  }
  const Matrix log_p = batch_log_probs(model, contexts, features);
  const double inv_m = 1.0 / static_cast<double>(contexts.size());

  Matrix logit_grads(contexts.size(), vocab_size(model));
  double loss = 0.0;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const ProbVector& q = anchor.at(contexts[i]);
    const auto lp = log_p.row(i);
    double term = 0.0;
    for (std::size_t v = 0; v < q.size(); ++v) {
      term += q[v] * (std::log(q[v]) - lp[v]);
      logit_grads(i, v) = (std::exp(lp[v]) - q[v]) * inv_m;
    }
    loss += term;
  }
  return {loss * inv_m, chain_to_params(model, logit_grads, contexts, features)};
}

LossAndGrad nll_loss_and_grad(const Model& model, std::span<const LabeledRow> dataset,
                              const FeatureSet& features) {
  if (dataset.empty()) throw Error(ErrorKind::InvalidInput, "empty dataset");
  const std::size_t V = vocab_size(model);
  std::vector<ContextId> contexts;
  contexts.reserve(dataset.size());
  for (const auto& row : dataset) {
    if (row.label >= V) {
      throw Error(ErrorKind::InvalidLabel, "label " + std::to_string(row.label) +
                                               " outside vocabulary of size " + std::to_string(V));
    }
    contexts.push_back(row.context);
  }
  const Matrix log_p = batch_log_probs(model, contexts, features);
  const double inv_n = 1.0 / static_cast<double>(dataset.size());

  Matrix logit_grads(dataset.size(), V);
  double loss = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto lp = log_p.row(i);
    loss -= lp[dataset[i].label];
    for (std::size_t v = 0; v < V; ++v) {
      const double target = v == dataset[i].label ? 1.0 : 0.0;
      logit_grads(i, v) = (std::exp(lp[v]) - target) * inv_n;
    }
  }
  return {loss * inv_n, chain_to_params(model, logit_grads, contexts, features)};
}

LossAndGrad kl_penalty_grad(const Model& model, const Model& reference,
                            std::span<const ContextId> contexts, const FeatureSet& features,
                            double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidCoefficient, "KL penalty weight must be finite and >= 0");
  }
  if (contexts.empty()) throw Error(ErrorKind::InvalidInput, "KL penalty needs contexts");
  if (vocab_size(reference) != vocab_size(model)) {
    throw Error(ErrorKind::ShapeError, "reference vocabulary does not match model");
  }
  const std::size_t V = vocab_size(model);
  const Matrix log_p = batch_log_probs(model, contexts, features);
  const Matrix log_r = batch_log_probs(reference, contexts, features);
  const double scale = lambda / static_cast<double>(contexts.size());

  Matrix logit_grads(contexts.size(), V);
  double loss = 0.0;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto lp = log_p.row(i);
    const auto lr = log_r.row(i);
    double kl_i = 0.0;
    for (std::size_t v = 0; v < V; ++v) kl_i += std::exp(lp[v]) * (lp[v] - lr[v]);
    loss += kl_i;
    for (std::size_t v = 0; v < V; ++v) {
      logit_grads(i, v) = scale * std::exp(lp[v]) * (lp[v] - lr[v] - kl_i);
    }
  }
  return {loss * scale, chain_to_params(model, logit_grads, contexts, features)};
}

void apply_step(Model& model, const Matrix& gradient, double lr) {
  Matrix& params = parameters(model);
  if (!params.same_shape(gradient)) {
    throw Error(ErrorKind::ShapeError, "gradient shape does not match parameters");
  }
  for (std::size_t k = 0; k < params.data.size(); ++k) params.data[k] -= lr * gradient.data[k];
}

void set_distribution_exactly(Model& model, ContextId context, const ProbVector& target) {
  auto* tab = std::get_if<TabularModel>(&model);
  if (tab == nullptr) {
    throw Error(ErrorKind::Unsupported, "exact projection needs a tabular model");
  }
  if (context >= tab->num_contexts()) {
    throw Error(ErrorKind::UnknownContext, "context " + std::to_string(context) + " has no row");
  }
  require_same_size(target.size(), tab->vocab_size(), "set_distribution_exactly");
  auto row = tab->params().row(context);
  for (std::size_t v = 0; v < row.size(); ++v) row[v] = std::log(target[v]);
}

std::size_t predict_label(const Model& model, ContextId context, const FeatureSet& features) {
  const LogitVector z = model_logits(model, context, features);
  std::size_t best = 0;
  for (std::size_t v = 1; v < z.size(); ++v) {
    if (z[v] > z[best]) best = v;
  }
  return best;
}

void save_model(const Model& model, std::ostream& out) {
  const Matrix& p = parameters(model);
  const bool tabular = std::holds_alternative<TabularModel>(model);
  // header: family, V, then M (tabular) or d (linear)
  out << "anchorlab-model v1 " << family_name(model) << ' ' << vocab_size(model) << ' '
      << (tabular ? p.rows : p.cols) << '\n';
  for (std::size_t r = 0; r < p.rows; ++r) {
    for (std::size_t c = 0; c < p.cols; ++c) {
      if (c > 0) out << ' ';
      out << format_real(p(r, c));
    }
    out << '\n';
  }
}

Model load_model(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorKind::InvalidInput, "missing model header");
  std::istringstream hs(header);
  std::string magic, version, family;
  std::size_t V = 0, extent = 0;
  if (!(hs >> magic >> version >> family >> V >> extent) || magic != "anchorlab-model" ||
      version != "v1") {
    throw Error(ErrorKind::InvalidInput, "bad model header: " + header);
  }
  const bool tabular = family == "tabular";
  if (!tabular && family != "linear") {
    throw Error(ErrorKind::InvalidInput, "unknown model family: " + family);
  }
  Matrix p = tabular ? Matrix(extent, V) : Matrix(V, extent);
  for (std::size_t r = 0; r < p.rows; ++r) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::InvalidInput, "truncated model file");
    std::istringstream ls(line);
    for (std::size_t c = 0; c < p.cols; ++c) {
      if (!(ls >> p(r, c))) {
        throw Error(ErrorKind::InvalidInput, "bad parameter row " + std::to_string(r));
      }
    }
  }
  if (tabular) return TabularModel(std::move(p));
  return LinearSoftmaxModel(std::move(p));
}

}  // namespace anchorlab
