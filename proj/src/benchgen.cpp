#include "anchorlab/benchgen.hpp"

#include <omp.h>

#include <ostream>
#include <string>

#include "anchorlab/csv.hpp"
#include "anchorlab/rng.hpp"

namespace anchorlab {

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::GeneralTrain: return "general_train";
    case Split::GeneralTest: return "general_test";
    case Split::DomainTrain: return "domain_train";
    case Split::DomainTest: return "domain_test";
  }
  return "unknown";
}

void TaskSpec::validate() const {
  if (V < 2) throw Error(ErrorKind::InvalidInput, "task.V must be >= 2");
  if (d < 2) throw Error(ErrorKind::InvalidInput, "task.d must be >= 2");
  if (n_general_train < 1 || n_general_test < 1 || n_domain_train < 1 || n_domain_test < 1) {
    throw Error(ErrorKind::InvalidInput, "task split sizes must be >= 1");
  }
  if (!(noise_temp > 0.0) || !std::isfinite(noise_temp)) {
    throw Error(ErrorKind::InvalidInput, "task.noise_temp must be positive");
  }
}

std::vector<ContextId> LabeledDataset::contexts() const {
  std::vector<ContextId> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.context);
  return out;
}

namespace {

Matrix normal_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols, double scale) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.normal() * scale;
  return m;
}

LabeledDataset make_split(const TaskSpec& spec, Split split, const Matrix& teacher,
                          std::size_t n) {
  const auto k = static_cast<std::uint64_t>(split);
  LabeledDataset ds;
  ds.split = split;
  ds.features = FeatureSet(normal_matrix(scramble(spec.seed, 2 + k), n, spec.d, 1.0));
  const Model teacher_model = LinearSoftmaxModel(teacher);
  ds.rows.reserve(n);
  for (std::size_t x = 0; x < n; ++x) {
    ds.rows.push_back({x, predict_label(teacher_model, x, ds.features)});
  }
  return ds;
}

Accuracies evaluate_both(const Model& model, const Task& task) {
  return {evaluate_accuracy(model, task.domain_test), evaluate_accuracy(model, task.general_test)};
}

double mean_kl(const Model& model, const Model& ref, const LabeledDataset& ds) {
  const auto contexts = ds.contexts();
  double sum = 0.0;
  for (ContextId x : contexts) sum += kl(predict(model, x, ds.features), predict(ref, x, ds.features));
  return sum / static_cast<double>(contexts.size());
}

}  // namespace

Task generate_task(const TaskSpec& spec) {
  spec.validate();
  Task task;
  task.spec = spec;
  const double scale = 1.0 / spec.noise_temp;
  task.teacher_general = normal_matrix(scramble(spec.seed, 0), spec.V, spec.d, scale);
  task.teacher_domain = normal_matrix(scramble(spec.seed, 1), spec.V, spec.d, scale);
  task.general_train = make_split(spec, Split::GeneralTrain, task.teacher_general, spec.n_general_train);
  task.general_test = make_split(spec, Split::GeneralTest, task.teacher_general, spec.n_general_test);
  task.domain_train = make_split(spec, Split::DomainTrain, task.teacher_domain, spec.n_domain_train);
  task.domain_test = make_split(spec, Split::DomainTest, task.teacher_domain, spec.n_domain_test);
  return task;
}

double evaluate_accuracy(const Model& model, const LabeledDataset& dataset) {
  if (dataset.rows.empty()) throw Error(ErrorKind::InvalidInput, "accuracy of an empty dataset");
  std::size_t hits = 0;
  for (const auto& r : dataset.rows) {
    if (predict_label(model, r.context, dataset.features) == r.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(dataset.rows.size());
}

PipelineConfig default_pipeline_config(Method method) {
  PipelineConfig cfg;
  cfg.method.method = method;
  cfg.method.lr = cfg.sft_lr;
  cfg.method.epochs = cfg.sft_epochs;
  switch (method) {
    case Method::LowSft: cfg.method.lr = cfg.sft_lr / 10.0; break;
    case Method::KlSft: cfg.method.lambda = 0.2; break;
    case Method::StaticBarycenter: cfg.method.beta = 0.5; break;
    case Method::Anchored:
    case Method::ExactRecursion:
      cfg.method.anchor = AnchorConfig{};
      cfg.method.anchor->inner_lr = kLinearInnerLr;
      break;
    case Method::Sft: break;
  }
  cfg.method.seed = cfg.task.seed;
  return cfg;
}

std::string summary_csv_row(const Summary& s) {
  std::string out(to_string(s.method));
  out += ',';
  if (s.space) out += to_string(*s.space);
  out += ',' + format_real(s.alpha) + ',';
  if (s.T) out += std::to_string(*s.T);
  out += ',';
  if (s.K) out += std::to_string(*s.K);
  out += ',' + format_real(s.domain_acc) + ',' + format_real(s.general_acc) + ',' +
         format_real(s.kl_to_base) + ',' + format_real(s.kl_to_sft) + ',' + std::to_string(s.seed);
  return out;
}

void write_summary_csv(std::span<const Summary> rows, std::ostream& out) {
  out << kSummaryCsvHeader << '\n';
  for (const auto& s : rows) out << summary_csv_row(s) << '\n';
}

PreparedPipeline prepare_pipeline(const PipelineConfig& cfg) {
  Task task = generate_task(cfg.task);

  TrainConfig base_cfg;
  base_cfg.method = Method::Sft;
  base_cfg.lr = cfg.base_lr;
  base_cfg.epochs = cfg.base_epochs;
  base_cfg.seed = cfg.task.seed;
  Model base = train_sft(LinearSoftmaxModel(cfg.task.V, cfg.task.d), task.general_train.rows,
                         task.general_train.features, base_cfg)
                   .model;

  TrainConfig sft_cfg = base_cfg;
  sft_cfg.lr = cfg.sft_lr;
  sft_cfg.epochs = cfg.sft_epochs;
  Model sft = train_sft(base, task.domain_train.rows, task.domain_train.features, sft_cfg).model;

  const Accuracies base_acc = evaluate_both(base, task);
  const Accuracies sft_acc = evaluate_both(sft, task);
  return {std::move(task), std::move(base), std::move(sft), base_acc, sft_acc};
}

PipelineResult run_method(const PreparedPipeline& prepared, const TrainConfig& method) {
  method.validate();
  const Task& task = prepared.task;
  const LabeledDataset& train = task.domain_train;
  const std::vector<ContextId> contexts = train.contexts();

  Telemetry telemetry;
  telemetry.base = prepared.base;
  telemetry.sft = prepared.sft;
  telemetry.contexts = contexts;
  telemetry.evaluate = [&task](const Model& m) { return evaluate_both(m, task); };

  TrainResult run = [&]() -> TrainResult {
    switch (method.method) {
      case Method::Sft:
      case Method::LowSft:
        return train_sft(prepared.base, train.rows, train.features, method, telemetry);
      case Method::KlSft:
        return train_kl_sft(prepared.base, train.rows, train.features, prepared.base, method,
                            telemetry);
      case Method::StaticBarycenter:
        return train_static_barycenter(prepared.base, prepared.sft, prepared.base, train.features,
                                       contexts, method, telemetry);
      case Method::Anchored:
        return anchored_learning(prepared.base, prepared.sft, train.features, contexts, method,
                                 telemetry);
      case Method::ExactRecursion:
        break;
    }
    throw Error(ErrorKind::Unsupported,
                "exact_recursion needs a tabular model; use the simulate command");
  }();

  Summary s;
  s.method = method.method;
  if (method.anchor) {
    s.space = method.anchor->space;
    s.alpha = method.anchor->alpha;
    s.T = method.anchor->outer_iters;
    s.K = method.anchor->inner_epochs;
  }
  const Accuracies acc = evaluate_both(run.model, task);
  s.domain_acc = acc.domain;
  s.general_acc = acc.general;
  s.kl_to_base = mean_kl(run.model, prepared.base, train);
  s.kl_to_sft = mean_kl(run.model, prepared.sft, train);
  s.seed = task.spec.seed;
  return {std::move(run.trajectory), s, std::move(run.model), prepared.base_acc, prepared.sft_acc};
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.method.validate();
  return run_method(prepare_pipeline(cfg), cfg.method);
}

std::vector<RunOutcome> run_many(const PreparedPipeline& prepared,
                                 std::span<const TrainConfig> configs, int threads) {
  std::vector<RunOutcome> outcomes(configs.size());
  const auto n = static_cast<std::ptrdiff_t>(configs.size());
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(team)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      outcomes[i].result = run_method(prepared, configs[i]);
    } catch (const Error& e) {
      outcomes[i].error = e;
    } catch (const std::exception& e) {
      outcomes[i].error = Error(ErrorKind::InvalidInput, e.what());
    }
  }
  return outcomes;
}

std::vector<Summary> sweep_alpha(const PipelineConfig& cfg, std::span<const double> alphas,
                                 int threads) {
  if (alphas.empty()) throw Error(ErrorKind::InvalidInput, "alpha sweep needs values");
  if (!cfg.method.anchor) throw Error(ErrorKind::InvalidInput, "alpha sweep needs an anchored method");
  std::vector<TrainConfig> configs;
  for (double a : alphas) {
    TrainConfig c = cfg.method;
    c.anchor->alpha = a;
    configs.push_back(c);
  }
  const PreparedPipeline prepared = prepare_pipeline(cfg);
  std::vector<Summary> out;
  for (auto& o : run_many(prepared, configs, threads)) {
    if (o.error) throw *o.error;
    out.push_back(o.result->summary);
  }
  return out;
}

}  // namespace anchorlab
