// anchorlab command-line entry point.
//
// Exit codes: 0 success, 1 assertion or numerical failure, 2 usage or
// configuration error.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "anchorlab/benchgen.hpp"
#include "anchorlab/config.hpp"
#include "anchorlab/csv.hpp"
#include "anchorlab/rng.hpp"
#include "anchorlab/trainers.hpp"
#include "anchorlab/verify.hpp"

namespace fs = std::filesystem;
using namespace anchorlab;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit : int { kOk = 0, kFailure = 1, kUsage = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ANCHORLAB_THREADS caps sweep parallelism; default is every logical processor.
int sweep_threads() {
  if (const char* env = std::getenv("ANCHORLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return omp_get_num_procs();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// The manifest is itself a valid config file: metadata lives in comments and
// every resolved parameter is a `key = value` line.
std::string manifest_text(const std::string& command, const std::string& config_path,
                          const std::vector<std::pair<std::string, std::string>>& params,
                          const std::vector<std::string>& outputs,
                          const std::vector<std::string>& extra = {}) {
  std::ostringstream m;
  m << "# anchorlab run manifest\n"
    << "# tool_version: " << kVersion << '\n'
    << "# command: " << command << '\n'
    << "# config_path: " << (config_path.empty() ? "(none)" : config_path) << '\n'
    << "# start_time: " << utc_timestamp() << '\n'
    << "# rng: mt19937_64; task teacher_general=scramble(seed,0) teacher_domain=scramble(seed,1)"
       " features[split k]=scramble(seed,2+k); fuzz trial i=scramble(seed,i)\n";
  for (const auto& e : extra) m << "# " << e << '\n';
  for (const auto& o : outputs) m << "# output: " << o << '\n';
  for (const auto& [k, v] : params) m << k << " = " << v << '\n';
  return m.str();
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(' ');
    const auto e = item.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// ---- verify ---------------------------------------------------------------

int cmd_verify(const std::string& suite_name, std::size_t trials, std::uint64_t seed,
               const std::string& out_path) {
  std::vector<Suite> suites;
  if (suite_name == "all") {
    suites.assign(kAllSuites.begin(), kAllSuites.end());
  } else {
    try {
      suites.push_back(parse_suite(suite_name));
    } catch (const Error&) {
      throw UsageError("unknown suite '" + suite_name +
                       "' (expected mixture_bound, logit_bound, recursion_decay, geometric_mean, kl_convexity, static_barycenter, all)");
    }
  }
  if (trials < 1) throw UsageError("--trials must be >= 1");

  std::ostringstream text;
  bool all_passed = true;
  for (std::size_t i = 0; i < suites.size(); ++i) {
    const FuzzReport r = fuzz_bounds(suites[i], trials, seed);
    if (i > 0) text << '\n';
    write_report(r, text);
    all_passed = all_passed && r.passed();
  }
  std::cout << text.str();
  if (!out_path.empty()) write_text(out_path, text.str());
  return all_passed ? kOk : kFailure;
}

// ---- simulate -------------------------------------------------------------

int cmd_simulate(double alpha, int T, std::size_t V, std::uint64_t seed, const std::string& out) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  if (T < 1) throw UsageError("--T must be >= 1");
  if (V < 2) throw UsageError("--V must be >= 2");

  Rng rng(seed);
  const std::vector<ProbVector> base{random_simplex_point(rng, V)};
  const std::vector<ProbVector> sft{random_simplex_point(rng, V)};
  const RecursionResult rec = exact_projection_recursion(base, sft, alpha, T);

  std::ostringstream csv;
  csv << "t,kl_to_sft,decay_bound\n";
  const double kl0 = rec.kl_to_sft[0][0];
  int violations = 0;
  for (int t = 0; t <= T; ++t) {
    const double value = rec.kl_to_sft[t][0];
    const double bound = std::pow(1.0 - alpha, t) * kl0;
    if (value > bound + 1e-12) ++violations;
    csv << t << ',' << format_real(value) << ',' << format_real(bound) << '\n';
  }

  const fs::path out_path(out);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_text(out_path, csv.str());
  const std::vector<std::pair<std::string, std::string>> params = {
      {"alpha", format_real(alpha)},
      {"T", std::to_string(T)},
      {"V", std::to_string(V)},
      {"seed", std::to_string(seed)}};
  write_text(out_path.string() + ".manifest.txt",
             manifest_text("simulate", "", params, {out_path.filename().string()},
                           {"note: parameters below are simulate flags, not a train config"}));

  if (violations > 0) {
    std::cerr << "simulate: " << violations << " rows exceed the geometric decay bound\n";
    return kFailure;
  }
  return kOk;
}

// ---- train ----------------------------------------------------------------

int cmd_train(const std::string& config_path, const std::string& out_dir) {
  const PipelineConfig cfg = load_pipeline_config_file(config_path);
  const PipelineResult result = run_pipeline(cfg);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  std::ostringstream trajectory;
  write_trajectory_csv(result.trajectory, trajectory);
  write_text(dir / "trajectory.csv", trajectory.str());

  std::ostringstream summary;
  write_summary_csv(std::span<const Summary>(&result.summary, 1), summary);
  write_text(dir / "summary.csv", summary.str());

  std::ostringstream model;
  save_model(result.final_model, model);
  write_text(dir / "model.txt", model.str());

  write_text(dir / "manifest.txt",
             manifest_text("train", config_path, resolved_parameters(cfg),
                           {"trajectory.csv", "summary.csv", "model.txt"},
                           {"base_domain_acc: " + format_real(result.base_acc.domain),
                            "base_general_acc: " + format_real(result.base_acc.general),
                            "sft_domain_acc: " + format_real(result.sft_acc.domain),
                            "sft_general_acc: " + format_real(result.sft_acc.general)}));
  std::cout << kSummaryCsvHeader << '\n' << summary_csv_row(result.summary) << '\n';
  return kOk;
}

// ---- sweep ----------------------------------------------------------------

std::string sweep_config_key(const std::string& key) {
  if (key == "alpha") return "anchor.alpha";
  if (key == "T") return "anchor.T";
  if (key == "K") return "anchor.K";
  throw UsageError("unknown sweep key '" + key + "' (expected alpha, T or K)");
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& keys,
              const std::vector<std::string>& value_lists, const std::string& spaces_arg,
              const std::string& out_dir) {
  if (keys.empty()) throw UsageError("sweep needs at least one --key");
  if (keys.size() != value_lists.size()) {
    throw UsageError("each --key needs exactly one matching --values list");
  }
  const PipelineConfig base_cfg = load_pipeline_config_file(config_path);
  if (!base_cfg.method.anchor) throw UsageError("sweeps need an anchored config (method = anchored)");

  std::vector<std::string> config_keys;
  std::vector<std::vector<std::string>> values;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    config_keys.push_back(sweep_config_key(keys[i]));
    values.push_back(split_csv_list(value_lists[i]));
    if (values.back().empty()) throw UsageError("--values for '" + keys[i] + "' is empty");
  }
  std::vector<std::string> spaces =
      spaces_arg.empty() ? std::vector<std::string>{std::string(to_string(base_cfg.method.anchor->space))}
                         : split_csv_list(spaces_arg);

  // Cartesian product in argument order; the first key varies slowest, the
  // space fastest.
  std::vector<TrainConfig> configs;
  std::vector<std::size_t> idx(values.size(), 0);
  while (true) {
    for (const auto& space : spaces) {
      PipelineConfig c = base_cfg;
      for (std::size_t k = 0; k < values.size(); ++k) {
        c = with_override(c, config_keys[k], values[k][idx[k]]);
      }
      c = with_override(c, "anchor.space", space);
      configs.push_back(c.method);
    }
    std::size_t k = values.size();
    while (k > 0 && ++idx[k - 1] == values[k - 1].size()) idx[--k] = 0;
    if (k == 0) break;
  }

  const int threads = sweep_threads();
  const PreparedPipeline prepared = prepare_pipeline(base_cfg);
  const std::vector<RunOutcome> outcomes = run_many(prepared, configs, threads);

  std::ostringstream csv;
  csv << kSummaryCsvHeader << ",status\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].result) {
      csv << summary_csv_row(outcomes[i].result->summary) << ",ok\n";
    } else {
      ++failed;
      const auto& a = *configs[i].anchor;
      csv << to_string(configs[i].method) << ',' << to_string(a.space) << ','
          << format_real(a.alpha) << ',' << a.outer_iters << ',' << a.inner_epochs
          << ",,,,," << prepared.task.spec.seed << ",error:"
          << to_string(outcomes[i].error->kind()) << '\n';
      std::cerr << "sweep run " << i << " failed: " << outcomes[i].error->what() << '\n';
    }
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_text(dir / "sweep_summary.csv", csv.str());
  std::vector<std::string> extra;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    extra.push_back("sweep: " + keys[i] + " = " + value_lists[i]);
  }
  extra.push_back("sweep_spaces: " + (spaces_arg.empty() ? spaces.front() : spaces_arg));
  extra.push_back("threads: " + std::to_string(threads));
  write_text(dir / "manifest.txt", manifest_text("sweep", config_path, resolved_parameters(base_cfg),
                                                 {"sweep_summary.csv"}, extra));
  std::cout << csv.str();
  return failed == outcomes.size() ? kFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anchorlab: anchored fine-tuning laboratory"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string suite = "all";
  std::size_t trials = 10000;
  std::uint64_t verify_seed = 7;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Run the bound and identity fuzz suites");
  verify->add_option("--suite", suite,
                     "mixture_bound, logit_bound, recursion_decay, geometric_mean, kl_convexity, static_barycenter or all");
  verify->add_option("--trials", trials, "Trials per suite");
  verify->add_option("--seed", verify_seed, "Base seed");
  verify->add_option("--out", verify_out, "Also write the reports to this file");

  double sim_alpha = 0.5;
  int sim_T = 10;
  std::size_t sim_V = 8;
  std::uint64_t sim_seed = 42;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Iterate the exact-projection recursion");
  simulate->add_option("--alpha", sim_alpha, "Interpolation coefficient in (0, 1)");
  simulate->add_option("--T", sim_T, "Outer iterations (>= 1)");
  simulate->add_option("--V", sim_V, "Vocabulary size");
  simulate->add_option("--seed", sim_seed, "Seed for the random base/sft pair");
  simulate->add_option("--out", sim_out, "Output CSV path")->required();

  std::string train_config;
  std::string train_out;
  auto* train = app.add_subcommand("train", "Run one benchmark pipeline");
  train->add_option("--config", train_config, "Config file")->required();
  train->add_option("--out-dir", train_out, "Output directory")->required();

  std::string sweep_config;
  std::vector<std::string> sweep_keys;
  std::vector<std::string> sweep_values;
  std::string sweep_spaces;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run the pipeline over a grid of anchor settings");
  sweep->add_option("--config", sweep_config, "Config file (method = anchored)")->required();
  sweep->add_option("--key", sweep_keys, "alpha, T or K; repeat for a grid")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values, one list per --key")
      ->required();
  sweep->add_option("--spaces", sweep_spaces, "Comma-separated: logit,prob");
  sweep->add_option("--out-dir", sweep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*verify) return cmd_verify(suite, trials, verify_seed, verify_out);
    if (*simulate) return cmd_simulate(sim_alpha, sim_T, sim_V, sim_seed, sim_out);
    if (*train) return cmd_train(train_config, train_out);
    if (*sweep) return cmd_sweep(sweep_config, sweep_keys, sweep_values, sweep_spaces, sweep_out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::ConfigError ? kUsage : kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
