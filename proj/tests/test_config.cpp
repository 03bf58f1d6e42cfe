#include <sstream>

#include "anchorlab/config.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace anchorlab;

namespace {

PipelineConfig load(const std::string& text) {
  std::istringstream in(text);
  return load_pipeline_config(parse_config(in, "test.conf"), "test.conf");
}

std::string config_error(const std::string& text) {
  try {
    load(text);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) return e.what();
    return std::string("wrong kind: ") + e.what();
  }
  return "no error";
}

std::string render(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : resolved_parameters(cfg)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace

TEST_CASE("an empty config gives the anchored defaults") {
  PipelineConfig cfg = load("# nothing\n\n");
  PipelineConfig def = default_pipeline_config();
  CHECK(cfg.method.method == Method::Anchored);
  CHECK(render(cfg) == render(def));
  CHECK(cfg.method.anchor->alpha == 0.5);
  CHECK(cfg.method.anchor->outer_iters == 5);
  CHECK(cfg.method.anchor->inner_epochs == 5);
  CHECK(cfg.method.anchor->inner_lr == kLinearInnerLr);
}

TEST_CASE("values, comments and whitespace") {
  PipelineConfig cfg = load(
      "method = anchored  # trailing comment\n"
      "  anchor.alpha=0.3\n"
      "anchor.space = prob\n"
      "seed = 9\n"
      "task.V = 5\n");
  CHECK(cfg.method.anchor->alpha == 0.3);
  CHECK(cfg.method.anchor->space == InterpolationSpace::Probability);
  CHECK(cfg.task.seed == 9);
  CHECK(cfg.method.seed == 9);
  CHECK(cfg.task.V == 5);
}

TEST_CASE("method-specific keys") {
  PipelineConfig kl = load("method = kl_sft\ntrain.lambda = 0.7\ntrain.epochs = 10\n");
  CHECK(kl.method.method == Method::KlSft);
  CHECK(*kl.method.lambda == 0.7);
  CHECK(kl.method.epochs == 10);
  PipelineConfig sb = load("method = static_barycenter\ntrain.beta = 0.25\n");
  CHECK(*sb.method.beta == 0.25);
}

TEST_CASE("errors name the key and the line") {
  std::string e = config_error("method = anchored\nanchor.alpha = 1.5\n");
  CHECK(e.find("anchor.alpha") != std::string::npos);
  CHECK(e.find(":2:") != std::string::npos);

  CHECK(config_error("anchor.alhpa = 0.5\n").find("unknown key 'anchor.alhpa'") != std::string::npos);
  CHECK(config_error("method = sft\nanchor.alpha = 0.5\n").find("does not apply") != std::string::npos);
  CHECK(config_error("method = anchored\ntrain.lambda = 0.2\n").find("does not apply") !=
        std::string::npos);
  CHECK(config_error("seed = 1\nseed = 2\n").find("duplicate key 'seed'") != std::string::npos);
  CHECK(config_error("just words\n").find("expected 'key = value'") != std::string::npos);
  CHECK(config_error("anchor.T =\n").find("missing value") != std::string::npos);
  CHECK(config_error("anchor.T = 0\n").find("anchor.T") != std::string::npos);
  CHECK(config_error("anchor.K = 2.5\n").find("anchor.K") != std::string::npos);
  CHECK(config_error("anchor.space = geodesic\n").find("anchor.space") != std::string::npos);
  CHECK(config_error("method = dft\n").find("unknown method") != std::string::npos);
  CHECK(config_error("method = exact_recursion\n").find("simulate") != std::string::npos);
  CHECK(config_error("method = static_barycenter\ntrain.beta = 1\n").find("train.beta") !=
        std::string::npos);
  CHECK(config_error("task.noise_temp = -1\n").find("task.noise_temp") != std::string::npos);
  CHECK(config_error("seed = abc\n").find("seed") != std::string::npos);
}

TEST_CASE("resolved parameters reload to the same config") {
  PipelineConfig cfg = load("method = kl_sft\ntrain.lambda = 0.125\ntrain.lr = 0.1\nseed = 3\n");
  PipelineConfig again = load(render(cfg));
  CHECK(render(again) == render(cfg));

  PipelineConfig anchored = load("anchor.converge_tol = 1e-9\nanchor.alpha = 0.1\n");
  CHECK(render(load(render(anchored))) == render(anchored));
}

TEST_CASE("with_override") {
  PipelineConfig cfg = default_pipeline_config();
  PipelineConfig a = with_override(cfg, "anchor.alpha", "0.7");
  CHECK(a.method.anchor->alpha == 0.7);
  CHECK(cfg.method.anchor->alpha == 0.5);
  CHECK(with_override(cfg, "anchor.T", "3").method.anchor->outer_iters == 3);
  CHECK(error_kind([&] { with_override(cfg, "anchor.alpha", "2"); }) == ErrorKind::ConfigError);
  CHECK(error_kind([&] { with_override(cfg, "nosuch", "2"); }) == ErrorKind::ConfigError);
}

TEST_CASE("missing config file") {
  CHECK(error_kind([] { load_pipeline_config_file("/nonexistent/x.conf"); }) == ErrorKind::ConfigError);
}
