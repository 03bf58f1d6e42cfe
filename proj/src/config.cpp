#include "anchorlab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>

#include "anchorlab/csv.hpp"

namespace anchorlab {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
  std::string where = source;
  if (line > 0) where += ":" + std::to_string(line);
  throw Error(ErrorKind::ConfigError, where + ": " + msg);
}

bool is_anchored(Method m) { return m == Method::Anchored || m == Method::ExactRecursion; }

// Keys every method accepts.
const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys = {
      "method",         "seed",           "task.V",         "task.d",
      "task.n_general_train", "task.n_general_test", "task.n_domain_train",
      "task.n_domain_test",   "task.noise_temp",     "base.lr",
      "base.epochs",    "sft.lr",         "sft.epochs"};
  return keys;
}

const std::set<std::string>& anchor_keys() {
  static const std::set<std::string> keys = {"anchor.alpha", "anchor.space", "anchor.T",
                                             "anchor.K", "anchor.inner_lr", "anchor.converge_tol"};
  return keys;
}

bool applies(const std::string& key, Method m) {
  if (common_keys().contains(key)) return true;
  if (anchor_keys().contains(key)) return is_anchored(m);
  if (key == "train.lr" || key == "train.epochs") return !is_anchored(m);
  if (key == "train.lambda") return m == Method::KlSft;
  if (key == "train.beta") return m == Method::StaticBarycenter;
  return false;
}

bool known(const std::string& key) {
  return common_keys().contains(key) || anchor_keys().contains(key) || key == "train.lr" ||
         key == "train.epochs" || key == "train.lambda" || key == "train.beta";
}

class Reader {
 public:
  Reader(const std::string& source, const std::string& key, const ConfigValue& v)
      : source_(source), key_(key), v_(v) {}

  double real() const {
    double out = 0.0;
    const char* b = v_.text.data();
    const char* e = b + v_.text.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || ptr != e || !std::isfinite(out)) bad("a finite real number");
    return out;
  }

  template <class Int>
  Int integer() const {
    Int out = 0;
    const char* b = v_.text.data();
    const char* e = b + v_.text.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || ptr != e) bad("an integer");
    return out;
  }

  [[noreturn]] void bad(const std::string& expected) const {
    fail(source_, v_.line, "key '" + key_ + "' expects " + expected + ", got '" + v_.text + "'");
  }

 private:
  const std::string& source_;
  const std::string& key_;
  const ConfigValue& v_;
};

struct RangeCheck {
  const ConfigMap& map;
  const std::string& source;

  void require(bool ok, const std::string& key, const std::string& rule) const {
    if (ok) return;
    const auto it = map.find(key);
    fail(source, it == map.end() ? 0 : it->second.line,
         "invalid value for key '" + key + "': " + rule +
             (it == map.end() ? "" : " (got '" + it->second.text + "')"));
  }
};

}  // namespace

ConfigMap parse_config(std::istream& in, const std::string& source) {
  ConfigMap out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(source, line, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) fail(source, line, "missing key");
    if (value.empty()) fail(source, line, "missing value for key '" + key + "'");
    if (!out.emplace(key, ConfigValue{value, line}).second) {
      fail(source, line, "duplicate key '" + key + "'");
    }
  }
  return out;
}

PipelineConfig load_pipeline_config(const ConfigMap& map, const std::string& source) {
  Method method = Method::Anchored;
  if (const auto it = map.find("method"); it != map.end()) {
    try {
      method = parse_method(it->second.text);
    } catch (const Error&) {
      fail(source, it->second.line, "unknown method '" + it->second.text + "'");
    }
  }
  if (method == Method::ExactRecursion) {
    fail(source, map.at("method").line,
         "method 'exact_recursion' runs on tabular models; use the simulate command");
  }
  PipelineConfig cfg = default_pipeline_config(method);

  for (const auto& [key, value] : map) {
    if (!known(key)) fail(source, value.line, "unknown key '" + key + "'");
    if (!applies(key, method)) {
      fail(source, value.line,
           "key '" + key + "' does not apply to method '" + std::string(to_string(method)) + "'");
    }
    const Reader r(source, key, value);
    if (key == "method") continue;
    if (key == "seed") {
      cfg.task.seed = r.integer<std::uint64_t>();
    } else if (key == "task.V") {
      cfg.task.V = r.integer<std::size_t>();
    } else if (key == "task.d") {
      cfg.task.d = r.integer<std::size_t>();
    } else if (key == "task.n_general_train") {
      cfg.task.n_general_train = r.integer<std::size_t>();
    } else if (key == "task.n_general_test") {
      cfg.task.n_general_test = r.integer<std::size_t>();
    } else if (key == "task.n_domain_train") {
      cfg.task.n_domain_train = r.integer<std::size_t>();
    } else if (key == "task.n_domain_test") {
      cfg.task.n_domain_test = r.integer<std::size_t>();
    } else if (key == "task.noise_temp") {
      cfg.task.noise_temp = r.real();
    } else if (key == "base.lr") {
      cfg.base_lr = r.real();
    } else if (key == "base.epochs") {
      cfg.base_epochs = r.integer<int>();
    } else if (key == "sft.lr") {
      cfg.sft_lr = r.real();
    } else if (key == "sft.epochs") {
      cfg.sft_epochs = r.integer<int>();
    } else if (key == "train.lr") {
      cfg.method.lr = r.real();
    } else if (key == "train.epochs") {
      cfg.method.epochs = r.integer<int>();
    } else if (key == "train.lambda") {
      cfg.method.lambda = r.real();
    } else if (key == "train.beta") {
      cfg.method.beta = r.real();
    } else if (key == "anchor.alpha") {
      cfg.method.anchor->alpha = r.real();
    } else if (key == "anchor.space") {
      try {
        cfg.method.anchor->space = parse_space(value.text);
      } catch (const Error&) {
        r.bad("'logit' or 'prob'");
      }
    } else if (key == "anchor.T") {
      cfg.method.anchor->outer_iters = r.integer<int>();
    } else if (key == "anchor.K") {
      cfg.method.anchor->inner_epochs = r.integer<int>();
    } else if (key == "anchor.inner_lr") {
      cfg.method.anchor->inner_lr = r.real();
    } else if (key == "anchor.converge_tol") {
      cfg.method.anchor->converge_tol = r.real();
    }
  }
  cfg.method.seed = cfg.task.seed;

  const RangeCheck check{map, source};
  check.require(cfg.task.V >= 2, "task.V", "must be >= 2");
  check.require(cfg.task.d >= 2, "task.d", "must be >= 2");
  check.require(cfg.task.n_general_train >= 1, "task.n_general_train", "must be >= 1");
  check.require(cfg.task.n_general_test >= 1, "task.n_general_test", "must be >= 1");
  check.require(cfg.task.n_domain_train >= 1, "task.n_domain_train", "must be >= 1");
  check.require(cfg.task.n_domain_test >= 1, "task.n_domain_test", "must be >= 1");
  check.require(cfg.task.noise_temp > 0.0, "task.noise_temp", "must be > 0");
  check.require(cfg.base_lr > 0.0, "base.lr", "must be > 0");
  check.require(cfg.base_epochs >= 0, "base.epochs", "must be >= 0");
  check.require(cfg.sft_lr > 0.0, "sft.lr", "must be > 0");
  check.require(cfg.sft_epochs >= 0, "sft.epochs", "must be >= 0");
  if (const auto& a = cfg.method.anchor) {
    check.require(a->alpha > 0.0 && a->alpha < 1.0, "anchor.alpha", "must lie in (0, 1)");
    check.require(a->outer_iters >= 1, "anchor.T", "must be >= 1");
    check.require(a->inner_epochs >= 1, "anchor.K", "must be >= 1");
    check.require(a->inner_lr > 0.0, "anchor.inner_lr", "must be > 0");
    check.require(!a->converge_tol || *a->converge_tol > 0.0, "anchor.converge_tol",
                  "must be > 0");
  } else {
    check.require(cfg.method.lr > 0.0, "train.lr", "must be > 0");
    check.require(cfg.method.epochs >= 0, "train.epochs", "must be >= 0");
  }
  if (cfg.method.lambda) check.require(*cfg.method.lambda >= 0.0, "train.lambda", "must be >= 0");
  if (cfg.method.beta) {
    check.require(*cfg.method.beta > 0.0 && *cfg.method.beta < 1.0, "train.beta",
                  "must lie in (0, 1)");
  }
  cfg.method.validate();
  return cfg;
}

PipelineConfig load_pipeline_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file '" + path + "'");
  return load_pipeline_config(parse_config(in, path), path);
}

std::vector<std::pair<std::string, std::string>> resolved_parameters(const PipelineConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out = {
      {"method", std::string(to_string(cfg.method.method))},
      {"seed", std::to_string(cfg.task.seed)},
      {"task.V", std::to_string(cfg.task.V)},
      {"task.d", std::to_string(cfg.task.d)},
      {"task.n_general_train", std::to_string(cfg.task.n_general_train)},
      {"task.n_general_test", std::to_string(cfg.task.n_general_test)},
      {"task.n_domain_train", std::to_string(cfg.task.n_domain_train)},
      {"task.n_domain_test", std::to_string(cfg.task.n_domain_test)},
      {"task.noise_temp", format_real(cfg.task.noise_temp)},
      {"base.lr", format_real(cfg.base_lr)},
      {"base.epochs", std::to_string(cfg.base_epochs)},
      {"sft.lr", format_real(cfg.sft_lr)},
      {"sft.epochs", std::to_string(cfg.sft_epochs)},
  };
  const TrainConfig& m = cfg.method;
  if (m.anchor) {
    out.emplace_back("anchor.alpha", format_real(m.anchor->alpha));
    out.emplace_back("anchor.space", std::string(to_string(m.anchor->space)));
    out.emplace_back("anchor.T", std::to_string(m.anchor->outer_iters));
    out.emplace_back("anchor.K", std::to_string(m.anchor->inner_epochs));
    out.emplace_back("anchor.inner_lr", format_real(m.anchor->inner_lr));
    if (m.anchor->converge_tol) {
      out.emplace_back("anchor.converge_tol", format_real(*m.anchor->converge_tol));
    }
  } else {
    out.emplace_back("train.lr", format_real(m.lr));
    out.emplace_back("train.epochs", std::to_string(m.epochs));
  }
  if (m.lambda) out.emplace_back("train.lambda", format_real(*m.lambda));
  if (m.beta) out.emplace_back("train.beta", format_real(*m.beta));
  return out;
}

PipelineConfig with_override(const PipelineConfig& cfg, const std::string& key,
                             const std::string& value) {
  ConfigMap map;
  int line = 0;
  for (auto& [k, v] : resolved_parameters(cfg)) map[k] = ConfigValue{v, ++line};
  if (!known(key)) throw Error(ErrorKind::ConfigError, "unknown key '" + key + "'");
  map[key] = ConfigValue{value, 0};
  return load_pipeline_config(map, "<override " + key + ">");
}

}  // namespace anchorlab
