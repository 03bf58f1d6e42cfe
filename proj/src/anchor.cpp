#include "anchorlab/anchor.hpp"

#include <cmath>
#include <string>

namespace anchorlab {

std::string_view to_string(InterpolationSpace space) noexcept {
  return space == InterpolationSpace::Logit ? "logit" : "prob";
}

InterpolationSpace parse_space(std::string_view text) {
  if (text == "logit") return InterpolationSpace::Logit;
  if (text == "prob" || text == "probability") return InterpolationSpace::Probability;
  throw Error(ErrorKind::InvalidInput, "unknown interpolation space '" + std::string(text) + "'");
}

AnchorTable::AnchorTable(std::vector<ContextId> contexts, std::vector<ProbVector> distributions,
                         InterpolationSpace source_space, double alpha)
    : contexts_(std::move(contexts)),
      distributions_(std::move(distributions)),
      source_space_(source_space),
      alpha_(alpha) {
  if (contexts_.empty()) throw Error(ErrorKind::InvalidInput, "anchor table needs contexts");
  require_same_size(contexts_.size(), distributions_.size(), "AnchorTable");
  for (const auto& q : distributions_) {
    require_same_size(q.size(), distributions_.front().size(), "AnchorTable vocabulary");
  }
  index_.reserve(contexts_.size());
  for (std::size_t i = 0; i < contexts_.size(); ++i) {
    if (!index_.emplace(contexts_[i], i).second) {
      throw Error(ErrorKind::InvalidInput, "duplicate context " + std::to_string(contexts_[i]));
    }
  }
}

const ProbVector& AnchorTable::at(ContextId context) const {
  const auto it = index_.find(context);
  if (it == index_.end()) {
    throw Error(ErrorKind::UnknownContext, "no anchor for context " + std::to_string(context));
  }
  return distributions_[it->second];
}

void AnchorConfig::validate_for_training() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::InvalidCoefficient, "anchor.alpha must lie in (0, 1), got " +
                                                   std::to_string(alpha));
  }
  if (outer_iters < 1) throw Error(ErrorKind::InvalidInput, "anchor.T must be >= 1");
  if (inner_epochs < 1) throw Error(ErrorKind::InvalidInput, "anchor.K must be >= 1");
  if (!(inner_lr > 0.0) || !std::isfinite(inner_lr)) {
    throw Error(ErrorKind::InvalidInput, "anchor.inner_lr must be positive");
  }
  if (converge_tol && !(*converge_tol > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "anchor.converge_tol must be positive");
  }
}

namespace {

void require_unit_interval(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorKind::InvalidCoefficient, "alpha must lie in [0, 1]");
  }
}

void require_half_open(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::InvalidCoefficient, "alpha must lie in [0, 1)");
  }
}

}  // namespace

ProbVector interpolate_prob(const ProbVector& p, const ProbVector& s, double alpha) {
  return mix(p, s, alpha);
}

ProbVector interpolate_logit(const LogitVector& z_p, const LogitVector& z_s, double alpha) {
  require_same_size(z_p.size(), z_s.size(), "interpolate_logit");
  require_half_open(alpha);
  std::vector<double> z(z_p.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - alpha) * z_p[i] + alpha * z_s[i];
  return softmax(LogitVector(std::move(z)));
}

GeodesicPoint geodesic_point(const ProbVector& p, const ProbVector& s, double alpha) {
  require_same_size(p.size(), s.size(), "geometric_mean_anchor");
  require_unit_interval(alpha);
  std::vector<double> log_w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || !(s[i] > 0.0)) {
      throw Error(ErrorKind::DegenerateDistribution, "geometric mean needs full support");
    }
    log_w[i] = (1.0 - alpha) * std::log(p[i]) + alpha * std::log(s[i]);
  }
  const double log_z = logsumexp(log_w);
  return {ProbVector::from_log_weights(log_w), log_z};
}

ProbVector geometric_mean_anchor(const ProbVector& p, const ProbVector& s, double alpha) {
  require_half_open(alpha);
  return geodesic_point(p, s, alpha).q;
}

double barycenter_objective(const ProbVector& u, const ProbVector& p, const ProbVector& s,
                            double alpha) {
  require_unit_interval(alpha);
  return (1.0 - alpha) * kl(u, p) + alpha * kl(u, s);
}

double prob_bound_rhs(const ProbVector& p, const ProbVector& s, double alpha) {
  require_unit_interval(alpha);
  return alpha * kl(s, p);
}

double logit_bound_rhs(const ProbVector& p, const ProbVector& s, double alpha) {
  require_half_open(alpha);
  return alpha / (1.0 - alpha) * kl(p, s);
}

double anchor_bound_rhs(InterpolationSpace space, const ProbVector& p, const ProbVector& s,
                       double alpha) {
  return space == InterpolationSpace::Logit ? logit_bound_rhs(p, s, alpha)
                                            : prob_bound_rhs(p, s, alpha);
}

AnchorTable build_anchor(const Model& current, const Model& reference,
                         std::span<const ContextId> contexts, const FeatureSet& features,
                         const AnchorConfig& cfg) {
  if (contexts.empty()) throw Error(ErrorKind::InvalidInput, "build_anchor needs contexts");
  if (vocab_size(current) != vocab_size(reference)) {
    throw Error(ErrorKind::ShapeError, "current and reference vocabularies differ");
  }
  require_unit_interval(cfg.alpha);
  const double a = cfg.alpha;
  const Matrix z_cur = batch_logits(current, contexts, features);
  const Matrix z_ref = batch_logits(reference, contexts, features);

  std::vector<ProbVector> out;
  out.reserve(contexts.size());
  std::vector<double> buf(z_cur.cols);
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto zc = z_cur.row(i);
    const auto zr = z_ref.row(i);
    if (cfg.space == InterpolationSpace::Logit) {
      for (std::size_t v = 0; v < buf.size(); ++v) buf[v] = (1.0 - a) * zc[v] + a * zr[v];
      out.push_back(ProbVector::from_log_weights(buf));
    } else {
      out.push_back(mix(ProbVector::from_log_weights(zc), ProbVector::from_log_weights(zr), a));
    }
  }
  return AnchorTable({contexts.begin(), contexts.end()}, std::move(out), cfg.space, a);
}

}  // namespace anchorlab
