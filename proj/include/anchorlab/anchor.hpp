#pragma once

// Anchor construction: interpolate the current model with a frozen reference,
// either linearly in logit space (a renormalized geometric mean of the two
// distributions) or linearly in probability space (a mixture), plus the
// per-step divergence bounds each operator guarantees.

#include <optional>
#include <span>

#include "anchorlab/anchor_table.hpp"
#include "anchorlab/models.hpp"
#include "anchorlab/simplex.hpp"

namespace anchorlab {

struct AnchorConfig {
  double alpha = 0.5;
  InterpolationSpace space = InterpolationSpace::Logit;
  int outer_iters = 5;  // T
  int inner_epochs = 5;  // K
  double inner_lr = 0.5;
  // Stop an inner loop early once the distillation loss drops below this.
  // Off by default: every inner loop runs exactly K epochs.
  std::optional<double> converge_tol;

  // Training needs 0 < alpha < 1, T >= 1, K >= 1, inner_lr > 0.
  void validate_for_training() const;
};

ProbVector interpolate_prob(const ProbVector& p, const ProbVector& s, double alpha);

// softmax((1 - alpha) z_p + alpha z_s), alpha in [0, 1).
ProbVector interpolate_logit(const LogitVector& z_p, const LogitVector& s_logits, double alpha);

struct GeodesicPoint {
  ProbVector q;
  double log_partition;  // ln Z
};

// q_i = p_i^(1-alpha) s_i^alpha / Z, evaluated in log space.
GeodesicPoint geodesic_point(const ProbVector& p, const ProbVector& s, double alpha);
ProbVector geometric_mean_anchor(const ProbVector& p, const ProbVector& s, double alpha);

// (1 - alpha) KL(u||p) + alpha KL(u||s)
double barycenter_objective(const ProbVector& u, const ProbVector& p, const ProbVector& s,
                            double alpha);

// Upper bound on KL(mix(p, s, alpha) || p): alpha KL(s||p).
double prob_bound_rhs(const ProbVector& p, const ProbVector& s, double alpha);

// Upper bound on KL(geometric_mean_anchor(p, s, alpha) || p):
// alpha / (1 - alpha) KL(p||s).
double logit_bound_rhs(const ProbVector& p, const ProbVector& s, double alpha);

// Bound for whichever operator `space` selects.
double anchor_bound_rhs(InterpolationSpace space, const ProbVector& p, const ProbVector& s,
                       double alpha);

// Applies the configured operator to (current, reference) on every context.
// Only cfg.alpha and cfg.space are read; alpha may be anywhere in [0, 1]
// here (alpha = 1 in logit space is plain softmax of the reference).
AnchorTable build_anchor(const Model& current, const Model& reference,
                         std::span<const ContextId> contexts, const FeatureSet& features,
                         const AnchorConfig& cfg);

}  // namespace anchorlab
