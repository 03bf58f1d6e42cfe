#pragma once

#include <span>
#include <unordered_map>
#include <vector>

#include "anchorlab/simplex.hpp"
#include "anchorlab/types.hpp"

namespace anchorlab {

// Frozen per-context target distributions q(.|x). Built once per outer
// iteration and never mutated afterwards; it holds copies, so later updates to
// the models it was built from do not reach it.
class AnchorTable {
 public:
  AnchorTable(std::vector<ContextId> contexts, std::vector<ProbVector> distributions,
              InterpolationSpace source_space, double alpha);

  const ProbVector& at(ContextId context) const;
  bool contains(ContextId context) const { return index_.contains(context); }

  std::size_t size() const noexcept { return contexts_.size(); }
  std::size_t vocab_size() const noexcept { return distributions_.front().size(); }
  std::span<const ContextId> contexts() const noexcept { return contexts_; }
  std::span<const ProbVector> distributions() const noexcept { return distributions_; }
  InterpolationSpace source_space() const noexcept { return source_space_; }
  double alpha() const noexcept { return alpha_; }

 private:
  std::vector<ContextId> contexts_;
  std::vector<ProbVector> distributions_;
  std::unordered_map<ContextId, std::size_t> index_;
  InterpolationSpace source_space_;
  double alpha_;
};

}  // namespace anchorlab
