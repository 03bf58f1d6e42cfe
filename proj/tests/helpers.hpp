#pragma once
#include <optional>
#include <vector>

#include "anchorlab/error.hpp"
#include "anchorlab/simplex.hpp"

// Kind of the anchorlab::Error thrown by f, or nullopt if nothing was thrown.
template <class F>
std::optional<anchorlab::ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const anchorlab::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

inline std::vector<double> to_vec(const anchorlab::ProbVector& p) {
  return {p.values().begin(), p.values().end()};
}

inline anchorlab::ProbVector pv(std::vector<double> v) { return anchorlab::ProbVector(std::move(v)); }
