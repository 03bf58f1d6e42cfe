#include "anchorlab/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "anchorlab/error.hpp"

namespace anchorlab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::DegenerateDistribution: return "DegenerateDistribution";
    case ErrorKind::InvalidCoefficient: return "InvalidCoefficient";
    case ErrorKind::UnknownContext: return "UnknownContext";
    case ErrorKind::InvalidLabel: return "InvalidLabel";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::NumericalDivergence: return "NumericalDivergence";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

bool all_finite(const Matrix& m) noexcept {
  return std::all_of(m.data.begin(), m.data.end(), [](double v) { return std::isfinite(v); });
}

double max_abs(const Matrix& m) noexcept {
  double out = 0.0;
  for (double v : m.data) out = std::max(out, std::abs(v));
  return out;
}

}  // namespace anchorlab
