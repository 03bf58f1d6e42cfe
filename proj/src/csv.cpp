#include "anchorlab/csv.hpp"

#include <cstdio>

namespace anchorlab {

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_real(const std::optional<double>& value) {
  return value ? format_real(*value) : std::string();
}

}  // namespace anchorlab
