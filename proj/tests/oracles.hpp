#pragma once
// Reference computations written independently of the library code, used to
// check it.
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// sum p_i ln(p_i / q_i), straight from the definition.
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

inline std::vector<double> softmax(const std::vector<double>& z) {
  double m = z[0];
  for (double v : z) m = v > m ? v : m;
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

// p_i^(1-a) s_i^a, normalized, in plain (not log) space.
inline std::vector<double> geometric_mean(const std::vector<double>& p,
                                          const std::vector<double>& s, double a) {
  std::vector<double> out(p.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = std::pow(p[i], 1.0 - a) * std::pow(s[i], a);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace oracle
