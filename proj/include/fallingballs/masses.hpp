#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "fallingballs/errors.hpp"

namespace fallingballs {

enum class MassOrdering {
  strictly_decreasing,  // m_1 > m_2 > ... > m_n
  nonincreasing,        // m_1 >= m_2 >= ... >= m_n, with at least one tie
  equal,                // all masses identical
  unordered,            // anything else
};

inline const char* to_string(MassOrdering m) {
  switch (m) {
    case MassOrdering::strictly_decreasing: return "strictly_decreasing";
    case MassOrdering::nonincreasing: return "nonincreasing";
    case MassOrdering::equal: return "equal";
    case MassOrdering::unordered: return "unordered";
  }
  return "?";
}

// Masses m_1..m_n (stored 0-based) with their ordering classification.
// The cone-field machinery only applies when ordering() is nonincreasing
// or stronger; callers gate on is_nonincreasing().
class MassVector {
 public:
  explicit MassVector(std::vector<double> m) : m_(std::move(m)) {
    if (m_.size() < 2) fail(errc::invalid_mass_vector, "need at least 2 masses");
    for (double mi : m_) {
      if (!(mi > 0.0)) fail(errc::invalid_mass_vector, "masses must be positive");
    }
    mode_ = classify(m_);
  }

  std::size_t size() const { return m_.size(); }
  double operator[](std::size_t i) const { return m_[i]; }
  const std::vector<double>& values() const { return m_; }
  MassOrdering ordering() const { return mode_; }

  bool is_nonincreasing() const {
    return mode_ != MassOrdering::unordered;
  }
  bool is_equal() const { return mode_ == MassOrdering::equal; }

  // gamma_i = (m_i - m_{i+1}) / (m_i + m_{i+1}) for the pair (i, i+1),
  // 0-based lower index.
  double gamma(std::size_t i) const {
    return (m_[i] - m_[i + 1]) / (m_[i] + m_[i + 1]);
  }

  double total() const { return std::accumulate(m_.begin(), m_.end(), 0.0); }

  // Rescaled copy with sum 1 (the --normalize convention; dynamics on the
  // unit energy shell depend only on mass ratios).
  MassVector normalized() const {
    std::vector<double> out = m_;
    const double s = total();
    for (double& v : out) v /= s;
    return MassVector(out);
  }

 private:
  static MassOrdering classify(const std::vector<double>& m) {
    bool all_equal = true, strict = true, noninc = true;
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
      if (m[i] != m[i + 1]) all_equal = false;
      if (m[i] <= m[i + 1]) strict = false;
      if (m[i] < m[i + 1]) noninc = false;
    }
    if (all_equal) return MassOrdering::equal;
    if (strict) return MassOrdering::strictly_decreasing;
    if (noninc) return MassOrdering::nonincreasing;
    return MassOrdering::unordered;
  }

  std::vector<double> m_;
  MassOrdering mode_;
};

}  // namespace fallingballs
