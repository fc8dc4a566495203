#include "mubinn/activation_lut.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mubinn/lstm_reference.h"

namespace mubinn {

double exact_activation(ActivationKind kind, double v) {
  return kind == ActivationKind::kSigmoid ? sigmoid(v) : std::tanh(v);
}

PWLTable::PWLTable(ActivationKind kind, std::size_t segments, double bound)
    : kind_(kind), segments_(segments), bound_(bound) {
  if (segments_ < 2) {
    throw std::invalid_argument("PWL table needs at least 2 segments, got " +
                                std::to_string(segments_));
  }
  if (!(bound_ > 0.0) || !std::isfinite(bound_)) {
    throw std::invalid_argument("PWL table bound must be positive");
  }
  step_ = 2.0 * bound_ / static_cast<double>(segments_);
  nodes_.assign(segments_ + 1, 0.0);
  for (std::size_t k = 0; k <= segments_; ++k) {
    const std::size_t mirror = segments_ - k;
    if (k < mirror) continue;  // filled from its mirror below
    const double y = exact_activation(kind_, breakpoint(k));
    nodes_[k] = y;
    if (k == mirror) {
      // Centre node of an even grid.
      nodes_[k] = kind_ == ActivationKind::kSigmoid ? 0.5 : 0.0;
    } else {
      nodes_[mirror] = kind_ == ActivationKind::kSigmoid ? 1.0 - y : -y;
    }
  }
}

double PWLTable::breakpoint(std::size_t k) const {
  // Computed from both ends so mirrored breakpoints are exact negatives.
  const std::size_t mirror = segments_ - k;
  if (k >= mirror) {
    return bound_ - static_cast<double>(mirror) * step_;
  }
  return -(bound_ - static_cast<double>(k) * step_);
}

double PWLTable::eval(double v) const {
  if (std::isnan(v)) return v;
  if (v <= -bound_) return nodes_.front();
  if (v >= bound_) return nodes_.back();
  const double pos = (v + bound_) / step_;
  std::size_t k = static_cast<std::size_t>(pos);
  if (k >= segments_) k = segments_ - 1;
  const double frac = pos - static_cast<double>(k);
  return nodes_[k] + frac * (nodes_[k + 1] - nodes_[k]);
}

RealVector PWLTable::eval(const RealVector& v) const {
  RealVector out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = eval(v[j]);
  return out;
}

PWLTable build_lut(ActivationKind kind, std::size_t segments, double lo,
                   double hi) {
  if (!(hi > 0.0) || lo != -hi) {
    throw std::invalid_argument("PWL domain must be symmetric [-b, b] with "
                                "b > 0, got [" +
                                std::to_string(lo) + ", " + std::to_string(hi) +
                                "]");
  }
  return PWLTable(kind, segments, hi);
}

}  // namespace mubinn
