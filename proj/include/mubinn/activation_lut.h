#ifndef MUBINN_ACTIVATION_LUT_H_
#define MUBINN_ACTIVATION_LUT_H_

#include <cstddef>
#include <vector>

#include "mubinn/numeric.h"

namespace mubinn {

enum class ActivationKind { kSigmoid, kTanh };

// Piecewise-linear table on a uniform grid over [-bound, bound].
//
// nodes[k] = f(-bound + k * step), k = 0..segments. The upper half is
// evaluated from the exact function and the lower half is mirrored from it
// (1 - s for sigmoid, -t for tanh), so the symmetry holds bit-exactly at the
// breakpoints. Inputs outside the domain saturate at the end nodes.
class PWLTable {
 public:
  static constexpr std::size_t kDefaultSegments = 128;
  static constexpr double kDefaultSigmoidBound = 8.0;
  static constexpr double kDefaultTanhBound = 4.0;

  // Throws if segments < 2 or bound <= 0.
  PWLTable(ActivationKind kind, std::size_t segments, double bound);

  static PWLTable sigmoid() {
    return PWLTable(ActivationKind::kSigmoid, kDefaultSegments,
                    kDefaultSigmoidBound);
  }
  static PWLTable tanh() {
    return PWLTable(ActivationKind::kTanh, kDefaultSegments, kDefaultTanhBound);
  }

  double eval(double v) const;
  RealVector eval(const RealVector& v) const;

  ActivationKind kind() const { return kind_; }
  std::size_t segments() const { return segments_; }
  double lo() const { return -bound_; }
  double hi() const { return bound_; }
  double step() const { return step_; }
  double breakpoint(std::size_t k) const;
  const std::vector<double>& nodes() const { return nodes_; }

 private:
  ActivationKind kind_;
  std::size_t segments_;
  double bound_;
  double step_;
  std::vector<double> nodes_;
};

PWLTable build_lut(ActivationKind kind, std::size_t segments, double lo,
                   double hi);
inline double pwl_eval(const PWLTable& t, double v) { return t.eval(v); }

double exact_activation(ActivationKind kind, double v);

}  // namespace mubinn

#endif  // MUBINN_ACTIVATION_LUT_H_
