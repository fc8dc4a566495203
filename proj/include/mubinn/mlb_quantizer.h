#ifndef MUBINN_MLB_QUANTIZER_H_
#define MUBINN_MLB_QUANTIZER_H_

#include <cstddef>
#include <vector>

#include "mubinn/binary_plane.h"
#include "mubinn/numeric.h"

namespace mubinn {

// Scale assigned to an all-zero residual so every level keeps a positive
// scale.
inline constexpr double kScaleFloor = 1e-12;
inline constexpr int kPow2MinExponent = -30;
inline constexpr int kPow2MaxExponent = 30;

// Multi-level residual binarization of a tensor:
//   x ~= sum_i scales[i] * signs(levels[i])
// Each level is a sign plane over the flattened (row-major) tensor.
struct MLBTensor {
  std::vector<std::size_t> shape;
  std::vector<BinaryPlane> levels;
  std::vector<double> scales;

  std::size_t num_levels() const { return levels.size(); }
  std::size_t numel() const;

  // Throws std::invalid_argument if the structural invariants do not hold:
  // matching level/scale counts, N >= 1, plane length == numel, scales
  // positive and finite.
  void validate() const;

  bool operator==(const MLBTensor&) const = default;
};

enum class ScaleMode {
  kGiven,       // caller-provided scales (e.g. imported from training)
  kFitted,      // per-level least squares: alpha = mean(|r|)
  kFittedPow2,  // least squares rounded to the nearest power of two
};

struct ScalePolicy {
  ScaleMode mode = ScaleMode::kFitted;
  std::size_t levels = 1;
  std::vector<double> given;  // used only in kGiven mode

  static ScalePolicy fitted(std::size_t n) {
    return {ScaleMode::kFitted, n, {}};
  }
  static ScalePolicy fitted_pow2(std::size_t n) {
    return {ScaleMode::kFittedPow2, n, {}};
  }
  static ScalePolicy with_scales(std::vector<double> scales) {
    const std::size_t n = scales.size();
    return {ScaleMode::kGiven, n, std::move(scales)};
  }

  void validate() const;
};

// bit j = 1 iff x[j] >= 0.
BinaryPlane naive_binarize(std::span<const double> x);

// mean(|r|), or kScaleFloor when r is all zeros.
double fit_scale(std::span<const double> r);

// Nearest power of two in log2 space. A log-scale midpoint rounds to the
// smaller power; the exponent is clamped to [-30, 30].
double round_pow2(double alpha);

MLBTensor mlb_quantize(std::span<const double> x,
                       std::vector<std::size_t> shape,
                       const ScalePolicy& policy);
MLBTensor mlb_quantize(const RealVector& x, const ScalePolicy& policy);
MLBTensor mlb_quantize(const RealMatrix& m, const ScalePolicy& policy);

RealVector mlb_reconstruct(const MLBTensor& t);

}  // namespace mubinn

#endif  // MUBINN_MLB_QUANTIZER_H_
