#include "mubinn/mlb_quantizer.h"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mubinn {

std::size_t MLBTensor::numel() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void MLBTensor::validate() const {
  if (levels.empty()) throw std::invalid_argument("MLB tensor has no levels");
  if (levels.size() != scales.size()) {
    throw std::invalid_argument(
        "MLB tensor has " + std::to_string(levels.size()) + " planes but " +
        std::to_string(scales.size()) + " scales");
  }
  const std::size_t n = numel();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i].nbits() != n) {
      throw std::invalid_argument("MLB level " + std::to_string(i) + " has " +
                                  std::to_string(levels[i].nbits()) +
                                  " bits, tensor has " + std::to_string(n) +
                                  " elements");
    }
    if (!(scales[i] > 0.0) || !std::isfinite(scales[i])) {
      throw std::invalid_argument("MLB scale " + std::to_string(i) +
                                  " must be positive and finite");
    }
  }
}

void ScalePolicy::validate() const {
  if (levels == 0) throw std::invalid_argument("scale policy needs N >= 1");
  if (mode == ScaleMode::kGiven) {
    if (given.size() != levels) {
      throw std::invalid_argument("given scales: expected " +
                                  std::to_string(levels) + ", got " +
                                  std::to_string(given.size()));
    }
    for (double a : given) {
      if (!(a > 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("given scales must be positive and finite");
      }
    }
  }
}

BinaryPlane naive_binarize(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("naive_binarize: empty input");
  BinaryPlane plane(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) plane.set_bit(j, x[j] >= 0.0);
  return plane;
}

double fit_scale(std::span<const double> r) {
  if (r.empty()) throw std::invalid_argument("fit_scale: empty input");
  double acc = 0.0;
  for (double v : r) acc += std::fabs(v);
  const double alpha = acc / static_cast<double>(r.size());
  return alpha > 0.0 ? alpha : kScaleFloor;
}

double round_pow2(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("round_pow2: alpha must be positive, got " +
                                std::to_string(alpha));
  }
  // ceil(l - 0.5) is the nearest integer with halves going down.
  double k = std::ceil(std::log2(alpha) - 0.5);
  k = std::fmin(std::fmax(k, kPow2MinExponent), kPow2MaxExponent);
  return std::ldexp(1.0, static_cast<int>(k));
}

MLBTensor mlb_quantize(std::span<const double> x,
                       std::vector<std::size_t> shape,
                       const ScalePolicy& policy) {
  if (x.empty()) throw std::invalid_argument("mlb_quantize: empty input");
  policy.validate();
  MLBTensor t;
  t.shape = std::move(shape);
  if (t.numel() != x.size()) {
    throw std::invalid_argument("mlb_quantize: shape does not match data");
  }
  std::vector<double> residual(x.begin(), x.end());
  t.levels.reserve(policy.levels);
  t.scales.reserve(policy.levels);
  for (std::size_t i = 0; i < policy.levels; ++i) {
    BinaryPlane plane = naive_binarize(residual);
    double alpha = 0.0;
    switch (policy.mode) {
      case ScaleMode::kGiven: alpha = policy.given[i]; break;
      case ScaleMode::kFitted: alpha = fit_scale(residual); break;
      case ScaleMode::kFittedPow2: alpha = round_pow2(fit_scale(residual)); break;
    }
    for (std::size_t j = 0; j < residual.size(); ++j) {
      residual[j] -= plane.sign(j) * alpha;
    }
    t.levels.push_back(std::move(plane));
    t.scales.push_back(alpha);
  }
  return t;
}

MLBTensor mlb_quantize(const RealVector& x, const ScalePolicy& policy) {
  return mlb_quantize(x.span(), {x.size()}, policy);
}

MLBTensor mlb_quantize(const RealMatrix& m, const ScalePolicy& policy) {
  return mlb_quantize(m.flat(), {m.rows(), m.cols()}, policy);
}

RealVector mlb_reconstruct(const MLBTensor& t) {
  t.validate();
  RealVector out(t.numel());
  for (std::size_t i = 0; i < t.num_levels(); ++i) {
    const BinaryPlane& plane = t.levels[i];
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] += t.scales[i] * plane.sign(j);
    }
  }
  return out;
}

}  // namespace mubinn
