#ifndef MUBINN_BITPACK_H_
#define MUBINN_BITPACK_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mubinn/binary_plane.h"
#include "mubinn/mlb_quantizer.h"
#include "mubinn/numeric.h"

namespace mubinn {

// Pair scales gamma(i, j) = lhs[i] * rhs[j], stored row-major.
struct GammaTable {
  std::size_t lhs_levels = 0;
  std::size_t rhs_levels = 0;
  std::vector<double> values;

  static GammaTable make(std::span<const double> lhs,
                         std::span<const double> rhs);
  double operator()(std::size_t i, std::size_t j) const {
    return values[i * rhs_levels + j];
  }
  // True when every entry equals lhs[i] * rhs[j] within `tol` relative.
  bool consistent_with(std::span<const double> lhs,
                       std::span<const double> rhs, double tol) const;
};

// A multi-level binarized matrix: for every level, one plane per row (each
// row padded to whole words) plus one scale per level shared by all rows.
class QuantizedMatrix {
 public:
  QuantizedMatrix() = default;
  // planes[level][row]. Throws on inconsistent dims or level counts.
  QuantizedMatrix(std::size_t rows, std::size_t cols,
                  std::vector<std::vector<BinaryPlane>> planes,
                  std::vector<double> scales);

  // Splits a rank-2 MLB tensor into per-row planes.
  static QuantizedMatrix from_tensor(const MLBTensor& t);
  // Stacks per-row tensors; every row must have the same level count and
  // the same scales.
  static QuantizedMatrix from_rows(const std::vector<MLBTensor>& rows);
  static QuantizedMatrix quantize(const RealMatrix& m,
                                  const ScalePolicy& policy);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t num_levels() const { return scales_.size(); }
  const std::vector<double>& scales() const { return scales_; }
  const BinaryPlane& plane(std::size_t level, std::size_t row) const {
    return planes_[level][row];
  }

  // Row r as a standalone 1-D MLB tensor.
  MLBTensor row_tensor(std::size_t r) const;
  RealMatrix reconstruct() const;

  bool operator==(const QuantizedMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::vector<BinaryPlane>> planes_;
  std::vector<double> scales_;
};

// Throws unless every element is exactly +1 or -1.
BinaryPlane pack_signs(std::span<const double> signs);

// Integer dot product of two +-1 vectors: 2 * popcount(xnor(a, b)) - N.
std::int64_t xnor_popcount_dot(const BinaryPlane& a, const BinaryPlane& b);

// sum_{i,j} lhs.scales[i] * rhs.scales[j] * xnor_popcount_dot(l_i, m_j)
double mlb_dot(const MLBTensor& lhs, const MLBTensor& rhs);
double mlb_dot(const MLBTensor& lhs, const MLBTensor& rhs,
               const GammaTable& gamma);

// out[r] = mlb_dot(row r, x). gamma is indexed (weight level, input level).
RealVector mlb_matvec(const QuantizedMatrix& w, const MLBTensor& x);
RealVector mlb_matvec(const QuantizedMatrix& w, const MLBTensor& x,
                      const GammaTable& gamma);

// Element-wise product of the two reconstructions, computed on the planes:
// out[j] = sum_{i,k} a.scales[i] * b.scales[k] * (xnor bit ? +1 : -1).
RealVector mlb_pointwise_mul(const MLBTensor& a, const MLBTensor& b);

}  // namespace mubinn

#endif  // MUBINN_BITPACK_H_
