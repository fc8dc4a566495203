#include "mubinn/bitpack.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mubinn {
namespace {

// Popcount of xnor over the valid bits; padding is zero in both operands, so
// xnor sets it and the tail mask removes it again.
std::int64_t xnor_popcount(std::span<const std::uint64_t> a,
                           std::span<const std::uint64_t> b,
                           std::uint64_t tail_mask) {
  std::int64_t p = 0;
  const std::size_t n = a.size();
  if (n == 0) return 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    p += std::popcount(~(a[k] ^ b[k]));
  }
  p += std::popcount(~(a[n - 1] ^ b[n - 1]) & tail_mask);
  return p;
}

std::int64_t binary_dot(const BinaryPlane& a, const BinaryPlane& b) {
  const std::int64_t p = xnor_popcount(a.words(), b.words(), a.tail_mask());
  return 2 * p - static_cast<std::int64_t>(a.nbits());
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch " +
                                std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

GammaTable GammaTable::make(std::span<const double> lhs,
                            std::span<const double> rhs) {
  GammaTable g{lhs.size(), rhs.size(), {}};
  g.values.reserve(lhs.size() * rhs.size());
  for (double a : lhs) {
    for (double b : rhs) g.values.push_back(a * b);
  }
  return g;
}

bool GammaTable::consistent_with(std::span<const double> lhs,
                                 std::span<const double> rhs,
                                 double tol) const {
  if (lhs.size() != lhs_levels || rhs.size() != rhs_levels) return false;
  for (std::size_t i = 0; i < lhs_levels; ++i) {
    for (std::size_t j = 0; j < rhs_levels; ++j) {
      const double want = lhs[i] * rhs[j];
      if (std::fabs((*this)(i, j) - want) > tol * std::fabs(want)) return false;
    }
  }
  return true;
}

QuantizedMatrix::QuantizedMatrix(std::size_t rows, std::size_t cols,
                                 std::vector<std::vector<BinaryPlane>> planes,
                                 std::vector<double> scales)
    : rows_(rows),
      cols_(cols),
      planes_(std::move(planes)),
      scales_(std::move(scales)) {
  if (scales_.empty()) {
    throw std::invalid_argument("quantized matrix needs at least one level");
  }
  if (planes_.size() != scales_.size()) {
    throw std::invalid_argument("quantized matrix: " +
                                std::to_string(planes_.size()) +
                                " plane sets for " +
                                std::to_string(scales_.size()) + " scales");
  }
  for (std::size_t l = 0; l < planes_.size(); ++l) {
    if (!(scales_[l] > 0.0) || !std::isfinite(scales_[l])) {
      throw std::invalid_argument("quantized matrix scales must be positive");
    }
    if (planes_[l].size() != rows_) {
      throw std::invalid_argument("quantized matrix level " +
                                  std::to_string(l) + " has " +
                                  std::to_string(planes_[l].size()) +
                                  " rows, expected " + std::to_string(rows_));
    }
    for (const BinaryPlane& p : planes_[l]) {
      if (p.nbits() != cols_) {
        throw std::invalid_argument("quantized matrix row plane has " +
                                    std::to_string(p.nbits()) +
                                    " bits, expected " + std::to_string(cols_));
      }
    }
  }
}

QuantizedMatrix QuantizedMatrix::from_tensor(const MLBTensor& t) {
  t.validate();
  if (t.shape.size() != 2) {
    throw std::invalid_argument("from_tensor: expected a rank-2 tensor");
  }
  const std::size_t rows = t.shape[0];
  const std::size_t cols = t.shape[1];
  std::vector<std::vector<BinaryPlane>> planes(t.num_levels());
  for (std::size_t l = 0; l < t.num_levels(); ++l) {
    planes[l].reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      BinaryPlane row(cols);
      for (std::size_t c = 0; c < cols; ++c) {
        row.set_bit(c, t.levels[l].bit(r * cols + c));
      }
      planes[l].push_back(std::move(row));
    }
  }
  return QuantizedMatrix(rows, cols, std::move(planes), t.scales);
}

QuantizedMatrix QuantizedMatrix::from_rows(const std::vector<MLBTensor>& rows) {
  if (rows.empty()) throw std::invalid_argument("from_rows: no rows");
  const std::size_t levels = rows.front().num_levels();
  const std::size_t cols = rows.front().numel();
  std::vector<std::vector<BinaryPlane>> planes(levels);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].validate();
    if (rows[r].num_levels() != levels) {
      throw std::invalid_argument(
          "from_rows: row " + std::to_string(r) + " has " +
          std::to_string(rows[r].num_levels()) + " levels, row 0 has " +
          std::to_string(levels));
    }
    if (rows[r].scales != rows.front().scales) {
      throw std::invalid_argument("from_rows: row " + std::to_string(r) +
                                  " scales differ from row 0");
    }
    for (std::size_t l = 0; l < levels; ++l) {
      planes[l].push_back(rows[r].levels[l]);
    }
  }
  return QuantizedMatrix(rows.size(), cols, std::move(planes),
                         rows.front().scales);
}

QuantizedMatrix QuantizedMatrix::quantize(const RealMatrix& m,
                                          const ScalePolicy& policy) {
  return from_tensor(mlb_quantize(m, policy));
}

MLBTensor QuantizedMatrix::row_tensor(std::size_t r) const {
  MLBTensor t;
  t.shape = {cols_};
  t.scales = scales_;
  for (const auto& level : planes_) t.levels.push_back(level[r]);
  return t;
}

RealMatrix QuantizedMatrix::reconstruct() const {
  RealMatrix m(rows_, cols_);
  for (std::size_t l = 0; l < num_levels(); ++l) {
    for (std::size_t r = 0; r < rows_; ++r) {
      for (std::size_t c = 0; c < cols_; ++c) {
        m.at(r, c) += scales_[l] * planes_[l][r].sign(c);
      }
    }
  }
  return m;
}

BinaryPlane pack_signs(std::span<const double> signs) {
  BinaryPlane plane(signs.size());
  for (std::size_t j = 0; j < signs.size(); ++j) {
    if (signs[j] == 1.0) {
      plane.set_bit(j, true);
    } else if (signs[j] != -1.0) {
      throw std::invalid_argument("pack_signs: element " + std::to_string(j) +
                                  " is " + std::to_string(signs[j]) +
                                  ", expected +1 or -1");
    }
  }
  return plane;
}

std::int64_t xnor_popcount_dot(const BinaryPlane& a, const BinaryPlane& b) {
  require_same_length(a.nbits(), b.nbits(), "xnor_popcount_dot");
  return binary_dot(a, b);
}

double mlb_dot(const MLBTensor& lhs, const MLBTensor& rhs) {
  return mlb_dot(lhs, rhs, GammaTable::make(lhs.scales, rhs.scales));
}

double mlb_dot(const MLBTensor& lhs, const MLBTensor& rhs,
               const GammaTable& gamma) {
  lhs.validate();
  rhs.validate();
  require_same_length(lhs.numel(), rhs.numel(), "mlb_dot");
  if (gamma.lhs_levels != lhs.num_levels() ||
      gamma.rhs_levels != rhs.num_levels()) {
    throw std::invalid_argument("mlb_dot: gamma table does not match levels");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < lhs.num_levels(); ++i) {
    for (std::size_t j = 0; j < rhs.num_levels(); ++j) {
      acc += gamma(i, j) *
             static_cast<double>(binary_dot(lhs.levels[i], rhs.levels[j]));
    }
  }
  return acc;
}

RealVector mlb_matvec(const QuantizedMatrix& w, const MLBTensor& x) {
  return mlb_matvec(w, x, GammaTable::make(w.scales(), x.scales));
}

RealVector mlb_matvec(const QuantizedMatrix& w, const MLBTensor& x,
                      const GammaTable& gamma) {
  x.validate();
  if (w.cols() != x.numel()) {
    throw std::invalid_argument("mlb_matvec: matrix [" +
                                std::to_string(w.rows()) + "x" +
                                std::to_string(w.cols()) +
                                "] incompatible with input " +
                                shape_string(x.numel()));
  }
  if (gamma.lhs_levels != w.num_levels() ||
      gamma.rhs_levels != x.num_levels()) {
    throw std::invalid_argument("mlb_matvec: gamma table does not match levels");
  }
  RealVector out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.num_levels(); ++i) {
      const BinaryPlane& row = w.plane(i, r);
      for (std::size_t j = 0; j < x.num_levels(); ++j) {
        acc += gamma(i, j) * static_cast<double>(binary_dot(row, x.levels[j]));
      }
    }
    out[r] = acc;
  }
  return out;
}

RealVector mlb_pointwise_mul(const MLBTensor& a, const MLBTensor& b) {
  a.validate();
  b.validate();
  require_same_length(a.numel(), b.numel(), "mlb_pointwise_mul");
  const std::size_t n = a.numel();
  const std::size_t nwords = BinaryPlane::words_for(n);
  RealVector out(n);
  for (std::size_t i = 0; i < a.num_levels(); ++i) {
    for (std::size_t k = 0; k < b.num_levels(); ++k) {
      const double gamma = a.scales[i] * b.scales[k];
      const auto wa = a.levels[i].words();
      const auto wb = b.levels[k].words();
      for (std::size_t w = 0; w < nwords; ++w) {
        const std::uint64_t agree = ~(wa[w] ^ wb[w]);
        const std::size_t base = w * BinaryPlane::kWordBits;
        const std::size_t limit =
            std::min(BinaryPlane::kWordBits, n - base);
        for (std::size_t bit = 0; bit < limit; ++bit) {
          out[base + bit] += ((agree >> bit) & 1ULL) ? gamma : -gamma;
        }
      }
    }
  }
  return out;
}

}  // namespace mubinn
