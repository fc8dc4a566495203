#include "mubinn/numeric.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mubinn {

RealMatrix::RealMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

RealMatrix::RealMatrix(std::size_t rows, std::size_t cols,
                       std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("matrix " + shape_string() + " needs " +
                                std::to_string(rows * cols) +
                                " elements, got " +
                                std::to_string(data_.size()));
  }
}

RealMatrix RealMatrix::identity(std::size_t n) {
  RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

std::string RealMatrix::shape_string() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

std::string shape_string(std::size_t n) {
  return "[" + std::to_string(n) + "]";
}

RealVector matvec(const RealMatrix& m, const RealVector& v) {
  if (m.cols() != v.size()) {
    throw std::invalid_argument("matvec: matrix " + m.shape_string() +
                                " incompatible with vector " +
                                shape_string(v.size()));
  }
  RealVector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out[r] = dot(m.row(r), v.span());
  }
  return out;
}

RealVector elementwise(const RealVector& a, const RealVector& b,
                       ElementwiseOp op) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("elementwise: length mismatch " +
                                shape_string(a.size()) + " vs " +
                                shape_string(b.size()));
  }
  RealVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = op == ElementwiseOp::kAdd ? a[i] + b[i] : a[i] * b[i];
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double l2_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("l2_distance: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::uint64_t SeededRng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SeededRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
  const double u = lo + (hi - lo) * uniform();
  // Guard the rounding case lo + (hi-lo)*u == hi.
  return u < hi ? u : std::nextafter(hi, lo);
}

double SeededRng::gaussian(double mean, double stddev) {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) *
                   std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

std::uint64_t SeededRng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("below: bound must be > 0");
  return next_u64() % bound;
}

RealVector rng_uniform(SeededRng& rng, double lo, double hi, std::size_t n) {
  if (!(lo < hi)) {
    throw std::invalid_argument("rng_uniform: need lo < hi, got lo=" +
                                std::to_string(lo) +
                                " hi=" + std::to_string(hi));
  }
  RealVector out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.uniform(lo, hi);
  return out;
}

RealMatrix rng_uniform_matrix(SeededRng& rng, double lo, double hi,
                              std::size_t rows, std::size_t cols) {
  RealVector flat = rng_uniform(rng, lo, hi, rows * cols);
  return RealMatrix(rows, cols, flat.values());
}

}  // namespace mubinn
