#ifndef MUBINN_NUMERIC_H_
#define MUBINN_NUMERIC_H_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mubinn {

// Dense vector of 64-bit floats.
class RealVector {
 public:
  RealVector() = default;
  explicit RealVector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  explicit RealVector(std::vector<double> data) : data_(std::move(data)) {}
  RealVector(std::initializer_list<double> init) : data_(init) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }

  bool operator==(const RealVector&) const = default;

 private:
  std::vector<double> data_;
};

// Dense matrix, row-major: element (r, c) lives at data[r * cols + c].
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static RealMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<const double> flat() const { return data_; }
  std::span<double> flat() { return data_; }

  std::string shape_string() const;

  bool operator==(const RealMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class ElementwiseOp { kAdd, kMul };

RealVector matvec(const RealMatrix& m, const RealVector& v);
RealVector elementwise(const RealVector& a, const RealVector& b,
                       ElementwiseOp op);
double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);
double l2_distance(std::span<const double> a, std::span<const double> b);

/// Deterministic 64-bit generator (SplitMix64).
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// All arithmetic is modulo 2^64, so the stream is identical on every
/// platform. uniform() maps the top 53 bits to [0, 1); gaussian() uses the
/// Box-Muller transform on two uniforms and discards the second variate.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double gaussian(double mean, double stddev);
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

RealVector rng_uniform(SeededRng& rng, double lo, double hi, std::size_t n);
RealMatrix rng_uniform_matrix(SeededRng& rng, double lo, double hi,
                              std::size_t rows, std::size_t cols);

std::string shape_string(std::size_t n);

}  // namespace mubinn

#endif  // MUBINN_NUMERIC_H_
