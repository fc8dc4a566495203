#ifndef MUBINN_DELAY_MODEL_H_
#define MUBINN_DELAY_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace mubinn {

// Bit level of one operand: 1..255 binarization levels, or full precision.
struct BitLevel {
  static constexpr int kFullPrecision = 0;
  int value = kFullPrecision;

  static constexpr BitLevel fp() { return BitLevel{kFullPrecision}; }
  static constexpr BitLevel levels(int n) { return BitLevel{n}; }
  bool is_fp() const { return value == kFullPrecision; }
  bool operator==(const BitLevel&) const = default;
};

// "fp"/"FP" or a positive integer.
BitLevel parse_bit_level(std::string_view text);
std::string to_string(BitLevel level);

// Per-stage delays, in the same opaque unit as the reference table.
struct GateDelayParams {
  double t_xnor = 0.002;
  double t_full_adder = 0.004;
  double t_mult_fp = 0.0293788;
  double t_add_fp = 0.003;
  double t_lut = 0.017;
  double t_scale_mult = 0.002;
  std::int64_t vector_len = 32;
  std::int64_t hidden = 100;

  void validate() const;
};

// Parses `key = value` lines ('#' starts a comment). Keys are exactly the
// GateDelayParams field names; unspecified keys keep their defaults.
// Throws std::invalid_argument naming an unknown key or bad value.
GateDelayParams parse_calibration(std::string_view text);
GateDelayParams load_calibration(const std::string& path);

// Structural logic-depth model of one cell step.
//
// Binarized operands (both A and W are level counts):
//   t_xnor                                   xnor of one word-slice
//   + ceil(log2 n) * t_full_adder            popcount adder tree
//   + (A*W) * t_scale_mult                   gamma scaling per level pair
//   + (A*W - 1) * t_add_fp                   accumulate the level pairs
//   + t_add_fp                               bias
//   + t_lut                                  LUT activation
//
// Any full-precision operand: a single sequential MAC unit over the
// concatenated [x, h] input,
//   (n + h) * (t_mult_fp + t_add_fp) + t_add_fp + t_lut.
//
// The model is ordinal. Its numbers are labelled "model" wherever printed.
double estimate_delay(BitLevel a, BitLevel w, const GateDelayParams& p);

// Table of measured cell delays, rows = activation level, cols = weight level,
// index 0..4 for levels 1..5 and 5 for FP.
class DelayReference {
 public:
  static constexpr std::size_t kSize = 6;
  using Grid = std::array<std::array<double, kSize>, kSize>;

  // Throws unless every row and column is strictly increasing.
  explicit DelayReference(const Grid& grid);
  // The bundled 65nm table.
  static DelayReference bundled();

  static std::size_t index_of(BitLevel level);  // throws if out of grid
  double at(BitLevel a, BitLevel w) const;
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
};

// ref(FP, FP) / ref(A, W)
double table_speedup(const DelayReference& ref, BitLevel a, BitLevel w);
// ref(A, FP) / ref(A, W): same activation level, full-precision weights.
double table_speedup_row_fp(const DelayReference& ref, BitLevel a, BitLevel w);

struct CellDims {
  std::int64_t input = 0;   // n
  std::int64_t hidden = 0;  // h
};

struct OpsCount {
  std::int64_t xnor_ops = 0;        // xnor-popcount dot products
  std::int64_t popcount_bits = 0;   // bits pushed through xnor + popcount
  std::int64_t scale_mults = 0;     // gamma multiplies
  std::int64_t fp_mults = 0;        // full-precision gate-matmul multiplies
  std::int64_t pointwise_mults = 0; // full-precision multiplies in the c/h update

  bool operator==(const OpsCount&) const = default;
};

// Per-cell-step operation counts.
//
// Binarized (A, W); the pointwise terms apply to the fully binarized cell:
//   xnor_ops        = 8*h*A*W              + 2*h*A*A
//   popcount_bits   = 4*h*A*W*(n + h)      + 2*h*A*A
//   scale_mults     = 8*h*A*W              + 2*h*A*A
//   fp_mults        = 0
//   pointwise_mults = h (o * tanh(c)), or 3*h when the cell update stays in FP
// Full precision (either operand FP):
//   fp_mults = 4*h*(n + h), pointwise_mults = 3*h, everything else 0.
OpsCount ops_count(BitLevel a, BitLevel w, const CellDims& dims,
                   bool pointwise_binarized);

}  // namespace mubinn

#endif  // MUBINN_DELAY_MODEL_H_
