#ifndef MUBINN_BINARIZED_LSTM_H_
#define MUBINN_BINARIZED_LSTM_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mubinn/activation_lut.h"
#include "mubinn/bitpack.h"
#include "mubinn/lstm_reference.h"
#include "mubinn/mlb_quantizer.h"

namespace mubinn {

enum class QuantMode {
  kBLstm,    // 1-level sign binarization of inputs and weights
  kMubinn1,  // multi-level gate matmuls, power-of-two scales
  kMubinn2,  // fully binarized cell: MLB gates, xnor point-wise products, LUTs
};

enum class BiasPolicy { kFullPrecision, kMlbStored };

std::string_view mode_name(QuantMode mode);
// Accepts "b_lstm", "mubinn1", "mubinn2".
QuantMode parse_mode(std::string_view name);

struct QuantConfig {
  QuantMode mode = QuantMode::kMubinn2;
  std::size_t act_levels = 1;
  std::size_t weight_levels = 1;
  bool pow2_scales = false;
  // All scales fixed to 1; MLB then degenerates to plain sign planes.
  bool unit_scales = false;
  // Binarize the W_h * h_{t-1} products too. mubinn1 only; the other modes
  // always binarize them.
  bool binarize_recurrent = true;
  BiasPolicy bias_policy = BiasPolicy::kFullPrecision;

  static QuantConfig b_lstm();
  static QuantConfig mubinn1(std::size_t a, std::size_t w);
  static QuantConfig mubinn2(std::size_t a, std::size_t w);

  // Throws std::invalid_argument on an invalid combination.
  void validate() const;

  ScalePolicy weight_policy() const;
  ScalePolicy act_policy() const;
};

// Fixes up config combinations that have a single sensible repair (mubinn1
// without power-of-two scales). Each repair is appended to `warnings`; with
// `strict` set, a repair is an error instead.
QuantConfig resolve_config(QuantConfig cfg, bool strict,
                           std::vector<std::string>* warnings);

struct QuantState {
  RealVector h;
  RealVector c;
  std::size_t t = 0;
  // MLB forms of h and c, produced at the end of the step that computed
  // them and consumed by the next step.
  std::optional<MLBTensor> h_q;
  std::optional<MLBTensor> c_q;
};

struct QForwardResult {
  QuantState final_state;
  std::vector<RealVector> hidden;
  Classification output;
};

class QuantizedModel {
 public:
  // Assembles a model from already-quantized parts. Validates dims and the
  // config; derives the effective biases from `stored_bias` when present.
  QuantizedModel(QuantConfig config, std::size_t input_size,
                 std::size_t hidden_size, std::array<QuantizedMatrix, 4> wx,
                 std::array<QuantizedMatrix, 4> wh_q,
                 std::array<RealMatrix, 4> wh_fp,
                 std::array<RealVector, 4> bias_fp,
                 std::array<std::optional<MLBTensor>, 4> bias_mlb,
                 DenseHead head);

  const QuantConfig& config() const { return config_; }
  std::size_t input_size() const { return input_size_; }
  std::size_t hidden_size() const { return hidden_size_; }
  const QuantizedMatrix& wx(Gate g) const { return wx_[gate_index(g)]; }
  // Only meaningful when config().binarize_recurrent.
  const QuantizedMatrix& wh_q(Gate g) const { return wh_q_[gate_index(g)]; }
  // Only meaningful when !config().binarize_recurrent.
  const RealMatrix& wh_fp(Gate g) const { return wh_fp_[gate_index(g)]; }
  // Bias used at inference time.
  const RealVector& bias(Gate g) const { return bias_[gate_index(g)]; }
  // Full-precision bias as stored (kFullPrecision policy).
  const RealVector& bias_fp(Gate g) const { return bias_fp_[gate_index(g)]; }
  // Stored MLB bias (kMlbStored policy).
  const std::optional<MLBTensor>& bias_mlb(Gate g) const {
    return bias_mlb_[gate_index(g)];
  }
  const DenseHead& head() const { return head_; }
  const PWLTable& sigmoid_lut() const { return sigmoid_lut_; }
  const PWLTable& tanh_lut() const { return tanh_lut_; }

  QuantState initial_state() const;
  MLBTensor quantize_activation(const RealVector& v) const;

  QuantState step(const RealVector& x, const QuantState& s,
                  GateTrace* trace = nullptr) const;
  QForwardResult forward(const Sequence& seq,
                         std::vector<GateTrace>* traces = nullptr) const;
  Classification predict(const Sequence& seq) const;

 private:
  QuantConfig config_;
  std::size_t input_size_;
  std::size_t hidden_size_;
  std::array<QuantizedMatrix, 4> wx_;
  std::array<QuantizedMatrix, 4> wh_q_;
  std::array<RealMatrix, 4> wh_fp_;
  std::array<RealVector, 4> bias_fp_;
  std::array<std::optional<MLBTensor>, 4> bias_mlb_;
  std::array<RealVector, 4> bias_;
  DenseHead head_;
  PWLTable sigmoid_lut_;
  PWLTable tanh_lut_;
};

QuantizedModel quantize_model(const FpModel& model, const QuantConfig& cfg);

inline QuantState q_cell_step(const QuantizedModel& m, const RealVector& x,
                              const QuantState& s) {
  return m.step(x, s);
}
inline QForwardResult q_forward(const QuantizedModel& m, const Sequence& seq) {
  return m.forward(seq);
}

struct TensorError {
  std::string name;
  double l2_error = 0.0;
  double relative = 0.0;  // l2_error / ||reference||, 0 for a zero reference
};

// Per-tensor L2 distance between the quantized tensors and their sources.
std::vector<TensorError> reconstruction_report(const FpModel& reference,
                                               const QuantizedModel& q);

// Mean |q - ref| over every gate pre-activation of every step, with both
// models run on the same sequence from zero state.
double mean_preactivation_error(const FpModel& reference,
                                const QuantizedModel& q, const Sequence& seq);

}  // namespace mubinn

#endif  // MUBINN_BINARIZED_LSTM_H_
