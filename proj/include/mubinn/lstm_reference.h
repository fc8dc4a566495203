#ifndef MUBINN_LSTM_REFERENCE_H_
#define MUBINN_LSTM_REFERENCE_H_

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "mubinn/numeric.h"

namespace mubinn {

// Gate order used everywhere: forget, input, cell candidate, output.
enum class Gate : int { kForget = 0, kInput = 1, kCell = 2, kOutput = 3 };
inline constexpr std::array<Gate, 4> kGates = {Gate::kForget, Gate::kInput,
                                               Gate::kCell, Gate::kOutput};
inline constexpr std::size_t gate_index(Gate g) {
  return static_cast<std::size_t>(g);
}
// Single-letter suffix used in tensor names: f, i, g, o.
std::string_view gate_suffix(Gate g);

using Sequence = std::vector<RealVector>;

struct LSTMWeights {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  std::array<RealMatrix, 4> wx;  // hidden x input
  std::array<RealMatrix, 4> wh;  // hidden x hidden
  std::array<RealVector, 4> b;   // hidden

  static LSTMWeights zeros(std::size_t input_size, std::size_t hidden_size);
  static LSTMWeights random(SeededRng& rng, std::size_t input_size,
                            std::size_t hidden_size, double scale);

  // Throws std::invalid_argument on any inconsistent dimension.
  void validate() const;
};

struct LSTMState {
  RealVector h;
  RealVector c;
  std::size_t t = 0;

  static LSTMState zeros(std::size_t hidden_size);
};

// Per-gate pre-activations of one step, before sigmoid/tanh.
struct GateTrace {
  std::array<RealVector, 4> preact;
};

struct DenseHead {
  RealMatrix w;  // classes x hidden
  RealVector b;  // classes

  std::size_t num_classes() const { return w.rows(); }
  void validate(std::size_t hidden_size) const;
};

struct Classification {
  RealVector logits;
  std::size_t label = 0;
};

struct ForwardResult {
  LSTMState final_state;
  std::vector<RealVector> hidden;  // h_1 .. h_T
};

double sigmoid(double x);

LSTMState lstm_cell_step(const LSTMWeights& w, const RealVector& x,
                         const LSTMState& s, GateTrace* trace = nullptr);

// Throws on an empty sequence. Per-step traces are appended to `traces`
// when it is non-null.
ForwardResult lstm_forward(const LSTMWeights& w, const Sequence& seq,
                           const LSTMState& s0,
                           std::vector<GateTrace>* traces = nullptr);
ForwardResult lstm_forward(const LSTMWeights& w, const Sequence& seq);

// logits = W h + b; label = argmax with ties going to the lowest index.
Classification classify(const DenseHead& head, const RealVector& h);
std::size_t argmax(const RealVector& v);

// Full-precision model: LSTM layer followed by a dense head.
struct FpModel {
  LSTMWeights lstm;
  DenseHead head;

  Classification predict(const Sequence& seq) const;
};

}  // namespace mubinn

#endif  // MUBINN_LSTM_REFERENCE_H_
