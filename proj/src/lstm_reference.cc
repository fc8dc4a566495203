#include "mubinn/lstm_reference.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mubinn {

std::string_view gate_suffix(Gate g) {
  switch (g) {
    case Gate::kForget: return "f";
    case Gate::kInput: return "i";
    case Gate::kCell: return "g";
    case Gate::kOutput: return "o";
  }
  return "?";
}

LSTMWeights LSTMWeights::zeros(std::size_t input_size,
                               std::size_t hidden_size) {
  LSTMWeights w;
  w.input_size = input_size;
  w.hidden_size = hidden_size;
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    w.wx[k] = RealMatrix(hidden_size, input_size);
    w.wh[k] = RealMatrix(hidden_size, hidden_size);
    w.b[k] = RealVector(hidden_size);
  }
  return w;
}

LSTMWeights LSTMWeights::random(SeededRng& rng, std::size_t input_size,
                                std::size_t hidden_size, double scale) {
  LSTMWeights w;
  w.input_size = input_size;
  w.hidden_size = hidden_size;
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    w.wx[k] = rng_uniform_matrix(rng, -scale, scale, hidden_size, input_size);
    w.wh[k] = rng_uniform_matrix(rng, -scale, scale, hidden_size, hidden_size);
    w.b[k] = rng_uniform(rng, -scale, scale, hidden_size);
  }
  return w;
}

void LSTMWeights::validate() const {
  if (input_size == 0 || hidden_size == 0) {
    throw std::invalid_argument("LSTM sizes must be positive");
  }
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    const std::string name(gate_suffix(g));
    if (wx[k].rows() != hidden_size || wx[k].cols() != input_size) {
      throw std::invalid_argument("wx_" + name + " has shape " +
                                  wx[k].shape_string() + ", expected [" +
                                  std::to_string(hidden_size) + "x" +
                                  std::to_string(input_size) + "]");
    }
    if (wh[k].rows() != hidden_size || wh[k].cols() != hidden_size) {
      throw std::invalid_argument("wh_" + name + " has shape " +
                                  wh[k].shape_string() + ", expected [" +
                                  std::to_string(hidden_size) + "x" +
                                  std::to_string(hidden_size) + "]");
    }
    if (b[k].size() != hidden_size) {
      throw std::invalid_argument("b_" + name + " has length " +
                                  std::to_string(b[k].size()) +
                                  ", expected " + std::to_string(hidden_size));
    }
  }
}

LSTMState LSTMState::zeros(std::size_t hidden_size) {
  return LSTMState{RealVector(hidden_size), RealVector(hidden_size), 0};
}

void DenseHead::validate(std::size_t hidden_size) const {
  if (w.cols() != hidden_size || b.size() != w.rows() || w.rows() == 0) {
    throw std::invalid_argument("dense head " + w.shape_string() + " + bias " +
                                shape_string(b.size()) +
                                " incompatible with hidden size " +
                                std::to_string(hidden_size));
  }
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LSTMState lstm_cell_step(const LSTMWeights& w, const RealVector& x,
                         const LSTMState& s, GateTrace* trace) {
  if (x.size() != w.input_size) {
    throw std::invalid_argument("lstm_cell_step: input " +
                                shape_string(x.size()) + " but model expects " +
                                shape_string(w.input_size));
  }
  if (s.h.size() != w.hidden_size || s.c.size() != w.hidden_size) {
    throw std::invalid_argument("lstm_cell_step: state dims do not match "
                                "hidden size " +
                                std::to_string(w.hidden_size));
  }
  std::array<RealVector, 4> pre;
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    pre[k] = elementwise(
        elementwise(matvec(w.wx[k], x), matvec(w.wh[k], s.h),
                    ElementwiseOp::kAdd),
        w.b[k], ElementwiseOp::kAdd);
  }
  if (trace != nullptr) trace->preact = pre;

  const std::size_t n = w.hidden_size;
  LSTMState next{RealVector(n), RealVector(n), s.t + 1};
  for (std::size_t j = 0; j < n; ++j) {
    const double f = sigmoid(pre[gate_index(Gate::kForget)][j]);
    const double i = sigmoid(pre[gate_index(Gate::kInput)][j]);
    const double g = std::tanh(pre[gate_index(Gate::kCell)][j]);
    const double o = sigmoid(pre[gate_index(Gate::kOutput)][j]);
    next.c[j] = f * s.c[j] + i * g;
    next.h[j] = o * std::tanh(next.c[j]);
  }
  return next;
}

ForwardResult lstm_forward(const LSTMWeights& w, const Sequence& seq,
                           const LSTMState& s0,
                           std::vector<GateTrace>* traces) {
  if (seq.empty()) throw std::invalid_argument("lstm_forward: empty sequence");
  ForwardResult result{s0, {}};
  result.hidden.reserve(seq.size());
  for (const RealVector& x : seq) {
    GateTrace trace;
    result.final_state = lstm_cell_step(w, x, result.final_state,
                                        traces != nullptr ? &trace : nullptr);
    if (traces != nullptr) traces->push_back(std::move(trace));
    result.hidden.push_back(result.final_state.h);
  }
  return result;
}

ForwardResult lstm_forward(const LSTMWeights& w, const Sequence& seq) {
  return lstm_forward(w, seq, LSTMState::zeros(w.hidden_size));
}

std::size_t argmax(const RealVector& v) {
  if (v.empty()) throw std::invalid_argument("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

Classification classify(const DenseHead& head, const RealVector& h) {
  head.validate(h.size());
  RealVector logits =
      elementwise(matvec(head.w, h), head.b, ElementwiseOp::kAdd);
  const std::size_t label = argmax(logits);
  return Classification{std::move(logits), label};
}

Classification FpModel::predict(const Sequence& seq) const {
  return classify(head, lstm_forward(lstm, seq).final_state.h);
}

}  // namespace mubinn
