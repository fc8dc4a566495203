#include "mubinn/binarized_lstm.h"

#include <cmath>
#include <stdexcept>

namespace mubinn {
namespace {

RealVector add(const RealVector& a, const RealVector& b) {
  return elementwise(a, b, ElementwiseOp::kAdd);
}

std::string gate_name(std::string_view prefix, Gate g) {
  return std::string(prefix) + "_" + std::string(gate_suffix(g));
}

void check_matrix(const QuantizedMatrix& m, std::size_t rows, std::size_t cols,
                  std::size_t levels, const std::string& name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw std::invalid_argument(
        name + " has shape [" + std::to_string(m.rows()) + "x" +
        std::to_string(m.cols()) + "], expected [" + std::to_string(rows) +
        "x" + std::to_string(cols) + "]");
  }
  if (m.num_levels() != levels) {
    throw std::invalid_argument(name + " has " +
                                std::to_string(m.num_levels()) +
                                " levels, config says " +
                                std::to_string(levels));
  }
}

}  // namespace

std::string_view mode_name(QuantMode mode) {
  switch (mode) {
    case QuantMode::kBLstm: return "b_lstm";
    case QuantMode::kMubinn1: return "mubinn1";
    case QuantMode::kMubinn2: return "mubinn2";
  }
  return "?";
}

QuantMode parse_mode(std::string_view name) {
  if (name == "b_lstm") return QuantMode::kBLstm;
  if (name == "mubinn1") return QuantMode::kMubinn1;
  if (name == "mubinn2") return QuantMode::kMubinn2;
  throw std::invalid_argument("unknown mode '" + std::string(name) +
                              "' (expected b_lstm, mubinn1 or mubinn2)");
}

QuantConfig QuantConfig::b_lstm() {
  QuantConfig c;
  c.mode = QuantMode::kBLstm;
  c.act_levels = 1;
  c.weight_levels = 1;
  c.unit_scales = true;
  return c;
}

QuantConfig QuantConfig::mubinn1(std::size_t a, std::size_t w) {
  QuantConfig c;
  c.mode = QuantMode::kMubinn1;
  c.act_levels = a;
  c.weight_levels = w;
  c.pow2_scales = true;
  return c;
}

QuantConfig QuantConfig::mubinn2(std::size_t a, std::size_t w) {
  QuantConfig c;
  c.mode = QuantMode::kMubinn2;
  c.act_levels = a;
  c.weight_levels = w;
  return c;
}

void QuantConfig::validate() const {
  if (act_levels == 0 || weight_levels == 0) {
    throw std::invalid_argument("activation and weight levels must be >= 1");
  }
  if (act_levels > 255 || weight_levels > 255) {
    throw std::invalid_argument("at most 255 levels are supported");
  }
  switch (mode) {
    case QuantMode::kBLstm:
      if (act_levels != 1 || weight_levels != 1) {
        throw std::invalid_argument(
            "b_lstm is single-level: act and weight levels must both be 1");
      }
      if (!unit_scales) {
        throw std::invalid_argument("b_lstm requires unit scales");
      }
      if (!binarize_recurrent) {
        throw std::invalid_argument("b_lstm always binarizes the recurrent path");
      }
      break;
    case QuantMode::kMubinn1:
      if (!pow2_scales && !unit_scales) {
        throw std::invalid_argument("mubinn1 requires power-of-two scales");
      }
      break;
    case QuantMode::kMubinn2:
      if (!binarize_recurrent) {
        throw std::invalid_argument(
            "mubinn2 always binarizes the recurrent path");
      }
      break;
  }
}

ScalePolicy QuantConfig::weight_policy() const {
  if (unit_scales) {
    return ScalePolicy::with_scales(std::vector<double>(weight_levels, 1.0));
  }
  return pow2_scales ? ScalePolicy::fitted_pow2(weight_levels)
                     : ScalePolicy::fitted(weight_levels);
}

ScalePolicy QuantConfig::act_policy() const {
  if (unit_scales) {
    return ScalePolicy::with_scales(std::vector<double>(act_levels, 1.0));
  }
  return pow2_scales ? ScalePolicy::fitted_pow2(act_levels)
                     : ScalePolicy::fitted(act_levels);
}

QuantConfig resolve_config(QuantConfig cfg, bool strict,
                           std::vector<std::string>* warnings) {
  if (cfg.mode == QuantMode::kMubinn1 && !cfg.pow2_scales &&
      !cfg.unit_scales) {
    if (strict) {
      throw std::invalid_argument("mubinn1 requires --pow2");
    }
    cfg.pow2_scales = true;
    if (warnings != nullptr) {
      warnings->push_back("mubinn1 uses power-of-two scales; --pow2 forced");
    }
  }
  if (cfg.mode == QuantMode::kBLstm) cfg.unit_scales = true;
  cfg.validate();
  return cfg;
}

QuantizedModel::QuantizedModel(QuantConfig config, std::size_t input_size,
                               std::size_t hidden_size,
                               std::array<QuantizedMatrix, 4> wx,
                               std::array<QuantizedMatrix, 4> wh_q,
                               std::array<RealMatrix, 4> wh_fp,
                               std::array<RealVector, 4> bias_fp,
                               std::array<std::optional<MLBTensor>, 4> bias_mlb,
                               DenseHead head)
    : config_(config),
      input_size_(input_size),
      hidden_size_(hidden_size),
      wx_(std::move(wx)),
      wh_q_(std::move(wh_q)),
      wh_fp_(std::move(wh_fp)),
      bias_fp_(std::move(bias_fp)),
      bias_mlb_(std::move(bias_mlb)),
      head_(std::move(head)),
      sigmoid_lut_(PWLTable::sigmoid()),
      tanh_lut_(PWLTable::tanh()) {
  config_.validate();
  if (input_size_ == 0 || hidden_size_ == 0) {
    throw std::invalid_argument("quantized model sizes must be positive");
  }
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    check_matrix(wx_[k], hidden_size_, input_size_, config_.weight_levels,
                 gate_name("wx", g));
    if (config_.binarize_recurrent) {
      check_matrix(wh_q_[k], hidden_size_, hidden_size_, config_.weight_levels,
                   gate_name("wh", g));
    } else if (wh_fp_[k].rows() != hidden_size_ ||
               wh_fp_[k].cols() != hidden_size_) {
      throw std::invalid_argument(gate_name("wh", g) + " has shape " +
                                  wh_fp_[k].shape_string());
    }
    if (config_.bias_policy == BiasPolicy::kMlbStored) {
      if (!bias_mlb_[k]) {
        throw std::invalid_argument(gate_name("b", g) + " missing MLB form");
      }
      bias_mlb_[k]->validate();
      if (bias_mlb_[k]->numel() != hidden_size_) {
        throw std::invalid_argument(gate_name("b", g) + " has wrong length");
      }
      bias_[k] = mlb_reconstruct(*bias_mlb_[k]);
    } else {
      if (bias_fp_[k].size() != hidden_size_) {
        throw std::invalid_argument(gate_name("b", g) + " has length " +
                                    std::to_string(bias_fp_[k].size()));
      }
      bias_[k] = bias_fp_[k];
    }
  }
  head_.validate(hidden_size_);
}

MLBTensor QuantizedModel::quantize_activation(const RealVector& v) const {
  return mlb_quantize(v, config_.act_policy());
}

QuantState QuantizedModel::initial_state() const {
  QuantState s{RealVector(hidden_size_), RealVector(hidden_size_), 0, {}, {}};
  return s;
}

QuantState QuantizedModel::step(const RealVector& x, const QuantState& s,
                                GateTrace* trace) const {
  if (x.size() != input_size_) {
    throw std::invalid_argument("q_cell_step: input " + shape_string(x.size()) +
                                " but model expects " +
                                shape_string(input_size_));
  }
  if (s.h.size() != hidden_size_ || s.c.size() != hidden_size_) {
    throw std::invalid_argument("q_cell_step: state dims do not match hidden "
                                "size " +
                                std::to_string(hidden_size_));
  }
  const MLBTensor x_q = quantize_activation(x);
  std::optional<MLBTensor> h_q;
  if (config_.binarize_recurrent) {
    h_q = s.h_q ? *s.h_q : quantize_activation(s.h);
  }

  std::array<RealVector, 4> pre;
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    RealVector rec = config_.binarize_recurrent ? mlb_matvec(wh_q_[k], *h_q)
                                                : matvec(wh_fp_[k], s.h);
    pre[k] = add(add(mlb_matvec(wx_[k], x_q), rec), bias_[k]);
  }
  if (trace != nullptr) trace->preact = pre;

  const RealVector& pf = pre[gate_index(Gate::kForget)];
  const RealVector& pi = pre[gate_index(Gate::kInput)];
  const RealVector& pg = pre[gate_index(Gate::kCell)];
  const RealVector& po = pre[gate_index(Gate::kOutput)];

  QuantState next{RealVector(hidden_size_), RealVector(hidden_size_), s.t + 1,
                  {}, {}};
  if (config_.mode != QuantMode::kMubinn2) {
    for (std::size_t j = 0; j < hidden_size_; ++j) {
      const double f = sigmoid(pf[j]);
      const double i = sigmoid(pi[j]);
      const double gg = std::tanh(pg[j]);
      const double o = sigmoid(po[j]);
      next.c[j] = f * s.c[j] + i * gg;
      next.h[j] = o * std::tanh(next.c[j]);
    }
  } else {
    const MLBTensor f_q = quantize_activation(sigmoid_lut_.eval(pf));
    const MLBTensor i_q = quantize_activation(sigmoid_lut_.eval(pi));
    const MLBTensor g_q = quantize_activation(tanh_lut_.eval(pg));
    const RealVector o = mlb_reconstruct(quantize_activation(
        sigmoid_lut_.eval(po)));
    const MLBTensor c_prev_q = s.c_q ? *s.c_q : quantize_activation(s.c);
    next.c = add(mlb_pointwise_mul(f_q, c_prev_q), mlb_pointwise_mul(i_q, g_q));
    const RealVector tc = tanh_lut_.eval(next.c);
    for (std::size_t j = 0; j < hidden_size_; ++j) next.h[j] = o[j] * tc[j];
    next.c_q = quantize_activation(next.c);
  }
  if (config_.binarize_recurrent) next.h_q = quantize_activation(next.h);
  return next;
}

QForwardResult QuantizedModel::forward(const Sequence& seq,
                                       std::vector<GateTrace>* traces) const {
  if (seq.empty()) throw std::invalid_argument("q_forward: empty sequence");
  QForwardResult result{initial_state(), {}, {}};
  result.hidden.reserve(seq.size());
  for (const RealVector& x : seq) {
    GateTrace trace;
    result.final_state =
        step(x, result.final_state, traces != nullptr ? &trace : nullptr);
    if (traces != nullptr) traces->push_back(std::move(trace));
    result.hidden.push_back(result.final_state.h);
  }
  result.output = classify(head_, result.final_state.h);
  return result;
}

Classification QuantizedModel::predict(const Sequence& seq) const {
  return forward(seq).output;
}

QuantizedModel quantize_model(const FpModel& model, const QuantConfig& cfg) {
  cfg.validate();
  const LSTMWeights& w = model.lstm;
  w.validate();
  model.head.validate(w.hidden_size);
  const ScalePolicy policy = cfg.weight_policy();

  std::array<QuantizedMatrix, 4> wx;
  std::array<QuantizedMatrix, 4> wh_q;
  std::array<RealMatrix, 4> wh_fp;
  std::array<RealVector, 4> bias_fp;
  std::array<std::optional<MLBTensor>, 4> bias_mlb;
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    wx[k] = QuantizedMatrix::quantize(w.wx[k], policy);
    if (cfg.binarize_recurrent) {
      wh_q[k] = QuantizedMatrix::quantize(w.wh[k], policy);
    } else {
      wh_fp[k] = w.wh[k];
    }
    if (cfg.bias_policy == BiasPolicy::kMlbStored) {
      bias_mlb[k] = mlb_quantize(w.b[k], policy);
    } else {
      bias_fp[k] = w.b[k];
    }
  }
  return QuantizedModel(cfg, w.input_size, w.hidden_size, std::move(wx),
                        std::move(wh_q), std::move(wh_fp), std::move(bias_fp),
                        std::move(bias_mlb), model.head);
}

std::vector<TensorError> reconstruction_report(const FpModel& reference,
                                               const QuantizedModel& q) {
  std::vector<TensorError> out;
  auto push = [&out](std::string name, std::span<const double> ref,
                     std::span<const double> approx) {
    const double err = l2_distance(ref, approx);
    const double norm = l2_norm(ref);
    out.push_back({std::move(name), err, norm > 0.0 ? err / norm : 0.0});
  };
  const LSTMWeights& w = reference.lstm;
  for (Gate g : kGates) {
    const std::size_t k = gate_index(g);
    push(gate_name("wx", g), w.wx[k].flat(), q.wx(g).reconstruct().flat());
    if (q.config().binarize_recurrent) {
      push(gate_name("wh", g), w.wh[k].flat(), q.wh_q(g).reconstruct().flat());
    } else {
      push(gate_name("wh", g), w.wh[k].flat(), q.wh_fp(g).flat());
    }
    push(gate_name("b", g), w.b[k].span(), q.bias(g).span());
  }
  return out;
}

double mean_preactivation_error(const FpModel& reference,
                                const QuantizedModel& q, const Sequence& seq) {
  std::vector<GateTrace> ref_traces;
  std::vector<GateTrace> q_traces;
  lstm_forward(reference.lstm, seq, LSTMState::zeros(reference.lstm.hidden_size),
               &ref_traces);
  q.forward(seq, &q_traces);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < ref_traces.size(); ++t) {
    for (std::size_t k = 0; k < 4; ++k) {
      const RealVector& a = ref_traces[t].preact[k];
      const RealVector& b = q_traces[t].preact[k];
      for (std::size_t j = 0; j < a.size(); ++j) {
        acc += std::fabs(a[j] - b[j]);
        ++count;
      }
    }
  }
  return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

}  // namespace mubinn
