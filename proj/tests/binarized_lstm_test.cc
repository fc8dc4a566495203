#include "mubinn/binarized_lstm.h"

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

namespace mubinn {
namespace {

FpModel random_model(SeededRng& rng, std::size_t n, std::size_t h,
                     double scale) {
  FpModel m;
  m.lstm = LSTMWeights::random(rng, n, h, scale);
  m.head.w = rng_uniform_matrix(rng, -scale, scale, 2, h);
  m.head.b = rng_uniform(rng, -scale, scale, 2);
  return m;
}

Sequence random_sequence(SeededRng& rng, std::size_t n, std::size_t len) {
  Sequence seq;
  for (std::size_t t = 0; t < len; ++t) seq.push_back(rng_uniform(rng, -1, 1, n));
  return seq;
}

FpModel zero_model(std::size_t n, std::size_t h) {
  FpModel m;
  m.lstm = LSTMWeights::zeros(n, h);
  m.head.w = RealMatrix(2, h);
  m.head.b = RealVector(2);
  return m;
}

TEST(QuantizeModelTest, BLstmIsUnitSignPlanes) {
  SeededRng rng(1);
  const FpModel fp = random_model(rng, 5, 4, 1.0);
  const QuantizedModel q = quantize_model(fp, QuantConfig::b_lstm());
  for (Gate g : kGates) {
    ASSERT_EQ(q.wx(g).num_levels(), 1u);
    EXPECT_EQ(q.wx(g).scales()[0], 1.0);
    EXPECT_EQ(q.wh_q(g).scales()[0], 1.0);
    const RealMatrix& src = fp.lstm.wx[gate_index(g)];
    const RealMatrix rec = q.wx(g).reconstruct();
    for (std::size_t k = 0; k < src.flat().size(); ++k) {
      EXPECT_EQ(rec.flat()[k], src.flat()[k] >= 0.0 ? 1.0 : -1.0);
    }
  }
}

TEST(QuantizeModelTest, SignWeightsReconstructExactly) {
  SeededRng rng(2);
  FpModel fp = random_model(rng, 6, 3, 1.0);
  for (Gate g : kGates) {
    for (double& v : fp.lstm.wx[gate_index(g)].flat()) v = v >= 0 ? 1.0 : -1.0;
    for (double& v : fp.lstm.wh[gate_index(g)].flat()) v = v >= 0 ? 1.0 : -1.0;
  }
  const QuantizedModel q = quantize_model(fp, QuantConfig::mubinn2(1, 1));
  for (Gate g : kGates) {
    EXPECT_EQ(q.wx(g).scales()[0], 1.0);
    EXPECT_EQ(q.wx(g).reconstruct().flat()[0], fp.lstm.wx[gate_index(g)].flat()[0]);
    const RealMatrix rec = q.wh_q(g).reconstruct();
    for (std::size_t k = 0; k < rec.flat().size(); ++k) {
      EXPECT_EQ(rec.flat()[k], fp.lstm.wh[gate_index(g)].flat()[k]);
    }
  }
}

TEST(QuantizeModelTest, MoreWeightLevelsReduceError) {
  SeededRng rng(3);
  const FpModel fp = random_model(rng, 8, 8, 1.0);
  const auto r1 = reconstruction_report(fp, quantize_model(fp, QuantConfig::mubinn2(1, 1)));
  const auto r3 = reconstruction_report(fp, quantize_model(fp, QuantConfig::mubinn2(1, 3)));
  ASSERT_EQ(r1.size(), r3.size());
  for (std::size_t k = 0; k < r1.size(); ++k) {
    if (r1[k].name.rfind("b_", 0) == 0) continue;  // biases stay full precision
    EXPECT_LT(r3[k].l2_error, r1[k].l2_error) << r1[k].name;
  }
}

TEST(QuantizeModelTest, MlbStoredBias) {
  SeededRng rng(4);
  const FpModel fp = random_model(rng, 3, 4, 1.0);
  QuantConfig cfg = QuantConfig::mubinn2(2, 2);
  cfg.bias_policy = BiasPolicy::kMlbStored;
  const QuantizedModel q = quantize_model(fp, cfg);
  for (Gate g : kGates) {
    ASSERT_TRUE(q.bias_mlb(g).has_value());
    EXPECT_EQ(q.bias(g), mlb_reconstruct(*q.bias_mlb(g)));
  }
}

TEST(QuantizeModelTest, InvalidConfigs) {
  const FpModel fp = zero_model(2, 2);
  QuantConfig bad = QuantConfig::b_lstm();
  bad.act_levels = 2;
  EXPECT_THROW(quantize_model(fp, bad), std::invalid_argument);
  QuantConfig no_pow2 = QuantConfig::mubinn1(2, 2);
  no_pow2.pow2_scales = false;
  EXPECT_THROW(quantize_model(fp, no_pow2), std::invalid_argument);
  QuantConfig fp_rec = QuantConfig::mubinn2(2, 2);
  fp_rec.binarize_recurrent = false;
  EXPECT_THROW(quantize_model(fp, fp_rec), std::invalid_argument);
  EXPECT_THROW(quantize_model(fp, QuantConfig::mubinn2(0, 1)), std::invalid_argument);
}

TEST(ResolveConfigTest, Mubinn1ForcesPow2WithWarning) {
  QuantConfig cfg = QuantConfig::mubinn1(2, 2);
  cfg.pow2_scales = false;
  std::vector<std::string> warnings;
  const QuantConfig fixed = resolve_config(cfg, false, &warnings);
  EXPECT_TRUE(fixed.pow2_scales);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_THROW(resolve_config(cfg, true, &warnings), std::invalid_argument);
}

TEST(ResolveConfigTest, BLstmRejectsMultiLevel) {
  QuantConfig cfg = QuantConfig::b_lstm();
  cfg.act_levels = 2;
  EXPECT_THROW(resolve_config(cfg, false, nullptr), std::invalid_argument);
}

TEST(ParseModeTest, RoundTrips) {
  for (QuantMode m : {QuantMode::kBLstm, QuantMode::kMubinn1, QuantMode::kMubinn2}) {
    EXPECT_EQ(parse_mode(mode_name(m)), m);
  }
  EXPECT_THROW(parse_mode("mubinn3"), std::invalid_argument);
}

TEST(QCellStepTest, Mubinn2ZeroModelStaysNearZero) {
  const FpModel fp = zero_model(3, 4);
  const QuantizedModel q = quantize_model(fp, QuantConfig::mubinn2(8, 8));
  SeededRng rng(5);
  QuantState s = q.initial_state();
  for (int t = 0; t < 5; ++t) {
    s = q.step(rng_uniform(rng, -1, 1, 3), s);
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_LE(std::fabs(s.c[j]), 1e-9);
      EXPECT_LE(std::fabs(s.h[j]), 1e-9);
    }
  }
}

TEST(QCellStepTest, BLstmHandTrace) {
  FpModel fp = zero_model(1, 1);
  fp.lstm.b[gate_index(Gate::kForget)][0] = -100;
  fp.lstm.b[gate_index(Gate::kInput)][0] = 100;
  fp.lstm.b[gate_index(Gate::kOutput)][0] = 100;
  fp.lstm.b[gate_index(Gate::kCell)][0] = 1;
  const QuantizedModel q = quantize_model(fp, QuantConfig::b_lstm());
  GateTrace trace;
  const QuantState s = q.step(RealVector{0.7}, q.initial_state(), &trace);
  // Zero weights binarize to +1, and sign(x) = sign(h0) = +1: each
  // preactivation gains exactly 2.
  EXPECT_EQ(trace.preact[gate_index(Gate::kForget)][0], -98.0);
  EXPECT_EQ(trace.preact[gate_index(Gate::kInput)][0], 102.0);
  EXPECT_EQ(trace.preact[gate_index(Gate::kCell)][0], 3.0);
  EXPECT_EQ(trace.preact[gate_index(Gate::kOutput)][0], 102.0);
  EXPECT_NEAR(s.c[0], 0.9950547536867305, 1e-15);
  EXPECT_NEAR(s.h[0], 0.7595094447988621, 1e-15);
}

TEST(QCellStepTest, Mubinn1PreactivationsMatchOracle) {
  SeededRng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const FpModel fp = random_model(rng, 6, 5, 1.0);
    const QuantizedModel q = quantize_model(fp, QuantConfig::mubinn1(3, 2));
    QuantState s = q.initial_state();
    s.h = rng_uniform(rng, -1, 1, 5);
    s.c = rng_uniform(rng, -1, 1, 5);
    const RealVector x = rng_uniform(rng, -1, 1, 6);
    GateTrace trace;
    q.step(x, s, &trace);
    const RealVector rx = mlb_reconstruct(q.quantize_activation(x));
    const RealVector rh = mlb_reconstruct(q.quantize_activation(s.h));
    for (Gate g : kGates) {
      const RealVector oracle = elementwise(
          elementwise(matvec(q.wx(g).reconstruct(), rx),
                      matvec(q.wh_q(g).reconstruct(), rh), ElementwiseOp::kAdd),
          q.bias(g), ElementwiseOp::kAdd);
      for (std::size_t j = 0; j < 5; ++j) {
        EXPECT_NEAR(trace.preact[gate_index(g)][j], oracle[j],
                    1e-9 * std::max(1.0, std::fabs(oracle[j])));
      }
    }
  }
}

TEST(QCellStepTest, Mubinn1FullPrecisionRecurrentPath) {
  SeededRng rng(7);
  const FpModel fp = random_model(rng, 4, 3, 1.0);
  QuantConfig cfg = QuantConfig::mubinn1(2, 2);
  cfg.binarize_recurrent = false;
  const QuantizedModel q = quantize_model(fp, cfg);
  QuantState s = q.initial_state();
  s.h = RealVector{0.3, -0.2, 0.9};
  const RealVector x{1, -1, 0.5, 0.25};
  GateTrace trace;
  const QuantState next = q.step(x, s, &trace);
  EXPECT_FALSE(next.h_q.has_value());
  const RealVector rx = mlb_reconstruct(q.quantize_activation(x));
  const RealVector oracle = elementwise(
      elementwise(matvec(q.wx(Gate::kCell).reconstruct(), rx),
                  matvec(fp.lstm.wh[gate_index(Gate::kCell)], s.h),
                  ElementwiseOp::kAdd),
      q.bias(Gate::kCell), ElementwiseOp::kAdd);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(trace.preact[gate_index(Gate::kCell)][j], oracle[j], 1e-12);
  }
}

TEST(QCellStepTest, ModeNestingBLstmEqualsUnitScaleMubinn1) {
  SeededRng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const FpModel fp = random_model(rng, 7, 6, 1.0);
    QuantConfig unit = QuantConfig::mubinn1(1, 1);
    unit.unit_scales = true;
    unit.pow2_scales = false;
    const QuantizedModel a = quantize_model(fp, QuantConfig::b_lstm());
    const QuantizedModel b = quantize_model(fp, unit);
    std::vector<GateTrace> ta;
    std::vector<GateTrace> tb;
    const Sequence seq = random_sequence(rng, 7, 6);
    const QForwardResult ra = a.forward(seq, &ta);
    const QForwardResult rb = b.forward(seq, &tb);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(ta[t].preact[k], tb[t].preact[k]);
    }
    EXPECT_EQ(ra.final_state.h, rb.final_state.h);
  }
}

TEST(QCellStepTest, RejectsBadDims) {
  const QuantizedModel q = quantize_model(zero_model(3, 2), QuantConfig::mubinn2(2, 2));
  EXPECT_THROW(q.step(RealVector{1, 2}, q.initial_state()), std::invalid_argument);
  QuantState s = q.initial_state();
  s.c = RealVector(3);
  EXPECT_THROW(q.step(RealVector{1, 2, 3}, s), std::invalid_argument);
}

TEST(QCellStepTest, CachesMlbStateForNextStep) {
  SeededRng rng(9);
  const FpModel fp = random_model(rng, 3, 4, 1.0);
  const QuantizedModel q = quantize_model(fp, QuantConfig::mubinn2(3, 3));
  const QuantState s = q.step(RealVector{0.2, -0.4, 0.9}, q.initial_state());
  ASSERT_TRUE(s.h_q.has_value());
  ASSERT_TRUE(s.c_q.has_value());
  EXPECT_EQ(mlb_reconstruct(*s.h_q), mlb_reconstruct(q.quantize_activation(s.h)));
  EXPECT_EQ(mlb_reconstruct(*s.c_q), mlb_reconstruct(q.quantize_activation(s.c)));
}

TEST(QForwardTest, SingleStepMatchesCell) {
  SeededRng rng(10);
  const FpModel fp = random_model(rng, 4, 4, 1.0);
  const QuantizedModel q = quantize_model(fp, QuantConfig::mubinn2(2, 3));
  const RealVector x = rng_uniform(rng, -1, 1, 4);
  const QForwardResult r = q.forward(Sequence{x});
  const QuantState s = q_cell_step(q, x, q.initial_state());
  EXPECT_EQ(r.final_state.h, s.h);
  EXPECT_EQ(r.final_state.c, s.c);
  EXPECT_EQ(r.output.label, classify(fp.head, s.h).label);
  EXPECT_THROW(q.forward(Sequence{}), std::invalid_argument);
}

TEST(QForwardTest, DeterministicAcrossRuns) {
  SeededRng rng(11);
  const FpModel fp = random_model(rng, 8, 6, 0.5);
  const Sequence seq = random_sequence(rng, 8, 40);
  for (const QuantConfig& cfg :
       {QuantConfig::b_lstm(), QuantConfig::mubinn1(3, 3), QuantConfig::mubinn2(3, 3)}) {
    const QForwardResult a = quantize_model(fp, cfg).forward(seq);
    const QForwardResult b = quantize_model(fp, cfg).forward(seq);
    EXPECT_EQ(a.final_state.h, b.final_state.h);
    EXPECT_EQ(a.output.logits, b.output.logits);
  }
}

TEST(QForwardTest, PreactivationErrorFallsWithLevels) {
  SeededRng rng(12);
  const FpModel fp = random_model(rng, 16, 16, 0.5);
  const Sequence seq = random_sequence(rng, 16, 20);
  const double e1 = mean_preactivation_error(fp, quantize_model(fp, QuantConfig::mubinn2(1, 1)), seq);
  const double e3 = mean_preactivation_error(fp, quantize_model(fp, QuantConfig::mubinn2(3, 3)), seq);
  const double e5 = mean_preactivation_error(fp, quantize_model(fp, QuantConfig::mubinn2(5, 5)), seq);
  EXPECT_GT(e1, e3);
  EXPECT_GT(e3, e5);
}

TEST(QForwardTest, ConvergenceTrendHoldsStatistically) {
  SeededRng rng(13);
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const FpModel fp = random_model(rng, 8, 8, 0.5);
    const Sequence seq = random_sequence(rng, 8, 8);
    double prev = 1e300;
    bool monotone = true;
    for (std::size_t k = 1; k <= 5; ++k) {
      const double e =
          mean_preactivation_error(fp, quantize_model(fp, QuantConfig::mubinn2(k, k)), seq);
      if (e > prev) monotone = false;
      prev = e;
    }
    if (monotone) ++good;
  }
  EXPECT_GE(good, 90);
}

TEST(QForwardTest, LongSequenceStaysFiniteAndGatesBounded) {
  SeededRng rng(14);
  const FpModel fp = random_model(rng, 32, 100, 0.1);
  const Sequence seq = random_sequence(rng, 32, 1300);
  const QuantizedModel q = quantize_model(fp, QuantConfig::mubinn2(3, 3));
  std::vector<GateTrace> traces;
  const QForwardResult r = q.forward(seq, &traces);
  EXPECT_EQ(r.hidden.size(), 1300u);
  for (const RealVector& h : r.hidden) {
    for (double v : h) ASSERT_TRUE(std::isfinite(v));
  }
  for (double v : r.final_state.c) EXPECT_TRUE(std::isfinite(v));
  for (std::size_t t = 0; t < traces.size(); t += 97) {
    const RealVector f_hat = mlb_reconstruct(q.quantize_activation(
        q.sigmoid_lut().eval(traces[t].preact[gate_index(Gate::kForget)])));
    for (double v : f_hat) EXPECT_LE(std::fabs(v), 1.5);
  }
}

TEST(QForwardTest, AllModesRunAtFullScale) {
  SeededRng rng(15);
  const FpModel fp = random_model(rng, 32, 100, 0.1);
  const Sequence seq = random_sequence(rng, 32, 1300);
  QuantConfig fp_rec = QuantConfig::mubinn1(2, 2);
  fp_rec.binarize_recurrent = false;
  for (const QuantConfig& cfg : {QuantConfig::b_lstm(), QuantConfig::mubinn1(3, 3),
                                 fp_rec, QuantConfig::mubinn2(3, 3)}) {
    const QForwardResult r = quantize_model(fp, cfg).forward(seq);
    for (double v : r.output.logits) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(ReconstructionReportTest, NamesEveryTensor) {
  SeededRng rng(16);
  const FpModel fp = random_model(rng, 3, 3, 1.0);
  const auto report = reconstruction_report(fp, quantize_model(fp, QuantConfig::mubinn2(2, 2)));
  ASSERT_EQ(report.size(), 12u);
  EXPECT_EQ(report[0].name, "wx_f");
  EXPECT_EQ(report[11].name, "b_o");
  EXPECT_EQ(report[2].l2_error, 0.0);
}

}  // namespace
}  // namespace mubinn
