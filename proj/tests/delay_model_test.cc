#include "mubinn/delay_model.h"

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

namespace mubinn {
namespace {

BitLevel lv(int n) { return BitLevel::levels(n); }

TEST(EstimateDelayTest, MonotoneOnDiagonal) {
  const GateDelayParams p;
  EXPECT_LT(estimate_delay(lv(1), lv(1), p), estimate_delay(lv(3), lv(3), p));
  EXPECT_LT(estimate_delay(lv(3), lv(3), p), estimate_delay(lv(5), lv(5), p));
}

TEST(EstimateDelayTest, StrictlyIncreasingInLevels) {
  const GateDelayParams p;
  for (int a = 1; a <= 6; ++a) {
    for (int w = 1; w <= 6; ++w) {
      EXPECT_LT(estimate_delay(lv(a), lv(w), p), estimate_delay(lv(a + 1), lv(w), p));
      EXPECT_LT(estimate_delay(lv(a), lv(w), p), estimate_delay(lv(a), lv(w + 1), p));
      EXPECT_LT(estimate_delay(lv(a), lv(w), p), estimate_delay(BitLevel::fp(), lv(w), p));
    }
  }
}

TEST(EstimateDelayTest, FormulaInstanceAtOneOne) {
  GateDelayParams p;
  p.t_scale_mult = 1e-300;  // effectively zero; zero itself is not a valid param
  const double want = p.t_xnor + 5 * p.t_full_adder + p.t_add_fp + p.t_lut;
  EXPECT_NEAR(estimate_delay(lv(1), lv(1), p), want, 1e-15);
}

TEST(EstimateDelayTest, ClosedFormsWithDefaults) {
  const GateDelayParams p;
  EXPECT_NEAR(estimate_delay(lv(1), lv(1), p), 0.044, 1e-12);
  EXPECT_NEAR(estimate_delay(lv(3), lv(3), p),
              0.002 + 5 * 0.004 + 9 * 0.002 + 8 * 0.003 + 0.003 + 0.017, 1e-12);
  EXPECT_NEAR(estimate_delay(BitLevel::fp(), BitLevel::fp(), p),
              132 * (0.0293788 + 0.003) + 0.003 + 0.017, 1e-12);
  EXPECT_NEAR(estimate_delay(BitLevel::fp(), BitLevel::fp(), p), 4.294, 1e-5);
}

TEST(EstimateDelayTest, StrictlyIncreasingInUsedParameters) {
  const GateDelayParams base;
  using Field = double GateDelayParams::*;
  const Field binarized[] = {&GateDelayParams::t_xnor, &GateDelayParams::t_full_adder,
                             &GateDelayParams::t_scale_mult, &GateDelayParams::t_add_fp,
                             &GateDelayParams::t_lut};
  for (Field f : binarized) {
    GateDelayParams up = base;
    up.*f *= 1.5;
    EXPECT_GT(estimate_delay(lv(2), lv(3), up), estimate_delay(lv(2), lv(3), base));
  }
  const Field fp[] = {&GateDelayParams::t_mult_fp, &GateDelayParams::t_add_fp,
                      &GateDelayParams::t_lut};
  for (Field f : fp) {
    GateDelayParams up = base;
    up.*f *= 1.5;
    EXPECT_GT(estimate_delay(BitLevel::fp(), lv(3), up),
              estimate_delay(BitLevel::fp(), lv(3), base));
  }
  GateDelayParams wider = base;
  wider.vector_len += 1;
  EXPECT_GT(estimate_delay(BitLevel::fp(), BitLevel::fp(), wider),
            estimate_delay(BitLevel::fp(), BitLevel::fp(), base));
  wider.vector_len = 64;
  EXPECT_GT(estimate_delay(lv(1), lv(1), wider), estimate_delay(lv(1), lv(1), base));
  GateDelayParams taller = base;
  taller.hidden += 1;
  EXPECT_GT(estimate_delay(BitLevel::fp(), BitLevel::fp(), taller),
            estimate_delay(BitLevel::fp(), BitLevel::fp(), base));
}

TEST(EstimateDelayTest, RejectsNonPositiveParams) {
  GateDelayParams p;
  p.t_lut = 0.0;
  EXPECT_THROW(estimate_delay(lv(1), lv(1), p), std::invalid_argument);
  GateDelayParams q;
  q.hidden = 0;
  EXPECT_THROW(estimate_delay(lv(1), lv(1), q), std::invalid_argument);
}

TEST(EstimateDelayTest, AgreesWithTableOnDominance) {
  // Wherever one grid point dominates another in both A and W, the model
  // and the table order them the same way.
  const GateDelayParams p;
  const DelayReference ref = DelayReference::bundled();
  for (int a1 = 1; a1 <= 5; ++a1) {
    for (int w1 = 1; w1 <= 5; ++w1) {
      for (int a2 = a1; a2 <= 5; ++a2) {
        for (int w2 = w1; w2 <= 5; ++w2) {
          if (a1 == a2 && w1 == w2) continue;
          EXPECT_LT(ref.at(lv(a1), lv(w1)), ref.at(lv(a2), lv(w2)));
          EXPECT_LT(estimate_delay(lv(a1), lv(w1), p), estimate_delay(lv(a2), lv(w2), p));
        }
      }
    }
  }
}

TEST(EstimateDelayTest, DependsOnlyOnLevelProduct) {
  // The table does not: (1,4) and (4,1) differ there.
  const GateDelayParams p;
  EXPECT_EQ(estimate_delay(lv(1), lv(4), p), estimate_delay(lv(4), lv(1), p));
  EXPECT_EQ(estimate_delay(lv(2), lv(2), p), estimate_delay(lv(4), lv(1), p));
  const DelayReference ref = DelayReference::bundled();
  EXPECT_NE(ref.at(lv(1), lv(4)), ref.at(lv(4), lv(1)));
}

TEST(DelayReferenceTest, BundledValues) {
  const DelayReference ref = DelayReference::bundled();
  EXPECT_EQ(ref.at(lv(1), lv(1)), 0.042);
  EXPECT_EQ(ref.at(lv(3), lv(3)), 0.091);
  EXPECT_EQ(ref.at(lv(5), lv(5)), 0.164);
  EXPECT_EQ(ref.at(lv(3), BitLevel::fp()), 4.264);
  EXPECT_EQ(ref.at(BitLevel::fp(), lv(5)), 1.154);
  EXPECT_EQ(ref.at(BitLevel::fp(), BitLevel::fp()), 4.294);
}

TEST(DelayReferenceTest, OutOfGridThrows) {
  const DelayReference ref = DelayReference::bundled();
  EXPECT_THROW(ref.at(lv(6), lv(1)), std::out_of_range);
  EXPECT_THROW(ref.at(lv(1), lv(-1)), std::out_of_range);
}

TEST(DelayReferenceTest, RejectsNonMonotoneGrid) {
  DelayReference::Grid g = DelayReference::bundled().grid();
  g[2][3] = g[2][2];
  EXPECT_THROW(DelayReference{g}, std::invalid_argument);
  g = DelayReference::bundled().grid();
  g[4][1] = 0.05;  // below the row above
  EXPECT_THROW(DelayReference{g}, std::invalid_argument);
  g = DelayReference::bundled().grid();
  g[0][0] = -1.0;
  EXPECT_THROW(DelayReference{g}, std::invalid_argument);
}

TEST(TableSpeedupTest, Values) {
  const DelayReference ref = DelayReference::bundled();
  EXPECT_NEAR(table_speedup(ref, lv(3), lv(3)), 4.294 / 0.091, 1e-12);
  EXPECT_NEAR(table_speedup(ref, lv(3), lv(3)), 47.19, 0.01);
  EXPECT_NEAR(table_speedup_row_fp(ref, lv(3), lv(3)), 46.86, 0.01);
  EXPECT_NEAR(table_speedup(ref, lv(1), lv(1)), 102.2, 0.05);
  EXPECT_EQ(table_speedup(ref, BitLevel::fp(), BitLevel::fp()), 1.0);
  EXPECT_GE(table_speedup(ref, lv(3), lv(3)), 46.0);
  EXPECT_LE(table_speedup(ref, lv(3), lv(3)), 48.0);
  EXPECT_THROW(table_speedup(ref, lv(7), lv(3)), std::out_of_range);
}

TEST(OpsCountTest, SingleUnitCell) {
  const OpsCount c = ops_count(lv(1), lv(1), {1, 1}, false);
  EXPECT_EQ(c.xnor_ops, 8);
  EXPECT_EQ(c.fp_mults, 0);
  EXPECT_EQ(c.pointwise_mults, 3);
  const OpsCount d = ops_count(lv(1), lv(1), {1, 1}, true);
  EXPECT_EQ(d.xnor_ops, 10);
  EXPECT_EQ(d.pointwise_mults, 1);
}

TEST(OpsCountTest, ThreeThreeIsNineTimesOneOne) {
  for (bool pw : {false, true}) {
    const OpsCount c1 = ops_count(lv(1), lv(1), {32, 100}, pw);
    const OpsCount c3 = ops_count(lv(3), lv(3), {32, 100}, pw);
    EXPECT_EQ(c3.xnor_ops, 9 * c1.xnor_ops);
    EXPECT_EQ(c3.scale_mults, 9 * c1.scale_mults);
  }
}

TEST(OpsCountTest, FullPrecisionMatchesWeightShapes) {
  // Every gate matmul multiply is one weight entry touched once per step.
  const std::int64_t n = 32;
  const std::int64_t h = 100;
  const std::int64_t counted = 4 * (h * n) + 4 * (h * h);
  const OpsCount c = ops_count(BitLevel::fp(), BitLevel::fp(), {n, h}, false);
  EXPECT_EQ(c.fp_mults, counted);
  EXPECT_EQ(c.fp_mults, 52800);
  EXPECT_EQ(c.pointwise_mults, 300);
  EXPECT_EQ(c.xnor_ops, 0);
  EXPECT_EQ(ops_count(lv(3), BitLevel::fp(), {n, h}, true), c);
}

TEST(OpsCountTest, PopcountBits) {
  const OpsCount c = ops_count(lv(2), lv(3), {4, 5}, false);
  EXPECT_EQ(c.popcount_bits, 4 * 5 * 6 * 9);
  EXPECT_THROW(ops_count(lv(1), lv(1), {0, 5}, false), std::invalid_argument);
}

TEST(BitLevelTest, Parse) {
  EXPECT_TRUE(parse_bit_level("fp").is_fp());
  EXPECT_TRUE(parse_bit_level("FP").is_fp());
  EXPECT_EQ(parse_bit_level("3"), lv(3));
  EXPECT_THROW(parse_bit_level("0"), std::invalid_argument);
  EXPECT_THROW(parse_bit_level("3x"), std::invalid_argument);
  EXPECT_EQ(to_string(BitLevel::fp()), "FP");
  EXPECT_EQ(to_string(lv(4)), "4");
}

TEST(CalibrationTest, ParsesKnownKeys) {
  const GateDelayParams p = parse_calibration(
      "# tuned\n"
      "t_xnor = 0.01\n"
      "\n"
      "hidden=64   # trailing comment\n");
  EXPECT_EQ(p.t_xnor, 0.01);
  EXPECT_EQ(p.hidden, 64);
  EXPECT_EQ(p.t_lut, GateDelayParams{}.t_lut);
}

TEST(CalibrationTest, UnknownKeyIsNamed) {
  try {
    parse_calibration("t_bogus = 1\n");
    FAIL() << "expected an exception";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("t_bogus"), std::string::npos);
  }
}

TEST(CalibrationTest, RejectsBadValues) {
  EXPECT_THROW(parse_calibration("t_lut = abc\n"), std::invalid_argument);
  EXPECT_THROW(parse_calibration("t_lut = -1\n"), std::invalid_argument);
  EXPECT_THROW(parse_calibration("t_lut 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_calibration("vector_len = 2.5\n"), std::invalid_argument);
  EXPECT_THROW(load_calibration("/nonexistent/calib.txt"), std::runtime_error);
}

}  // namespace
}  // namespace mubinn
