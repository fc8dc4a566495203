#include "mubinn/synthetic_task.h"

#include <algorithm>
#include <stdexcept>

#include <gtest/gtest.h>

#include "mubinn/binarized_lstm.h"

namespace mubinn {
namespace {

struct ConstantClassifier {
  std::size_t label = 0;
  Classification predict(const Sequence&) const {
    return {RealVector{1.0, 0.0}, label};
  }
};

TEST(GenDatasetTest, ShapeAndBalance) {
  SignMeanTask task;
  task.samples = 101;
  const Dataset d = gen_dataset(task);
  EXPECT_EQ(d.timesteps, 64u);
  EXPECT_EQ(d.features, 8u);
  ASSERT_EQ(d.samples.size(), 101u);
  std::size_t ones = 0;
  for (const Sample& s : d.samples) {
    ASSERT_EQ(s.seq.size(), 64u);
    ASSERT_EQ(s.seq[0].size(), 8u);
    ones += s.label;
  }
  const long zeros = static_cast<long>(101 - ones);
  EXPECT_LE(std::abs(zeros - static_cast<long>(ones)), 1);
}

TEST(GenDatasetTest, NoiselessValuesAreSignedMargin) {
  SignMeanTask task;
  task.noise = 0.0;
  task.samples = 10;
  for (const Sample& s : gen_dataset(task).samples) {
    const double want = s.label == 1 ? 0.3 : -0.3;
    for (const RealVector& x : s.seq) {
      for (double v : x) EXPECT_EQ(v, want);
    }
  }
}

TEST(GenDatasetTest, SeedGivesByteIdenticalText) {
  SignMeanTask task;
  task.samples = 40;
  EXPECT_EQ(format_dataset(gen_dataset(task)), format_dataset(gen_dataset(task)));
  SignMeanTask other = task;
  other.seed = 2;
  EXPECT_NE(format_dataset(gen_dataset(task)), format_dataset(gen_dataset(other)));
}

TEST(GenDatasetTest, RejectsInvalidTask) {
  SignMeanTask bad;
  bad.margin = 0.0;
  EXPECT_THROW(gen_dataset(bad), std::invalid_argument);
  bad = SignMeanTask{};
  bad.noise = -1.0;
  EXPECT_THROW(gen_dataset(bad), std::invalid_argument);
  bad = SignMeanTask{};
  bad.timesteps = 0;
  EXPECT_THROW(gen_dataset(bad), std::invalid_argument);
}

TEST(IntegratorModelTest, ConstantPositiveInputIsClassOne) {
  const FpModel m = build_integrator_model(8, 4);
  EXPECT_EQ(m.predict(Sequence(20, RealVector(8, 0.5))).label, 1u);
  EXPECT_EQ(m.predict(Sequence(20, RealVector(8, -0.5))).label, 0u);
}

TEST(IntegratorModelTest, NegatedInputFlipsLabel) {
  const FpModel m = build_integrator_model(8, 4);
  SeededRng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Sequence seq;
    Sequence neg;
    for (int t = 0; t < 16; ++t) {
      RealVector x = rng_uniform(rng, -1, 1, 8);
      RealVector y(8);
      for (std::size_t j = 0; j < 8; ++j) y[j] = -x[j];
      seq.push_back(x);
      neg.push_back(y);
    }
    const Classification a = m.predict(seq);
    const Classification b = m.predict(neg);
    if (a.logits[0] == a.logits[1]) continue;  // exact zero cell
    EXPECT_NE(a.label, b.label);
  }
}

TEST(IntegratorModelTest, Construction) {
  const FpModel m = build_integrator_model(8, 4);
  EXPECT_EQ(m.lstm.b[gate_index(Gate::kForget)], RealVector(4, 10.0));
  EXPECT_EQ(m.lstm.b[gate_index(Gate::kCell)], RealVector(4, 0.0));
  EXPECT_EQ(m.lstm.wx[gate_index(Gate::kCell)].at(2, 5), 0.1 / 8);
  for (Gate g : kGates) EXPECT_EQ(m.lstm.wh[gate_index(g)], RealMatrix(4, 4));
  EXPECT_EQ(m.head.w.at(0, 3), -1.0);
  EXPECT_EQ(m.head.w.at(1, 3), 1.0);
  EXPECT_THROW(build_integrator_model(8, 0), std::invalid_argument);
}

TEST(EvaluateTest, NoiselessTaskIsSolved) {
  SignMeanTask task;
  task.noise = 0.0;
  task.samples = 64;
  EXPECT_EQ(evaluate(build_integrator_model(8, 4), gen_dataset(task)), 1.0);
}

TEST(EvaluateTest, ReferenceAccuracyOnDefaultTask) {
  const Dataset d = gen_dataset(SignMeanTask{});
  // Frozen from a reference run over the seeded default task.
  EXPECT_EQ(evaluate(build_integrator_model(8, 4), d), 1.0);
}

TEST(EvaluateTest, QuantizedThreeThreeWithinThreePoints) {
  const Dataset d = gen_dataset(SignMeanTask{});
  const FpModel fp = build_integrator_model(8, 4);
  const double ref = evaluate(fp, d);
  const double q = evaluate(quantize_model(fp, QuantConfig::mubinn2(3, 3)), d, 2);
  EXPECT_EQ(q, 1.0);
  EXPECT_LE(std::abs(ref - q), 0.03);
}

TEST(EvaluateTest, ConstantClassifierScoresHalf) {
  const Dataset d = gen_dataset(SignMeanTask{});
  EXPECT_EQ(evaluate(ConstantClassifier{0}, d), 0.5);
  SignMeanTask odd;
  odd.samples = 11;
  EXPECT_NEAR(evaluate(ConstantClassifier{0}, gen_dataset(odd)), 0.5, 1.0 / 11);
}

TEST(EvaluateTest, PermutationInvariant) {
  SignMeanTask task;
  task.noise = 3.0;
  task.samples = 97;
  Dataset d = gen_dataset(task);
  const FpModel m = build_integrator_model(8, 4);
  const double before = evaluate(m, d);
  EXPECT_LT(before, 1.0);
  std::reverse(d.samples.begin(), d.samples.end());
  std::rotate(d.samples.begin(), d.samples.begin() + 13, d.samples.end());
  EXPECT_EQ(evaluate(m, d), before);
}

TEST(EvaluateTest, WorkerCountDoesNotChangeLabels) {
  SignMeanTask task;
  task.noise = 3.0;
  task.samples = 50;
  const Dataset d = gen_dataset(task);
  SeededRng rng(4);
  const FpModel fp = build_random_model(rng, 8, 6, 2, 0.5);
  const QuantizedModel q = quantize_model(fp, QuantConfig::mubinn2(2, 2));
  const auto one = predict_all(q, d, 1);
  for (std::size_t w : {2u, 3u, 4u, 64u}) EXPECT_EQ(predict_all(q, d, w), one);
  EXPECT_EQ(predict_all(fp, d, 4), predict_all(fp, d, 1));
}

TEST(EvaluateTest, EmptyDatasetThrows) {
  Dataset d;
  d.timesteps = 1;
  d.features = 1;
  EXPECT_THROW(evaluate(ConstantClassifier{}, d), std::invalid_argument);
}

TEST(CheckCompatibleTest, FeatureMismatch) {
  SignMeanTask task;
  task.samples = 2;
  const Dataset d = gen_dataset(task);
  EXPECT_NO_THROW(check_compatible(8, d));
  EXPECT_THROW(check_compatible(7, d), std::invalid_argument);
}

TEST(AnyModelClassifierTest, MatchesUnderlyingModel) {
  SignMeanTask task;
  task.samples = 30;
  task.noise = 2.0;
  const Dataset d = gen_dataset(task);
  const FpModel fp = build_integrator_model(8, 4);
  const AnyModel any = fp;
  EXPECT_EQ(evaluate(AnyModelClassifier{any}, d), evaluate(fp, d));
}

}  // namespace
}  // namespace mubinn
