#ifndef MUBINN_SYNTHETIC_TASK_H_
#define MUBINN_SYNTHETIC_TASK_H_

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mubinn/lstm_reference.h"
#include "mubinn/model_io.h"

namespace mubinn {

// Binary sign-of-mean classification. Sample k has label k % 2 and every
// feature value is (2y - 1) * margin + N(0, noise^2).
struct SignMeanTask {
  std::size_t timesteps = 64;
  std::size_t features = 8;
  double noise = 1.0;
  double margin = 0.3;
  std::size_t samples = 512;
  std::uint64_t seed = 1;

  void validate() const;
};

Dataset gen_dataset(const SignMeanTask& task);

// Hand-set LSTM that integrates the input mean into its cell state:
// saturated forget/input/output gates (bias +10), W_gx = (0.1 / F) * ones,
// all recurrent weights zero. The head maps sum(h) to [-s, +s], so the label
// is the sign of the accumulated input.
FpModel build_integrator_model(std::size_t features, std::size_t hidden);

// Random-weight model, uniform in [-scale, scale].
FpModel build_random_model(SeededRng& rng, std::size_t input,
                           std::size_t hidden, std::size_t classes,
                           double scale);

template <typename M>
concept SequenceClassifier = requires(const M& m, const Sequence& s) {
  { m.predict(s) } -> std::convertible_to<Classification>;
};

// Predicted labels for every sample; samples are split into contiguous
// blocks across `workers` threads, each writing only its own slots.
template <SequenceClassifier M>
std::vector<std::size_t> predict_all(const M& model, const Dataset& data,
                                     std::size_t workers = 1) {
  std::vector<std::size_t> labels(data.samples.size());
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      labels[i] = model.predict(data.samples[i].seq).label;
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, labels.size()));
  if (workers == 1) {
    run(0, labels.size());
    return labels;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (labels.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(labels.size(), begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(run, begin, end);
  }
  for (auto& t : pool) t.join();
  return labels;
}

// Fraction of samples whose argmax label matches.
template <SequenceClassifier M>
double evaluate(const M& model, const Dataset& data, std::size_t workers = 1) {
  if (data.samples.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const std::vector<std::size_t> labels = predict_all(model, data, workers);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == data.samples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

// Adapter so a file-loaded model of either kind can be evaluated.
struct AnyModelClassifier {
  const AnyModel& model;
  Classification predict(const Sequence& s) const {
    return mubinn::predict(model, s);
  }
};

// Throws unless the dataset shape fits the model's input size.
void check_compatible(std::size_t model_input, const Dataset& data);

}  // namespace mubinn

#endif  // MUBINN_SYNTHETIC_TASK_H_
